"""Monte-Carlo driver, CSV records and summary tables.

Trials that find no feasible mode are kept as outage records: they add zero
goodput and are left out of every energy-per-bit average.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from eelink.channel import draw_flat, draw_selective
from eelink.config import Scenario, SweepConfig
from eelink.detection import feasibility
from eelink.mode_space import MAX_RX, Detector, enumerate_modes
from eelink.rate_adaptation import ModeTable, RaDecision, Scheme

log = logging.getLogger(__name__)

SIG_DIGITS = 6


def _round(x: float) -> float:
    return float(format(x, f".{SIG_DIGITS}g"))


@dataclass(frozen=True)
class TrialRecord:
    snr_db: float
    trial: int
    scheme: str
    mcs: int | None
    n_rx: int | None
    detector: str | None
    dvfs: bool | None
    m_frames: int | None
    outage: bool
    eta_nj_per_bit: float | None
    goodput_mbps: float

    def __post_init__(self):
        if self.outage != (self.eta_nj_per_bit is None):
            raise ValueError("eta is present exactly when the trial is not an outage")

    @classmethod
    def from_decision(cls, snr_db: float, trial: int, label: str, d: RaDecision) -> "TrialRecord":
        if d.outage:
            return cls(_round(snr_db), trial, label, None, None, None, None, None, True, None, 0.0)
        m = d.chosen
        return cls(_round(snr_db), trial, label, m.mcs.index, m.n_rx, m.detector.value, m.dvfs,
                   d.m_frames, False, _round(d.eta * 1e9), _round(d.goodput / 1e6))


CSV_COLUMNS = [f.name for f in fields(TrialRecord)]


def _policy_masks(table: ModeTable) -> dict[str, tuple[Scheme, np.ndarray]]:
    four = table.n_rx == MAX_RX
    mmse = table.det == 0
    everything = np.ones(len(table), dtype=bool)
    return {
        "GG": (Scheme.GG, everything),
        "EG": (Scheme.EG, everything),
        "GAEG": (Scheme.GAEG, everything),
        "BASE": (Scheme.GG, four & mmse & ~table.dvfs),
        "GG_DVFS": (Scheme.GG, four & mmse),
        "EG_4RX": (Scheme.EG, four),
    }


class SweepRunner:
    """Evaluates trials of one configuration. Holds only immutable tables."""

    def __init__(self, cfg: SweepConfig):
        self.cfg = cfg
        self.table = ModeTable(enumerate_modes([Detector.MMSE, Detector.LRALD]), cfg.lut, cfg.phy)
        self.policies = _policy_masks(self.table)

    def realization(self, snr_db: float, trial: int):
        if self.cfg.resolved_channel == "flat":
            return draw_flat(self.cfg.seed, trial, snr_db)
        return draw_selective(self.cfg.seed, trial, snr_db, self.cfg.rms_delay_ns)

    def feasible(self, snr_db: float, trial: int) -> np.ndarray:
        return feasibility(self.realization(snr_db, trial), self.table.modes, self.cfg.gaps)

    def decide(self, ok: np.ndarray, label: str, l_max: int) -> RaDecision:
        scheme, mask = self.policies[label]
        k = self.cfg.k if scheme is Scheme.GAEG else None
        return self.table.decide(scheme, ok & mask, l_max, k, self.cfg.base_frame_bits)

    def trial_records(self, snr_db: float, trial: int, l_max: int | None = None) -> list[TrialRecord]:
        l_max = self.cfg.l_max_frames if l_max is None else l_max
        ok = self.feasible(snr_db, trial)
        return [TrialRecord.from_decision(snr_db, trial, label, self.decide(ok, label, l_max))
                for label in self.cfg.schemes]


def iter_sweep(cfg: SweepConfig) -> Iterator[TrialRecord]:
    """Records in (snr, trial, scheme) order."""
    runner = SweepRunner(cfg)
    for snr in cfg.snr_grid:
        log.info("SNR %.1f dB: %d trials", snr, cfg.trials)
        for trial in range(cfg.trials):
            yield from runner.trial_records(snr, trial)


def run_sweep(cfg: SweepConfig) -> list[TrialRecord]:
    return list(iter_sweep(cfg))


def run_surface(cfg: SweepConfig, l_max_grid: Sequence[int] = tuple(range(1, 17))) -> dict[int, list[TrialRecord]]:
    """Sweep every maximum aggregate size, reusing each trial's genie verdicts."""
    runner = SweepRunner(cfg)
    out: dict[int, list[TrialRecord]] = {l: [] for l in l_max_grid}
    for snr in cfg.snr_grid:
        log.info("surface SNR %.1f dB", snr)
        for trial in range(cfg.trials):
            ok = runner.feasible(snr, trial)
            for l_max in l_max_grid:
                out[l_max].extend(
                    TrialRecord.from_decision(snr, trial, label, runner.decide(ok, label, l_max))
                    for label in cfg.schemes)
    return out


# -- CSV -------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, f".{SIG_DIGITS}g")
    return str(v)


def write_records(records: Iterable[TrialRecord], fh: TextIO) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    n = 0
    for r in records:
        w.writerow([_fmt(v) for v in astuple(r)])
        n += 1
    return n


def records_to_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    write_records(records, buf)
    return buf.getvalue()


def _opt(cast):
    return lambda s: None if s == "" else cast(s)


def _flag(s: str) -> bool:
    if s not in ("0", "1"):
        raise ValueError(f"bad flag {s!r}")
    return s == "1"


_PARSERS = {
    "snr_db": float, "trial": int, "scheme": str, "mcs": _opt(int), "n_rx": _opt(int),
    "detector": _opt(str), "dvfs": _opt(_flag), "m_frames": _opt(int), "outage": _flag,
    "eta_nj_per_bit": _opt(float), "goodput_mbps": float,
}


def read_records(fh: TextIO) -> list[TrialRecord]:
    reader = csv.DictReader(fh)
    if reader.fieldnames != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [TrialRecord(**{k: _PARSERS[k](row[k]) for k in CSV_COLUMNS}) for row in reader]


# -- summaries ---------------------------------------------------------------


@dataclass(frozen=True)
class ModeShare:
    mcs: int
    detector: str
    count: int
    share_pct: float
    mean_eta_nj: float


@dataclass(frozen=True)
class ModeDistribution:
    snr_db: float
    scheme: str
    rows: list[ModeShare]
    mean_eta_nj: float
    n_trials: int
    n_outage: int


def mode_distribution(records: Sequence[TrialRecord]) -> ModeDistribution:
    """Share of non-outage trials per (MCS, detector) with mean eta per group."""
    if not records:
        raise ValueError("no records")
    cells = {(r.snr_db, r.scheme) for r in records}
    if len(cells) != 1:
        raise ValueError(f"records span several (snr, scheme) cells: {sorted(cells)}")
    snr, scheme = cells.pop()
    ok = [r for r in records if not r.outage]
    groups: dict[tuple[int, str], list[float]] = defaultdict(list)
    for r in ok:
        groups[(r.mcs, r.detector)].append(r.eta_nj_per_bit)
    det_order = {d.value: i for i, d in enumerate(Detector)}
    rows = [ModeShare(mcs, det, len(v), 100.0 * len(v) / len(ok), float(np.mean(v)))
            for (mcs, det), v in sorted(groups.items(), key=lambda kv: (det_order[kv[0][1]], kv[0][0]))]
    mean = float(np.mean([r.eta_nj_per_bit for r in ok])) if ok else math.nan
    return ModeDistribution(snr, scheme, rows, mean, len(records), len(records) - len(ok))


@dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    scheme: str
    mean_eta_nj: float  # over non-outage trials
    mean_goodput_mbps: float  # outages count as zero
    n_trials: int
    n_outage: int


def scheme_curves(records: Iterable[TrialRecord]) -> list[CurvePoint]:
    cells: dict[tuple[float, str], list[TrialRecord]] = defaultdict(list)
    for r in records:
        cells[(r.snr_db, r.scheme)].append(r)
    out = []
    for (snr, scheme), rs in sorted(cells.items()):
        etas = [r.eta_nj_per_bit for r in rs if not r.outage]
        out.append(CurvePoint(snr, scheme, float(np.mean(etas)) if etas else math.nan,
                              float(np.mean([r.goodput_mbps for r in rs])), len(rs),
                              len(rs) - len(etas)))
    return out


def curve_lookup(points: Iterable[CurvePoint]) -> dict[tuple[float, str], CurvePoint]:
    return {(p.snr_db, p.scheme): p for p in points}


@dataclass(frozen=True)
class SurfacePoint:
    snr_db: float
    l_max: int
    relative_energy: float
    optimized_goodput_mbps: float
    baseline_goodput_mbps: float


def efficiency_surface(records_by_lmax: dict[int, Sequence[TrialRecord]], optimized: str = "EG",
                       baseline: str = "BASE") -> list[SurfacePoint]:
    """Mean eta of ``optimized`` over mean eta of ``baseline`` per (snr, l_max)."""
    out, missing = [], []
    for l_max in sorted(records_by_lmax):
        curves = curve_lookup(scheme_curves(records_by_lmax[l_max]))
        snrs = sorted({snr for snr, _ in curves})
        if not snrs:
            missing.append((None, l_max))
        for snr in snrs:
            opt, base = curves.get((snr, optimized)), curves.get((snr, baseline))
            if opt is None or base is None or math.isnan(opt.mean_eta_nj) or math.isnan(base.mean_eta_nj):
                missing.append((snr, l_max))
                continue
            out.append(SurfacePoint(snr, l_max, opt.mean_eta_nj / base.mean_eta_nj,
                                    opt.mean_goodput_mbps, base.mean_goodput_mbps))
    if missing:
        raise ValueError(f"surface cells without usable {optimized}/{baseline} data: {missing}")
    return out


def write_table(rows: Iterable, fh: TextIO, columns: Sequence[str] | None = None) -> None:
    rows = list(rows)
    w = csv.writer(fh, lineterminator="\n")
    if columns is None:
        columns = [f.name for f in fields(rows[0])] if rows else []
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in columns])


def write_mode_tables(records: Sequence[TrialRecord], fh: TextIO) -> None:
    cells: dict[tuple[float, str], list[TrialRecord]] = defaultdict(list)
    for r in records:
        cells[(r.snr_db, r.scheme)].append(r)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["snr_db", "scheme", "mcs", "detector", "count", "share_pct", "mean_eta_nj"])
    for key in sorted(cells):
        dist = mode_distribution(cells[key])
        for row in dist.rows:
            w.writerow([_fmt(dist.snr_db), dist.scheme, row.mcs, row.detector, row.count,
                        _fmt(row.share_pct), _fmt(row.mean_eta_nj)])
        w.writerow([_fmt(dist.snr_db), dist.scheme, "average", "", len(cells[key]) - dist.n_outage,
                    "", _fmt(dist.mean_eta_nj)])


def summary_path(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}_{suffix}.csv")
