"""LUT-driven receiver energy per successfully received information bit.

    eta = (e_h / L + p_bb / rate + eta_cc) / (1 - p_e)

``e_h`` is the per-frame overhead energy (training, header, IFS, ACK),
``p_bb`` the RF plus baseband power while the payload streams in and
``eta_cc`` the channel decoder's energy per bit. All quantities are SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Mapping

from eelink.mode_space import (
    DEFAULT_PHY,
    MAX_RX,
    Detector,
    FrameTiming,
    PhyConstants,
    SystemMode,
    coded_rate,
    data_rate,
    frame_timing,
)


def _default_p_det() -> dict[tuple[Detector, int], float]:
    mmse = (209e-3, 230e-3, 302e-3, 321e-3)
    lrald = (214e-3, 235e-3, 307e-3, 326e-3)
    table = {(Detector.MMSE, n + 1): p for n, p in enumerate(mmse)}
    table.update({(Detector.LRALD, n + 1): p for n, p in enumerate(lrald)})
    return table


@dataclass(frozen=True)
class EnergyLut:
    # defaults are a fit to the reference energy-gain targets, not a measured chip
    p_af_per_chain: float = 15.2e-3
    p_df_per_chain: float = 2.66e-3
    p_fft_per_chain: float = 3.25e-3
    p_det: Mapping[tuple[Detector, int], float] = field(default_factory=_default_p_det)
    eta_cc_nominal: float = 0.563e-9
    e_chpp: float = 0.155e-6
    e_header_fixed: float = 2.7e-6
    e_ack: float = 1.02e-6
    c_dec_core: float = 631e6
    r_min: float = 0.29

    def __post_init__(self):
        for f in fields(self):
            if f.name == "p_det":
                continue
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValueError(f"{f.name} must be a finite non-negative number, got {v!r}")
        if not 0 < self.r_min <= 1:
            raise ValueError("r_min must lie in (0, 1]")
        if not self.c_dec_core > 0:
            raise ValueError("c_dec_core must be positive")
        table = {(Detector(d), int(n)): float(p) for (d, n), p in self.p_det.items()}
        missing = [(d, n) for d in Detector for n in range(1, MAX_RX + 1) if (d, n) not in table]
        if missing:
            raise ValueError(f"p_det lacks entries for {missing}")
        if any(not (math.isfinite(p) and p >= 0) for p in table.values()):
            raise ValueError("detector powers must be finite and non-negative")
        object.__setattr__(self, "p_det", table)

    @classmethod
    def from_mapping(cls, items: Mapping[str, str]) -> "EnergyLut":
        """Build from flat string key/values.

        Detector powers are given as ``p_det.mmse`` / ``p_det.lrald`` with one
        value per stream count (1..4), comma or whitespace separated. Unknown
        keys raise ``KeyError``.
        """
        scalar = {f.name for f in fields(cls) if f.name != "p_det"}
        kwargs = {}
        p_det = dict(_default_p_det())
        for raw_key, raw in items.items():
            key = raw_key.strip().lower()
            if key in scalar:
                kwargs[key] = _parse_float(key, raw)
            elif key.startswith("p_det.") and key[6:].upper() in Detector.__members__:
                det = Detector[key[6:].upper()]
                values = [_parse_float(key, v) for v in raw.replace(",", " ").split()]
                if len(values) != MAX_RX:
                    raise ValueError(f"{key} needs {MAX_RX} values, got {len(values)}")
                p_det.update({(det, n + 1): v for n, v in enumerate(values)})
            else:
                raise KeyError(f"unknown LUT key {raw_key!r}")
        return cls(p_det=p_det, **kwargs)

    def to_mapping(self) -> dict[str, str]:
        out = {f.name: repr(getattr(self, f.name)) for f in fields(self) if f.name != "p_det"}
        for det in Detector:
            vals = [self.p_det[(det, n)] for n in range(1, MAX_RX + 1)]
            out[f"p_det.{det.value.lower()}"] = ", ".join(repr(v) for v in vals)
        return out


def _parse_float(key: str, raw) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ValueError(f"{key}: not a number: {raw!r}") from None


DEFAULT_LUT = EnergyLut()


@dataclass(frozen=True)
class EnergyBreakdown:
    e_h: float
    p_bb: float
    eta_cc: float
    eta_total: float  # inf when the frame is lost

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.eta_total)


def dvfs_scale(rate_ratio: float, r_min: float) -> float:
    """Energy-per-operation multiplier for a circuit slowed to ``rate_ratio`` of nominal.

    Frequency tracks the supply voltage and switching energy goes with its
    square, so the multiplier is ``max(r, r_min)**2``.
    """
    if not 0 < rate_ratio <= 1:
        raise ValueError(f"rate ratio must lie in (0, 1], got {rate_ratio}")
    if not 0 < r_min <= 1:
        raise ValueError(f"r_min must lie in (0, 1], got {r_min}")
    return max(rate_ratio, r_min) ** 2


def eta_cc(mode: SystemMode, lut: EnergyLut = DEFAULT_LUT, phy: PhyConstants = DEFAULT_PHY) -> float:
    """Decoder energy per bit, with the per-core load setting the DVFS point."""
    load = coded_rate(mode.mcs, phy=phy) / lut.c_dec_core
    if load > 1:
        raise ValueError(f"{mode.mcs} overdrives the decoder ({load:.3f} x nominal throughput)")
    if not mode.dvfs:
        return lut.eta_cc_nominal
    return lut.eta_cc_nominal * dvfs_scale(load, lut.r_min)


def p_bb(mode: SystemMode, lut: EnergyLut = DEFAULT_LUT) -> float:
    """RF and baseband power during reception.

    The time-interleaved digital frontend and FFT slow down when fewer chains
    are active, so under DVFS their per-chain power scales with the chain
    fraction.
    """
    n = mode.n_rx
    digital = 1.0
    if mode.dvfs:
        digital = dvfs_scale(n / MAX_RX, lut.r_min)
    return (lut.p_af_per_chain * n
            + (lut.p_df_per_chain + lut.p_fft_per_chain) * n * digital
            + lut.p_det[(mode.detector, mode.mcs.n_ss)])


def e_h(mode: SystemMode, lut: EnergyLut, timing: FrameTiming) -> float:
    return (p_bb(mode, lut) * timing.overhead_duration + lut.e_chpp * mode.n_rx
            + lut.e_header_fixed + lut.e_ack)


def combine(e_h_j: float, p_bb_w: float, rate: float, eta_cc_j: float,
            length_bits: int, p_e: int) -> EnergyBreakdown:
    if length_bits < 1:
        raise ValueError("frame length must be at least one bit")
    if p_e not in (0, 1):
        raise ValueError(f"genie error probability must be 0 or 1, got {p_e!r}")
    if p_e == 1:
        return EnergyBreakdown(e_h_j, p_bb_w, eta_cc_j, math.inf)
    total = (e_h_j / length_bits + p_bb_w / rate + eta_cc_j) / (1 - p_e)
    return EnergyBreakdown(e_h_j, p_bb_w, eta_cc_j, total)


def eta(mode: SystemMode, length_bits: int, p_e: int, lut: EnergyLut = DEFAULT_LUT,
        phy: PhyConstants = DEFAULT_PHY) -> EnergyBreakdown:
    """Energy per successfully received bit for one frame of ``length_bits``."""
    timing = frame_timing(mode, length_bits, phy)
    return combine(e_h(mode, lut, timing), p_bb(mode, lut), data_rate(mode.mcs, phy),
                   eta_cc(mode, lut, phy), length_bits, p_e)
