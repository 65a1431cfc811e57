"""Goodput-guided, energy-guided and goodput-aware energy-guided mode selection.

With a genie error oracle every candidate handed to a selector is known to
succeed, so goodput reduces to the throughput of the candidate.

Tie rules (fixed so that runs are reproducible):
  GG:   highest goodput, then lowest eta, lowest MCS index, MMSE before LRALD
  EG:   lowest eta, then highest goodput, lowest MCS index, MMSE before LRALD
  GAEG: GG rules among candidates with eta < k * eta(EG choice)
Remaining ties go to fewer aggregated frames, then to input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from eelink import energy
from eelink.channel import ChannelRealization
from eelink.detection import DEFAULT_GAPS, SnrGaps, feasibility
from eelink.mode_space import (
    DEFAULT_PHY,
    Detector,
    PhyConstants,
    SystemMode,
    data_rate,
    enumerate_modes,
    frame_timing,
)

BASE_FRAME_BITS = 12000
MAX_AGGREGATE = 16
_DET_RANK = {Detector.MMSE: 0, Detector.LRALD: 1}


class Scheme(str, Enum):
    GG = "GG"
    EG = "EG"
    GAEG = "GAEG"


@dataclass(frozen=True)
class Candidate:
    mode: SystemMode
    eta: float  # J/bit
    goodput: float  # bit/s
    m_frames: int = 1


@dataclass(frozen=True)
class RaDecision:
    scheme: Scheme
    chosen: SystemMode | None  # None means outage
    m_frames: int = 1
    eta: float = math.nan
    goodput: float = 0.0
    k: float | None = None

    @property
    def outage(self) -> bool:
        return self.chosen is None


def _check_k(k: float | None) -> None:
    if k is None or not k > 1:
        raise ValueError(f"GAEG bound factor must exceed 1, got {k}")


def pick_index(scheme: Scheme, eta: np.ndarray, goodput: np.ndarray, mcs: np.ndarray,
               det: np.ndarray, m_frames: np.ndarray, k: float | None = None) -> int:
    """Index of the winning candidate in parallel arrays, or -1 if empty."""
    if len(eta) == 0:
        return -1
    scheme = Scheme(scheme)
    if scheme is Scheme.GG:
        return int(np.lexsort((m_frames, det, mcs, eta, -goodput))[0])
    eg = int(np.lexsort((m_frames, det, mcs, -goodput, eta))[0])
    if scheme is Scheme.EG:
        return eg
    _check_k(k)
    allowed = np.flatnonzero(eta < k * eta[eg])
    order = np.lexsort((m_frames[allowed], det[allowed], mcs[allowed], eta[allowed],
                        -goodput[allowed]))
    return int(allowed[order[0]])


def _select(scheme: Scheme, feasible: Sequence[Candidate], k: float | None = None) -> RaDecision:
    scheme = Scheme(scheme)
    if scheme is Scheme.GAEG:
        _check_k(k)
    cands = list(feasible)
    if not cands:
        return RaDecision(scheme, None, k=k)
    idx = pick_index(
        scheme,
        np.array([c.eta for c in cands], dtype=float),
        np.array([c.goodput for c in cands], dtype=float),
        np.array([c.mode.mcs.index for c in cands]),
        np.array([_DET_RANK[c.mode.detector] for c in cands]),
        np.array([c.m_frames for c in cands]),
        k,
    )
    c = cands[idx]
    return RaDecision(scheme, c.mode, c.m_frames, c.eta, c.goodput, k)


def select_gg(feasible: Sequence[Candidate]) -> RaDecision:
    return _select(Scheme.GG, feasible)


def select_eg(feasible: Sequence[Candidate]) -> RaDecision:
    return _select(Scheme.EG, feasible)


def select_gaeg(feasible: Sequence[Candidate], k: float) -> RaDecision:
    return _select(Scheme.GAEG, feasible, k)


class ModeTable:
    """Per-mode energy components and timing, laid out as arrays.

    ``e_h`` does not depend on the payload length, so eta and goodput for any
    aggregate length follow from a handful of vector operations.
    """

    def __init__(self, modes: Sequence[SystemMode], lut: energy.EnergyLut = energy.DEFAULT_LUT,
                 phy: PhyConstants = DEFAULT_PHY):
        self.modes = list(modes)
        self.lut = lut
        self.phy = phy
        timings = [frame_timing(m, 1, phy) for m in self.modes]
        self.overhead = np.array([t.overhead_duration for t in timings])
        self.p_bb = np.array([energy.p_bb(m, lut) for m in self.modes])
        self.e_h = np.array([energy.e_h(m, lut, t) for m, t in zip(self.modes, timings)])
        self.eta_cc = np.array([energy.eta_cc(m, lut, phy) for m in self.modes])
        self.rate = np.array([data_rate(m.mcs, phy) for m in self.modes])
        self.n_dbps = np.array([m.mcs.n_dbps(phy) for m in self.modes])
        self.mcs = np.array([m.mcs.index for m in self.modes])
        self.det = np.array([_DET_RANK[m.detector] for m in self.modes])
        self.n_rx = np.array([m.n_rx for m in self.modes])
        self.dvfs = np.array([m.dvfs for m in self.modes])

    def __len__(self):
        return len(self.modes)

    def eta(self, length_bits: int) -> np.ndarray:
        return self.e_h / length_bits + self.p_bb / self.rate + self.eta_cc

    def goodput(self, length_bits: int) -> np.ndarray:
        """Delivered bits over the whole frame exchange, overhead included."""
        n_sym = np.ceil((length_bits + self.phy.service_tail_bits) / self.n_dbps)
        return length_bits / (self.overhead + n_sym * self.phy.symbol_period)

    def candidates(self, feasible: np.ndarray, m_frames: int = 1,
                   base_frame_bits: int = BASE_FRAME_BITS) -> list[Candidate]:
        length = m_frames * base_frame_bits
        e, g = self.eta(length), self.goodput(length)
        return [Candidate(self.modes[i], float(e[i]), float(g[i]), m_frames)
                for i in np.flatnonzero(feasible)]

    def decide(self, scheme: Scheme, feasible: np.ndarray, l_max_frames: int = 1,
               k: float | None = None, base_frame_bits: int = BASE_FRAME_BITS) -> RaDecision:
        """Joint (mode, aggregate size) selection over the feasible modes."""
        scheme = Scheme(scheme)
        if scheme is Scheme.GAEG:
            _check_k(k)
        if not 1 <= l_max_frames <= MAX_AGGREGATE:
            raise ValueError(f"aggregate size must lie in 1..{MAX_AGGREGATE}")
        idx = np.flatnonzero(feasible)
        if len(idx) == 0:
            return RaDecision(scheme, None, k=k)
        ms = np.arange(1, l_max_frames + 1)
        eta = np.concatenate([self.eta(m * base_frame_bits)[idx] for m in ms])
        good = np.concatenate([self.goodput(m * base_frame_bits)[idx] for m in ms])
        mode_idx = np.tile(idx, len(ms))
        m_arr = np.repeat(ms, len(idx))
        w = pick_index(scheme, eta, good, self.mcs[mode_idx], self.det[mode_idx], m_arr, k)
        return RaDecision(scheme, self.modes[mode_idx[w]], int(m_arr[w]), float(eta[w]),
                          float(good[w]), k)


def select_with_aggregation(scheme: Scheme, realization: ChannelRealization, l_max_frames: int,
                            base_frame_bits: int = BASE_FRAME_BITS, *,
                            modes: Sequence[SystemMode] | None = None,
                            lut: energy.EnergyLut = energy.DEFAULT_LUT,
                            gaps: SnrGaps = DEFAULT_GAPS, phy: PhyConstants = DEFAULT_PHY,
                            k: float | None = None) -> RaDecision:
    """Pick a mode and an aggregate of 1..``l_max_frames`` base frames.

    Block fading makes the genie verdict independent of the aggregate size,
    but the search runs over the full (mode, size) product.
    """
    table = ModeTable(enumerate_modes() if modes is None else modes, lut, phy)
    ok = feasibility(realization, table.modes, gaps)
    return table.decide(scheme, ok, l_max_frames, k, base_frame_bits)
