"""MCS table, extended system-mode set and frame timing.

The rate table is the 40 MHz, 800 ns guard-interval HT table with 108 data
subcarriers. Only the 32 equal-modulation MCSs are modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

# (bits per symbol, code rate) for MCS index mod 8
_MODULATION_CODING = (
    (1, Fraction(1, 2)),
    (2, Fraction(1, 2)),
    (2, Fraction(3, 4)),
    (4, Fraction(1, 2)),
    (4, Fraction(3, 4)),
    (6, Fraction(2, 3)),
    (6, Fraction(3, 4)),
    (6, Fraction(5, 6)),
)

N_MCS = 32
MAX_RX = 4


class Detector(str, Enum):
    MMSE = "MMSE"
    LRALD = "LRALD"


@dataclass(frozen=True)
class PhyConstants:
    """Numerology and protocol timing. All durations in seconds."""

    data_subcarriers: int = 108
    symbol_period: float = 4e-6
    header_duration: float = 28e-6
    ltf_duration: float = 4e-6
    ifs_duration: float = 16e-6
    ack_slot_duration: float = 44e-6
    service_tail_bits: int = 22
    # data rate above which the decoder runs on two cores
    two_core_threshold: float = 300e6

    def __post_init__(self):
        if self.data_subcarriers < 1 or self.service_tail_bits < 0:
            raise ValueError("invalid PHY numerology")
        for name in ("symbol_period", "header_duration", "ltf_duration",
                     "ifs_duration", "ack_slot_duration", "two_core_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_PHY = PhyConstants()


@dataclass(frozen=True)
class McsEntry:
    index: int
    n_ss: int
    bits_per_symbol: int
    code_rate: Fraction

    def __post_init__(self):
        if not 0 <= self.index < N_MCS:
            raise ValueError(f"MCS index out of range: {self.index}")
        q, r = _MODULATION_CODING[self.index % 8]
        if (self.n_ss, self.bits_per_symbol, self.code_rate) != (1 + self.index // 8, q, r):
            raise ValueError(f"inconsistent MCS entry {self}")

    @classmethod
    def from_index(cls, index: int) -> "McsEntry":
        if not 0 <= index < N_MCS:
            raise ValueError(f"MCS index out of range: {index}")
        q, r = _MODULATION_CODING[index % 8]
        return cls(index, 1 + index // 8, q, r)

    @property
    def spectral_bits(self) -> Fraction:
        """Information bits per stream per subcarrier use (Q x R)."""
        return self.bits_per_symbol * self.code_rate

    def n_dbps(self, phy: PhyConstants = DEFAULT_PHY) -> int:
        bits = phy.data_subcarriers * self.spectral_bits * self.n_ss
        if bits.denominator != 1:
            raise ValueError("data bits per OFDM symbol is not an integer")
        return int(bits)

    def __str__(self):
        return f"MCS{self.index}"


_TABLE = tuple(McsEntry.from_index(i) for i in range(N_MCS))


def mcs_table() -> tuple[McsEntry, ...]:
    return _TABLE


@dataclass(frozen=True)
class SystemMode:
    """One receiver configuration: MCS, active chains, detector, DVFS flag."""

    mcs: McsEntry
    n_rx: int
    detector: Detector
    dvfs: bool

    def __post_init__(self):
        if not 1 <= self.n_rx <= MAX_RX:
            raise ValueError(f"n_rx out of range: {self.n_rx}")
        if self.n_rx < self.mcs.n_ss:
            raise ValueError(f"{self.mcs} needs {self.mcs.n_ss} chains, got {self.n_rx}")
        if self.n_rx < MAX_RX and not self.dvfs:
            raise ValueError("modes with fewer than 4 chains always run with DVFS")
        object.__setattr__(self, "detector", Detector(self.detector))

    @property
    def label(self) -> str:
        return f"{self.mcs}/{self.n_rx}rx/{self.detector.value}/{'dvfs' if self.dvfs else 'nom'}"


@dataclass(frozen=True)
class FrameTiming:
    overhead_duration: float
    payload_duration: float
    symbol_period: float

    @property
    def total(self) -> float:
        return self.overhead_duration + self.payload_duration


def data_rate(mcs: McsEntry, phy: PhyConstants = DEFAULT_PHY) -> float:
    """PHY data rate in bit/s."""
    return mcs.n_dbps(phy) / phy.symbol_period


def decoder_cores(mcs: McsEntry, phy: PhyConstants = DEFAULT_PHY) -> int:
    return 1 if data_rate(mcs, phy) <= phy.two_core_threshold else 2


def coded_rate(mcs: McsEntry, cores: int | None = None, phy: PhyConstants = DEFAULT_PHY) -> float:
    """Coded bit rate each decoder core has to sustain, in bit/s.

    ``cores`` defaults to what the two-core rule prescribes; passing a value
    that contradicts the rule raises ``ValueError``.
    """
    required = decoder_cores(mcs, phy)
    if cores is None:
        cores = required
    elif cores != required:
        raise ValueError(f"{mcs} runs on {required} decoder core(s), not {cores}")
    return data_rate(mcs, phy) / float(mcs.code_rate) / cores


def _n_ltf(n_ss: int) -> int:
    return 4 if n_ss == 3 else n_ss


def frame_timing(mode: SystemMode, payload_bits: int, phy: PhyConstants = DEFAULT_PHY) -> FrameTiming:
    if payload_bits < 1:
        raise ValueError("payload must hold at least one bit")
    n_ss = mode.mcs.n_ss
    overhead = (phy.header_duration + phy.ltf_duration * _n_ltf(n_ss)
                + phy.ifs_duration + phy.ack_slot_duration)
    n_sym = math.ceil((payload_bits + phy.service_tail_bits) / mode.mcs.n_dbps(phy))
    return FrameTiming(overhead, n_sym * phy.symbol_period, phy.symbol_period)


def enumerate_modes(detectors: Iterable[Detector | str] = (Detector.MMSE, Detector.LRALD),
                    n_rx_max: int = MAX_RX) -> list[SystemMode]:
    """Extended mode set in a fixed order.

    Per detector (MMSE first): all MCSs at four chains without DVFS, then for
    each chain count from ``n_rx_max`` down to 1 the MCSs it can carry with
    DVFS enabled. Nominal-voltage variants exist only at four chains.
    """
    if not 1 <= n_rx_max <= MAX_RX:
        raise ValueError(f"n_rx_max out of range: {n_rx_max}")
    dets = {Detector(d) for d in detectors}
    if not dets:
        raise ValueError("at least one detector required")
    modes = []
    for det in (d for d in Detector if d in dets):
        for n_rx in range(n_rx_max, 0, -1):
            usable = [m for m in _TABLE if m.n_ss <= n_rx]
            if n_rx == MAX_RX:
                modes.extend(SystemMode(m, n_rx, det, False) for m in usable)
            modes.extend(SystemMode(m, n_rx, det, True) for m in usable)
    return modes


def baseline_modes() -> list[SystemMode]:
    """Reference receiver: four chains, nominal voltage, MMSE only."""
    return [m for m in enumerate_modes([Detector.MMSE]) if not m.dvfs]
