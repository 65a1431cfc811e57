"""Rayleigh block-fading MIMO channel draws.

Every draw owns a generator seeded from ``(seed, trial)`` so trials can be
evaluated in any order. The SNR does not enter the seed: one trial index
yields the same matrices across an SNR sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_ANT = 4
SUBCARRIER_SPACING = 312.5e3
TAP_SPACING_NS = 10.0
# exponential profile truncated once taps are this many rms delays late
PDP_SPAN = 7.0

_PILOTS = {11, 25, 53}
DATA_SUBCARRIERS = np.array(
    [k for k in range(-58, 59) if abs(k) >= 2 and abs(k) not in _PILOTS], dtype=float
)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray  # (n_subcarriers, 4, 4) complex
    noise_variance: float

    def __post_init__(self):
        if self.h.ndim != 3 or self.h.shape[1:] != (N_ANT, N_ANT):
            raise ValueError(f"channel must be (K, {N_ANT}, {N_ANT}), got {self.h.shape}")
        if not np.all(np.isfinite(self.h)):
            raise ValueError("non-finite channel coefficient")
        if not self.noise_variance > 0:
            raise ValueError("noise variance must be positive")

    @property
    def n_subcarriers(self) -> int:
        return self.h.shape[0]

    @property
    def snr_db(self) -> float:
        return -10.0 * np.log10(self.noise_variance)

    def with_snr(self, snr_db: float) -> "ChannelRealization":
        return ChannelRealization(self.h, noise_variance(snr_db))


def noise_variance(snr_db: float) -> float:
    if not np.isfinite(snr_db):
        raise ValueError(f"SNR must be finite, got {snr_db}")
    return float(10.0 ** (-snr_db / 10.0))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_flat(seed: int, trial: int, snr_db: float) -> ChannelRealization:
    """One i.i.d. CN(0, 1) 4x4 matrix shared by all subcarriers."""
    nv = noise_variance(snr_db)
    h = _cn(trial_rng(seed, trial), (1, N_ANT, N_ANT))
    return ChannelRealization(h, nv)


def exponential_pdp(rms_delay_ns: float) -> tuple[np.ndarray, np.ndarray]:
    """Tap delays (s) and unit-sum tap powers of a truncated exponential profile."""
    if not rms_delay_ns > 0:
        raise ValueError("rms delay must be positive")
    n_taps = int(np.floor(PDP_SPAN * rms_delay_ns / TAP_SPACING_NS)) + 1
    delays_ns = TAP_SPACING_NS * np.arange(n_taps)
    powers = np.exp(-delays_ns / rms_delay_ns)
    return delays_ns * 1e-9, powers / powers.sum()


def frequency_response(taps: np.ndarray, delays: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Evaluate tapped-delay-line gains ``taps[l, ...]`` at ``freqs``.

    Returns an array of shape ``(len(freqs),) + taps.shape[1:]``.
    """
    phase = np.exp(-2j * np.pi * np.outer(freqs, delays))
    return np.tensordot(phase, taps, axes=(1, 0))


def draw_selective(seed: int, trial: int, snr_db: float, rms_delay_ns: float = 30.0) -> ChannelRealization:
    """Exponential-PDP channel with independent taps per antenna pair."""
    nv = noise_variance(snr_db)
    delays, powers = exponential_pdp(rms_delay_ns)
    taps = _cn(trial_rng(seed, trial), (len(powers), N_ANT, N_ANT))
    taps *= np.sqrt(powers)[:, None, None]
    h = frequency_response(taps, delays, DATA_SUBCARRIERS * SUBCARRIER_SPACING)
    return ChannelRealization(h, nv)
