"""Post-detection SINR and the genie packet-error verdict.

Success is decided by a mutual-information threshold: a mode delivers its
frame iff the mean per-stream information rate, each stream capped at the
constellation size Q and penalized by an SNR gap, reaches Q*R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from eelink.channel import ChannelRealization
from eelink.mode_space import Detector, McsEntry, SystemMode, mcs_table

LLL_DELTA = 0.75
_RANK_TOL = 1e-10


class RankDeficientError(ValueError):
    """Raised when a basis handed to LLL has dependent columns."""


@dataclass(frozen=True)
class SnrGaps:
    mmse: float = 2.0
    lrald: float = 1.6

    def __post_init__(self):
        if not (self.mmse > 0 and self.lrald > 0):
            raise ValueError("SNR gaps must be positive")

    def of(self, detector: Detector) -> float:
        return self.mmse if Detector(detector) is Detector.MMSE else self.lrald


DEFAULT_GAPS = SnrGaps()


@dataclass(frozen=True)
class DetectionReport:
    per_subcarrier_sinr: np.ndarray  # (n_subcarriers, n_ss), linear
    mutual_info_bits: float
    feasible: bool


def mmse_sinr(h: np.ndarray, noise_var: float, es: float | None = None) -> np.ndarray:
    """Per-stream linear MMSE SINR.

    ``h`` is ``(n_rx, n_ss)`` or a stack ``(K, n_rx, n_ss)``; ``es`` is the
    per-stream transmit power and defaults to ``1/n_ss``.
    """
    h = np.asarray(h, dtype=complex)
    n_rx, n_ss = h.shape[-2:]
    if n_rx < n_ss:
        raise ValueError("fewer receive chains than streams")
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    if es is None:
        es = 1.0 / n_ss
    if n_ss == 1:
        # single stream: MMSE collapses to maximum-ratio combining
        gain = np.sum(h.real**2 + h.imag**2, axis=-2)
        return es * gain / noise_var
    gram = np.swapaxes(h.conj(), -1, -2) @ h
    a = (es / noise_var) * gram + np.eye(n_ss)
    mse = np.real(np.diagonal(np.linalg.inv(a), axis1=-2, axis2=-1))
    return np.maximum(1.0 / mse - 1.0, 0.0)


@njit(cache=True)
def _cround(z):
    return complex(np.floor(z.real + 0.5), np.floor(z.imag + 0.5))


@njit(cache=True)
def _clll_core(b, delta):
    """Complex LLL on the columns of ``b``; returns the unimodular transform."""
    n = b.shape[1]
    _, r = np.linalg.qr(b)
    r = r.copy()
    t = np.eye(n, dtype=np.complex128)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            mu = _cround(r[j, k] / r[j, j])
            if mu != 0:
                for i in range(j + 1):
                    r[i, k] -= mu * r[i, j]
                for i in range(n):
                    t[i, k] -= mu * t[i, j]
        lhs = delta * abs(r[k - 1, k - 1]) ** 2
        rhs = abs(r[k, k]) ** 2 + abs(r[k - 1, k]) ** 2
        if lhs > rhs:
            for i in range(n):
                tmp = r[i, k - 1]
                r[i, k - 1] = r[i, k]
                r[i, k] = tmp
                tmp = t[i, k - 1]
                t[i, k - 1] = t[i, k]
                t[i, k] = tmp
            a = r[k - 1, k - 1]
            c = r[k, k - 1]
            nrm = np.sqrt(abs(a) ** 2 + abs(c) ** 2)
            g00 = np.conj(a) / nrm
            g01 = np.conj(c) / nrm
            g10 = -c / nrm
            g11 = a / nrm
            for col in range(k - 1, n):
                x = r[k - 1, col]
                y = r[k, col]
                r[k - 1, col] = g00 * x + g01 * y
                r[k, col] = g10 * x + g11 * y
            r[k, k - 1] = 0.0
            k = max(k - 1, 1)
        else:
            k += 1
    return t


def _check_rank(m: np.ndarray) -> None:
    if m.shape[0] < m.shape[1]:
        raise RankDeficientError("more basis vectors than dimensions")
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= _RANK_TOL * max(s[0], 1e-300):
        raise RankDeficientError("basis columns are linearly dependent")


def lll_reduce(m: np.ndarray, delta: float = LLL_DELTA) -> tuple[np.ndarray, np.ndarray]:
    """Complex LLL reduction of the column basis ``m``.

    Returns ``(m @ t, t)`` with ``t`` a Gaussian-integer matrix of unit
    determinant magnitude.
    """
    m = np.ascontiguousarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    if not 0.25 < delta <= 1.0:
        raise ValueError("delta must lie in (1/4, 1]")
    _check_rank(m)
    t = _clll_core(m, delta)
    return m @ t, t


@njit(cache=True)
def _lrald_sinr_stack(h, noise_var, es, delta):
    k_sub, n_rx, n_ss = h.shape
    out = np.empty((k_sub, n_ss))
    ext = np.zeros((n_rx + n_ss, n_ss), dtype=np.complex128)
    sigma = np.sqrt(noise_var)
    amp = np.sqrt(es)
    for i in range(n_ss):
        ext[n_rx + i, i] = sigma
    for k in range(k_sub):
        for i in range(n_rx):
            for j in range(n_ss):
                ext[i, j] = amp * h[k, i, j]
        t = _clll_core(ext, delta)
        red = ext @ t
        inv = np.linalg.inv(np.conj(red.T) @ red)
        for i in range(n_ss):
            mse = noise_var * inv[i, i].real
            out[k, i] = max(1.0 / mse - 1.0, 0.0)
    return out


def lrald_sinr(h: np.ndarray, noise_var: float, es: float | None = None) -> np.ndarray:
    """SINR of MMSE detection carried out in an LLL-reduced basis.

    The MMSE-extended channel ``[sqrt(es) H; sigma I]`` is reduced and the
    error variance of each reduced-domain coordinate is read off the inverse
    Gram matrix of the reduced basis. Same shapes as :func:`mmse_sinr`.
    """
    h = np.asarray(h, dtype=np.complex128)
    single = h.ndim == 2
    stack = np.ascontiguousarray(h[None] if single else h)
    n_rx, n_ss = stack.shape[-2:]
    if n_rx < n_ss:
        raise ValueError("fewer receive chains than streams")
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    if es is None:
        es = 1.0 / n_ss
    out = _lrald_sinr_stack(stack, float(noise_var), float(es), LLL_DELTA)
    return out[0] if single else out


def stream_sinr(ch: ChannelRealization, n_rx: int, n_ss: int, detector: Detector) -> np.ndarray:
    """SINRs ``(n_subcarriers, n_ss)`` using the first ``n_rx`` antennas and ``n_ss`` transmit streams."""
    if not 1 <= n_ss <= n_rx <= ch.h.shape[1]:
        raise ValueError(f"invalid antenna configuration {n_rx}x{n_ss}")
    sub = ch.h[:, :n_rx, :n_ss]
    if Detector(detector) is Detector.MMSE:
        return mmse_sinr(sub, ch.noise_variance)
    return lrald_sinr(sub, ch.noise_variance)


def mean_mutual_info(sinr: np.ndarray, q: int, gap: float) -> float:
    return float(np.mean(np.minimum(q, np.log2(1.0 + sinr / gap))))


def packet_error_oracle(mode: SystemMode, ch: ChannelRealization,
                        gaps: SnrGaps = DEFAULT_GAPS) -> DetectionReport:
    mcs = mode.mcs
    sinr = stream_sinr(ch, mode.n_rx, mcs.n_ss, mode.detector)
    mi = mean_mutual_info(sinr, mcs.bits_per_symbol, gaps.of(mode.detector))
    return DetectionReport(sinr, mi, mi >= float(mcs.spectral_bits))


def feasibility(ch: ChannelRealization, modes: list[SystemMode],
                gaps: SnrGaps = DEFAULT_GAPS) -> np.ndarray:
    """Boolean success verdict for every mode, sharing work between modes.

    SINRs are computed once per (chains, streams, detector) and the
    information rate once per constellation size.
    """
    mi_cache: dict[tuple, float] = {}
    sinr_cache: dict[tuple, np.ndarray] = {}
    out = np.empty(len(modes), dtype=bool)
    for i, mode in enumerate(modes):
        mcs = mode.mcs
        geo = (mode.n_rx, mcs.n_ss, mode.detector)
        key = geo + (mcs.bits_per_symbol,)
        if key not in mi_cache:
            if geo not in sinr_cache:
                sinr_cache[geo] = stream_sinr(ch, *geo)
            mi_cache[key] = mean_mutual_info(sinr_cache[geo], mcs.bits_per_symbol,
                                             gaps.of(mode.detector))
        out[i] = mi_cache[key] >= float(mcs.spectral_bits)
    return out


def feasible_mcs(ch: ChannelRealization, n_rx: int, detector: Detector,
                 gaps: SnrGaps = DEFAULT_GAPS) -> list[McsEntry]:
    modes = [SystemMode(m, n_rx, detector, n_rx < 4) for m in mcs_table() if m.n_ss <= n_rx]
    return [m.mcs for m, ok in zip(modes, feasibility(ch, modes, gaps)) if ok]
