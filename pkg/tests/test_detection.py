import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eelink.channel import ChannelRealization, draw_flat
from eelink.detection import (
    LLL_DELTA,
    RankDeficientError,
    SnrGaps,
    feasibility,
    lll_reduce,
    lrald_sinr,
    mmse_sinr,
    packet_error_oracle,
    stream_sinr,
)
from eelink.mode_space import Detector, SystemMode, enumerate_modes, mcs_table

MCS = mcs_table()


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def filter_sinr(h, nv, es):
    """SINR of the explicit MMSE filter output, interference counted term by term."""
    n_rx, n_ss = h.shape
    w = np.linalg.solve(es * h @ h.conj().T + nv * np.eye(n_rx), np.sqrt(es) * h)
    out = []
    for i in range(n_ss):
        wi = w[:, i]
        sig = es * abs(wi.conj() @ h[:, i]) ** 2
        intf = sum(es * abs(wi.conj() @ h[:, j]) ** 2 for j in range(n_ss) if j != i)
        out.append(sig / (intf + nv * np.vdot(wi, wi).real))
    return np.array(out)


# -- MMSE ------------------------------------------------------------------------


def test_scalar_channel():
    assert mmse_sinr(np.array([[1.0 + 0j]]), 0.1)[0] == 10.0
    h = np.array([[0.3 - 1.1j]])
    assert mmse_sinr(h, 0.07, es=0.5)[0] == (h[0, 0] * h[0, 0].conjugate()).real * 0.5 / 0.07


def test_identity_two_streams():
    np.testing.assert_allclose(mmse_sinr(np.eye(2, dtype=complex), 0.5), [1.0, 1.0], rtol=1e-12)


def test_noise_dominated_limit():
    h = crandn(np.random.default_rng(1), 4, 3)
    assert np.all(mmse_sinr(h, 1e12) < 1e-10)


def test_orthogonal_streams_reduce_to_matched_filter():
    q, _ = np.linalg.qr(crandn(np.random.default_rng(2), 4, 4))
    h = q[:, :3] * np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(mmse_sinr(h, 0.2), (1 / 3) * np.array([0.25, 1.0, 4.0]) / 0.2, rtol=1e-10)


@pytest.mark.parametrize("n_rx,n_ss", [(1, 1), (2, 2), (3, 2), (4, 3), (4, 4)])
def test_mmse_matches_filter_oracle(n_rx, n_ss):
    rng = np.random.default_rng(n_rx * 10 + n_ss)
    for _ in range(20):
        h = crandn(rng, n_rx, n_ss)
        nv = 10 ** rng.uniform(-3, 0.5)
        np.testing.assert_allclose(mmse_sinr(h, nv), filter_sinr(h, nv, 1 / n_ss), rtol=1e-8)


def test_batched_matches_single():
    h = crandn(np.random.default_rng(3), 6, 4, 2)
    batch = mmse_sinr(h, 0.05)
    for k in range(6):
        np.testing.assert_allclose(batch[k], mmse_sinr(h[k], 0.05))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.floats(1e-3, 10.0))
def test_extra_chain_never_hurts(seed, n_ss, nv):
    h = crandn(np.random.default_rng(seed), 4, n_ss)
    for n_rx in range(n_ss, 4):
        lo, hi = mmse_sinr(h[:n_rx], nv), mmse_sinr(h[: n_rx + 1], nv)
        assert np.all(hi >= lo * (1 - 1e-9))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_sinr_monotone_in_snr(seed, n_ss):
    h = crandn(np.random.default_rng(seed), 4, n_ss)
    sinrs = [mmse_sinr(h, 10 ** (-s / 10)) for s in range(-5, 40, 3)]
    for a, b in zip(sinrs, sinrs[1:]):
        assert np.all(b >= a * (1 - 1e-9))


def test_mmse_rejects_bad_shapes():
    with pytest.raises(ValueError):
        mmse_sinr(np.ones((1, 2), complex), 1.0)
    with pytest.raises(ValueError):
        mmse_sinr(np.ones((2, 2), complex), 0.0)


# -- LLL -------------------------------------------------------------------------


def lll_conditions(b, delta=LLL_DELTA, tol=1e-9):
    _, r = np.linalg.qr(b)
    n = b.shape[1]
    for k in range(n):
        for j in range(k):
            mu = r[j, k] / r[j, j]
            if abs(mu.real) > 0.5 + tol or abs(mu.imag) > 0.5 + tol:
                return False
    for k in range(1, n):
        if delta * abs(r[k - 1, k - 1]) ** 2 > abs(r[k, k]) ** 2 + abs(r[k - 1, k]) ** 2 + tol:
            return False
    return True


def orthogonality_defect(b):
    return np.prod(np.linalg.norm(b, axis=0)) / np.sqrt(abs(np.linalg.det(b.conj().T @ b)))


def test_lll_keeps_orthogonal_basis():
    b = np.diag([1.0, 1.5, 2.0]).astype(complex)
    red, t = lll_reduce(b)
    np.testing.assert_array_equal(t, np.eye(3))
    np.testing.assert_array_equal(red, b)


def test_lll_improves_near_parallel_basis():
    b = np.array([[1.0, 0.99], [0.0, 0.01]], dtype=complex)
    red, t = lll_reduce(b)
    assert orthogonality_defect(red) < orthogonality_defect(b)
    np.testing.assert_allclose(red, b @ t, atol=1e-12)


def test_lll_random_contract():
    rng = np.random.default_rng(42)
    for _ in range(100):
        m = crandn(rng, 4, 4)
        red, t = lll_reduce(m)
        np.testing.assert_allclose(red, m @ t, atol=1e-10)
        np.testing.assert_array_equal(t, np.round(t.real) + 1j * np.round(t.imag))
        assert abs(np.linalg.det(t)) == pytest.approx(1.0, abs=1e-9)
        assert lll_conditions(red)


def test_lll_tall_extended_matrices():
    rng = np.random.default_rng(5)
    for _ in range(50):
        h = crandn(rng, 3, 3)
        ext = np.vstack([h / np.sqrt(3), 0.1 * np.eye(3)])
        red, t = lll_reduce(ext)
        np.testing.assert_allclose(red, ext @ t, atol=1e-10)
        assert lll_conditions(red)


def test_lll_rank_deficient():
    b = np.array([[1, 2], [2, 4], [0, 0]], dtype=complex)
    with pytest.raises(RankDeficientError):
        lll_reduce(b)
    with pytest.raises(RankDeficientError):
        lll_reduce(np.ones((2, 3), complex))


# -- LRALD -----------------------------------------------------------------------


def test_lrald_equals_mmse_for_orthogonal_channel():
    q, _ = np.linalg.qr(crandn(np.random.default_rng(8), 4, 4))
    h = q[:, :3] * np.array([0.4, 1.0, 1.7])
    for nv in (0.01, 0.3, 2.0):
        np.testing.assert_allclose(np.sort(lrald_sinr(h, nv)), np.sort(mmse_sinr(h, nv)), rtol=1e-9)


def test_lrald_helps_ill_conditioned_channel():
    h = np.array([[1.0, 0.98], [1.0, 1.02]], dtype=complex)
    nv = 1e-3
    assert lrald_sinr(h, nv).sum() > mmse_sinr(h, nv).sum()


def test_lrald_nonnegative_and_batched():
    h = crandn(np.random.default_rng(9), 5, 4, 4)
    s = lrald_sinr(h, 0.1)
    assert s.shape == (5, 4) and np.all(s >= 0)
    np.testing.assert_allclose(s[2], lrald_sinr(h[2], 0.1))


# -- oracle ------------------------------------------------------------------------


def mode(idx, n_rx=4, det=Detector.MMSE):
    return SystemMode(MCS[idx], n_rx, det, n_rx < 4)


def test_noiseless_limit_all_feasible():
    q, _ = np.linalg.qr(crandn(np.random.default_rng(0), 4, 4))
    ch = ChannelRealization(q[None] * 2.0, 1e-9)
    for m in enumerate_modes():
        assert packet_error_oracle(m, ch).feasible


def test_noise_limit_nothing_feasible():
    ch = draw_flat(0, 0, -60.0)
    assert not feasibility(ch, enumerate_modes()).any()


def straight_line_feasible(h4, nv, mcs, n_rx, gap):
    """Independent MI threshold check from the explicit filter SINRs."""
    h = h4[:n_rx, : mcs.n_ss]
    sinr = filter_sinr(h, nv, 1.0 / mcs.n_ss)
    q = mcs.bits_per_symbol
    mi = sum(min(q, np.log2(1 + s / gap)) for s in sinr) / len(sinr)
    return mi >= q * float(mcs.code_rate)


def test_feasibility_matches_brute_force_at_15db():
    ch = draw_flat(2024, 0, 15.0)
    for n_rx, mcss in ((4, range(32)), (2, range(16))):
        for i in mcss:
            got = packet_error_oracle(mode(i, n_rx), ch).feasible
            assert got == straight_line_feasible(ch.h[0], ch.noise_variance, MCS[i], n_rx, 2.0), (n_rx, i)


def test_report_invariants():
    ch = draw_flat(1, 1, 12.0)
    for i in (0, 5, 13, 27):
        rep = packet_error_oracle(mode(i), ch)
        q = MCS[i].bits_per_symbol
        assert 0 <= rep.mutual_info_bits <= q
        assert np.all(rep.per_subcarrier_sinr >= 0)
        assert rep.feasible == (rep.mutual_info_bits >= q * float(MCS[i].code_rate))


def test_shared_table_matches_per_mode_oracle():
    modes = enumerate_modes()
    for t in range(5):
        ch = draw_flat(9, t, 5.0 * t)
        table = feasibility(ch, modes)
        assert list(table) == [packet_error_oracle(m, ch).feasible for m in modes]


def test_feasibility_monotone_in_snr():
    modes = [m for m in enumerate_modes() if m.detector is Detector.MMSE]
    for t in range(40):
        prev = None
        for snr in range(-5, 41, 2):
            ok = feasibility(draw_flat(77, t, float(snr)), modes)
            if prev is not None:
                assert not np.any(prev & ~ok)
            prev = ok


def test_threshold_nesting_where_provable():
    # Lower Q*R with a code rate no higher than the feasible MCS always succeeds
    # under the mean-MI rule; see test_nesting_counterexample for the other case.
    modes = enumerate_modes()
    for t in range(60):
        ch = draw_flat(31, t, 3.0 + (t % 10) * 3)
        ok = dict(zip(modes, feasibility(ch, modes)))
        for a, fa in ok.items():
            if not fa:
                continue
            for b in modes:
                if (b.n_rx, b.detector, b.dvfs, b.mcs.n_ss) == (a.n_rx, a.detector, a.dvfs, a.mcs.n_ss) \
                        and b.mcs.spectral_bits < a.mcs.spectral_bits and b.mcs.code_rate <= a.mcs.code_rate:
                    assert ok[b]


def test_nesting_counterexample():
    # Two streams, one strong and one dead: 16-QAM 1/2 averages to 2 bits, QPSK 3/4 to 1.
    h = np.zeros((1, 4, 4), complex)
    h[0, 0, 0] = 1.0
    h[0, 1, 1] = 1e-9
    ch = ChannelRealization(h, 1e-3)
    sinr = stream_sinr(ch, 2, 2, Detector.MMSE)[0]
    assert np.log2(1 + sinr[0] / 2.0) >= 4
    assert packet_error_oracle(mode(11, 2), ch).feasible  # 16-QAM 1/2
    assert not packet_error_oracle(mode(10, 2), ch).feasible  # QPSK 3/4


def test_antenna_selection_uses_leading_rows():
    ch = draw_flat(4, 2, 10.0)
    np.testing.assert_allclose(stream_sinr(ch, 2, 2, Detector.MMSE)[0], mmse_sinr(ch.h[0, :2, :2], ch.noise_variance))
    with pytest.raises(ValueError):
        stream_sinr(ch, 1, 2, Detector.MMSE)


def test_gaps_per_detector():
    g = SnrGaps(2.5, 1.2)
    assert g.of(Detector.MMSE) == 2.5 and g.of("LRALD") == 1.2
    with pytest.raises(ValueError):
        SnrGaps(0.0, 1.0)
