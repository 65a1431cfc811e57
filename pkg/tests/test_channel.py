import numpy as np
import pytest

from eelink.channel import (
    DATA_SUBCARRIERS,
    SUBCARRIER_SPACING,
    ChannelRealization,
    draw_flat,
    draw_selective,
    exponential_pdp,
    frequency_response,
)


def test_flat_is_deterministic():
    a, b = draw_flat(7, 3, 10.0), draw_flat(7, 3, 10.0)
    assert a.h.tobytes() == b.h.tobytes()
    assert a.n_subcarriers == 1
    assert not np.array_equal(a.h, draw_flat(7, 4, 10.0).h)
    assert not np.array_equal(a.h, draw_flat(8, 3, 10.0).h)


def test_snr_does_not_change_the_matrix():
    assert np.array_equal(draw_flat(1, 0, 0.0).h, draw_flat(1, 0, 30.0).h)


def test_noise_variance_definition():
    ch = draw_flat(0, 0, 20.0)
    assert ch.noise_variance == pytest.approx(0.01, rel=1e-14)
    assert ch.snr_db == pytest.approx(20.0)
    with pytest.raises(ValueError):
        draw_flat(0, 0, float("nan"))


def test_flat_entries_unit_power():
    power = np.mean([np.mean(np.abs(draw_flat(11, t, 0.0).h) ** 2) for t in range(100_000)])
    assert power == pytest.approx(1.0, abs=0.02)


def test_trials_are_uncorrelated():
    x = np.array([draw_flat(5, t, 0.0).h[0, 0, 0] for t in range(20000)])
    rho = np.abs(np.mean(x[1:] * np.conj(x[:-1])))
    assert rho < 0.03


def test_selective_shape_and_determinism():
    a = draw_selective(3, 9, 15.0, 30.0)
    assert a.h.shape == (108, 4, 4)
    assert len(DATA_SUBCARRIERS) == 108
    assert np.array_equal(a.h, draw_selective(3, 9, 15.0, 30.0).h)


def test_single_tap_limit_is_flat():
    h = draw_selective(2, 1, 10.0, 1e-3).h
    assert np.allclose(h, h[0][None])


def test_selective_unit_power():
    p = np.mean([np.mean(np.abs(draw_selective(4, t, 0.0, 30.0).h) ** 2) for t in range(400)])
    assert p == pytest.approx(1.0, abs=0.05)


def test_pdp_normalized():
    delays, powers = exponential_pdp(30.0)
    assert powers.sum() == pytest.approx(1.0)
    assert np.all(np.diff(powers) < 0)
    assert delays[1] == pytest.approx(10e-9)
    with pytest.raises(ValueError):
        exponential_pdp(0.0)


def test_frequency_response_matches_direct_dft():
    rng = np.random.default_rng(0)
    taps = rng.standard_normal((5, 2, 3)) + 1j * rng.standard_normal((5, 2, 3))
    delays = 10e-9 * np.arange(5)
    freqs = DATA_SUBCARRIERS[:7] * SUBCARRIER_SPACING
    got = frequency_response(taps, delays, freqs)
    for k, f in enumerate(freqs):
        want = sum(taps[l] * np.exp(-2j * np.pi * f * delays[l]) for l in range(5))
        np.testing.assert_allclose(got[k], want, rtol=1e-12, atol=1e-12)


def _adjacent_correlation(rms, n=300):
    num = den = 0.0
    for t in range(n):
        h = draw_selective(8, t, 0.0, rms).h[:, 0, 0]
        # pairs of physically adjacent data subcarriers
        adj = np.flatnonzero(np.diff(DATA_SUBCARRIERS) == 1)
        num += np.sum(h[adj + 1] * np.conj(h[adj]))
        den += np.sum(np.abs(h) ** 2) * len(adj) / len(h)
    return abs(num) / den


def test_coherence_shrinks_with_delay_spread():
    c = [_adjacent_correlation(r) for r in (5.0, 30.0, 150.0)]
    assert c[0] > c[1] > c[2]


def test_realization_validation():
    with pytest.raises(ValueError):
        ChannelRealization(np.zeros((1, 4, 4), complex), 0.0)
    with pytest.raises(ValueError):
        ChannelRealization(np.full((1, 4, 4), np.nan + 0j), 1.0)
    with pytest.raises(ValueError):
        ChannelRealization(np.zeros((4, 4), complex), 1.0)
