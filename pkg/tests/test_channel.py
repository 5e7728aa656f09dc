import numpy as np
import pytest
from scipy import stats
from scipy.stats import unitary_group

from anlab.acceptance import FIG2_HS
from anlab.channel import RandomSource, correlate, draw_main_channel, fixed_main_channel, sample_whitened
from anlab.correlation import build_exponential_correlation, from_spectrum
from anlab.errors import DomainError, ValidationError


def test_whitened_moments():
    x = sample_whitened(RandomSource(1, 0), 2, 500_000).reshape(-1)
    n = x.size
    assert abs(x.real.mean()) < 3 * np.sqrt(0.5 / n)
    assert abs(x.imag.mean()) < 3 * np.sqrt(0.5 / n)
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(x.real) == pytest.approx(0.5, abs=0.005)
    assert abs(np.corrcoef(x.real, x.imag)[0, 1]) < 0.01


def test_same_source_same_draws():
    a = sample_whitened(RandomSource(9, (1, 2)), 4, 10)
    b = sample_whitened(RandomSource(9, (1, 2)), 4, 10)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = sample_whitened(RandomSource(9, 1), 4, 10)
    b = sample_whitened(RandomSource(9, 2), 4, 10)
    assert not np.array_equal(a, b)
    assert RandomSource(9, 1).child(3).key == (1, 3)


def test_correlate_identity_is_noop(rng):
    v = sample_whitened(rng, 5)
    assert np.allclose(correlate(v, from_spectrum(np.ones(5))), v)


def test_correlate_all_ones_gain():
    h = correlate(np.ones(4, dtype=complex), from_spectrum([2.8, 0.7, 0.3, 0.2]))
    assert np.vdot(h, h).real == pytest.approx(4.0)


def test_fig2_gain_by_hand():
    lam = np.array([2.8, 0.7, 0.3, 0.2])
    hs = np.array(FIG2_HS)
    h = fixed_main_channel(hs, from_spectrum(lam)).h
    assert np.vdot(h, h).real == pytest.approx(float(np.sum(lam * np.abs(hs) ** 2)), rel=1e-13)


def test_gain_identity_general_unitary(rng):
    lam = np.array([2.0, 1.0, 0.6, 0.4])
    u = unitary_group.rvs(4, random_state=rng)
    corr = from_spectrum(lam, u)
    hs = sample_whitened(rng, 4)
    h = correlate(hs, corr)
    assert np.vdot(h, h).real == pytest.approx(float(np.real(hs @ np.diag(lam) @ hs.conj())), rel=1e-12)


def test_correlate_dimension_mismatch():
    with pytest.raises(ValidationError):
        correlate(np.ones(3), from_spectrum(np.ones(4)))


def test_fixed_main_channel_basic():
    e1 = np.array([1, 0, 0], dtype=complex)
    r = fixed_main_channel(e1, from_spectrum(np.ones(3)))
    assert np.allclose(r.h, e1) and r.g is None
    r2 = fixed_main_channel(e1, from_spectrum(np.ones(3)))
    assert np.array_equal(r.h, r2.h)


def test_fixed_main_channel_rejects_nan():
    with pytest.raises(DomainError):
        fixed_main_channel([1, np.nan], from_spectrum(np.ones(2)))


def test_empirical_covariance_matches_T():
    corr = build_exponential_correlation(4, 0.5, 0.6)
    n = 200_000
    g = correlate(sample_whitened(RandomSource(3, 0), 4, n), corr)
    # E[conj(g_i) g_j] = t_ij for rows g = g_s T^{1/2}
    prod = g[:, :, None].conj() * g[:, None, :]
    se = prod.std(axis=0) / np.sqrt(n)
    emp = prod.mean(axis=0)
    assert np.all(np.abs(emp - corr.matrix) < 4 * np.abs(se) + 1e-12)
    assert np.allclose(np.diag(emp).real, 1.0, atol=4 * np.max(np.abs(se)))


def test_eigenvectors_do_not_matter(rng):
    # for fixed Lambda the laws of Bob's and Eve's SINRs ignore U_T
    from anlab.analytics import SecrecyScenario
    from anlab.beamformer import build_basis
    from anlab.allocation import cpa
    from anlab.montecarlo import sinr_eve

    lam = np.array([2.2, 1.0, 0.5, 0.3])
    u = unitary_group.rvs(4, random_state=rng)
    n = 20_000
    out = []
    for U in (np.eye(4), u):
        corr = from_spectrum(lam, U)
        src = RandomSource(77, 0)
        hs = sample_whitened(src.generator(0), 4, n)
        gs = sample_whitened(src.generator(1), 4, n)
        gb, ge = [], []
        for i in range(0, n, 10):
            h = correlate(hs[i], corr)
            b = build_basis(h, corr)
            sc = SecrecyScenario(corr, 1.0, 3.0, 3.0, h=h, alpha=0.6)
            gb.append(sc.alpha * sc.mu_b * sc.main_gain)
            ge.append(sinr_eve(correlate(gs[i], corr), b, cpa(b), sc))
        out.append((np.array(gb), np.array(ge)))
    assert stats.ks_2samp(out[0][0], out[1][0], method="asymp").pvalue > 0.01
    assert stats.ks_2samp(out[0][1], out[1][1], method="asymp").pvalue > 0.01


def test_draw_main_channel_reproducible():
    corr = build_exponential_correlation(3, 0.5, 0.3)
    a = draw_main_channel(RandomSource(5, (2, 0)), corr)
    b = draw_main_channel(RandomSource(5, (2, 0)), corr)
    assert np.array_equal(a.h, b.h)
