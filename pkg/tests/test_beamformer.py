import numpy as np
import pytest
from scipy import stats

import oracles
from anlab.beamformer import build_basis, effective_gains, householder_complement
from anlab.channel import RandomSource, correlate, sample_whitened
from anlab.correlation import build_exponential_correlation, from_explicit, from_spectrum
from anlab.errors import DegenerateChannelError
from anlab.montecarlo import sample_quadratic_form


def _check_invariants(b, T):
    h = b.h
    vn = b.null_basis
    assert np.abs(h @ vn).max() < 1e-10
    assert np.allclose(vn.conj().T @ vn, np.eye(vn.shape[1]), atol=1e-10)
    assert np.linalg.norm(b.v_info) == pytest.approx(1.0, abs=1e-12)
    assert np.abs(b.v_info.conj() @ vn).max() < 1e-10
    W = b.eigvecs
    assert np.allclose((W * b.theta) @ W.conj().T, b.projected, atol=1e-10)
    assert np.allclose(b.projected @ b.principal, b.theta[0] * b.principal, atol=1e-9)
    assert np.all(np.diff(b.theta) <= 1e-15)
    assert b.theta.sum() <= np.trace(T).real + 1e-9


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_invariants_random(link, n):
    corr, h, b = link(n)
    _check_invariants(b, corr.matrix)


def test_identity_correlation_gives_unit_theta():
    b = build_basis(np.array([2.0, 0, 0, 0]), from_spectrum(np.ones(4)))
    assert np.allclose(b.projected, np.eye(3))
    assert np.allclose(b.theta, 1.0)


def test_identity_correlation_random_h(rng):
    h = sample_whitened(rng, 6)
    b = build_basis(h, from_spectrum(np.ones(6)))
    assert np.allclose(b.theta, 1.0)


def test_two_antenna_closed_form():
    t = 0.4
    b = build_basis(np.array([1.0, 1.0]) / np.sqrt(2), from_explicit([[1, t], [t, 1]]))
    vn = b.null_basis[:, 0]
    assert abs(abs(vn.conj() @ np.array([1, -1]) / np.sqrt(2)) - 1) < 1e-12
    assert b.theta[0] == pytest.approx(1 - t)


def test_fig2_theta_against_dense_eigensolver(fig2):
    corr, h, b = fig2
    assert np.allclose(b.theta, oracles.projected_eigs(h, corr.matrix), atol=1e-12)


def test_principal_phase_fixed(link):
    _, _, b = link(5)
    w = b.principal
    k = np.argmax(np.abs(w))
    assert abs(w[k].imag) < 1e-14 and w[k].real > 0


def test_householder_complement_orthonormal(rng):
    v = sample_whitened(rng, 7)
    v /= np.linalg.norm(v)
    c = householder_complement(v)
    assert np.allclose(c.conj().T @ c, np.eye(6), atol=1e-12)
    assert np.abs(v.conj() @ c).max() < 1e-12


def test_degenerate_channels():
    corr = from_spectrum(np.ones(3))
    with pytest.raises(DegenerateChannelError):
        build_basis(np.zeros(3), corr)
    with pytest.raises(DegenerateChannelError):
        build_basis(np.ones(1), from_spectrum([1.0]))


def test_effective_gains_on_h_and_null_space(link):
    corr, h, b = link(4)
    a, vec = effective_gains(h / np.linalg.norm(h), b)
    # the row h/||h|| times v_I = h^H/||h|| is ||h||^2/||h||^2 after conjugation
    assert abs(a - 1.0) < 1e-12
    assert np.abs(vec).max() < 1e-12
    g = b.null_basis[:, 0].conj()
    a2, _ = effective_gains(g, b)
    assert abs(a2) < 1e-12


def test_principal_gain_mean_is_theta1(link):
    corr, h, b = link(5)
    n = 400_000
    g = correlate(sample_whitened(RandomSource(11, 0), 5, n), corr)
    _, vec = effective_gains(g, b)
    x = np.abs(vec @ b.principal) ** 2
    assert abs(x.mean() - b.theta[0]) < 3 * x.std() / np.sqrt(n)


def test_null_space_coordinates_have_covariance_Q(link):
    corr, h, b = link(4)
    n = 200_000
    g = correlate(sample_whitened(RandomSource(12, 0), 4, n), corr)
    y = g @ b.null_basis  # rows of (V_N^H g^H)^H
    prod = y[:, :, None].conj() * y[:, None, :]
    emp, se = prod.mean(axis=0), prod.std(axis=0) / np.sqrt(n)
    # E[conj(y_i) y_j] = (V_N^H T V_N)_{ij}
    assert np.all(np.abs(emp - b.projected) < 4 * np.abs(se) + 1e-12)


def test_basis_choice_invariance(link, rng):
    from scipy.stats import unitary_group
    from anlab.allocation import cpa
    from anlab.beamformer import BeamformingBasis

    corr, h, b = link(4)
    u = unitary_group.rvs(3, random_state=rng)
    vn2 = b.null_basis @ u
    q2 = vn2.conj().T @ corr.matrix @ vn2
    th2, w2 = np.linalg.eigh(0.5 * (q2 + q2.conj().T))
    assert np.allclose(np.sort(th2)[::-1], b.theta, atol=1e-9)
    b2 = BeamformingBasis(b.h, corr, b.v_info, vn2, q2, w2[:, ::-1], th2[::-1])
    om1, om2 = cpa(b).omega(b), cpa(b2).omega(b2)
    x1 = sample_quadratic_form(b, om1, RandomSource(13, 0), 100_000)
    x2 = sample_quadratic_form(b2, om2, RandomSource(13, 1), 100_000)
    assert stats.ks_2samp(x1, x2).pvalue > 0.01


def test_tied_eigenvalues_do_not_change_results():
    # with T = I every theta ties; CPA mean interference is N_t - 1 whatever vector is picked
    from anlab.allocation import cpa, mean_interference
    b = build_basis(np.array([1.0, 0.5, 0.25]), from_spectrum(np.ones(3)))
    assert mean_interference(cpa(b), b) == pytest.approx(2.0)


def test_subnormal_leading_entry():
    corr = build_exponential_correlation(3, 0.5, 0.5)
    b = build_basis(np.array([5e-324 + 5e-324j, 1.0, 0.5j]), corr)
    assert np.all(np.isfinite(b.null_basis))
    assert np.allclose(b.h @ b.null_basis, 0.0, atol=1e-14)
