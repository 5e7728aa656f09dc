"""Reference values computed independently of the package internals.

Everything here is brute force: numerical quadrature of defining
integrals, dense eigensolvers on explicitly formed matrices, and a
conditional-Gaussian integral for the CPA outage built straight from the
beamforming vectors.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats


def bessel_i0(t):
    val, _ = integrate.quad(lambda th: math.exp(t * math.cos(th)), 0.0, math.pi, epsabs=0, epsrel=1e-13)
    return val / math.pi


def lower_gamma(n, x):
    val, _ = integrate.quad(lambda t: math.exp(-t) * t ** (n - 1), 0.0, x, epsabs=0, epsrel=1e-13, limit=200)
    return val


def ei_negative(x):
    """Ei(x) for x < 0 as -int_{-x}^inf e^{-t}/t dt."""
    val, _ = integrate.quad(lambda t: math.exp(-t) / t, -x, math.inf, epsabs=0, epsrel=1e-13, limit=200)
    return -val


def power_integral(n, p, a, b):
    """int_a^b y^{-n-1} e^{-p y} dy."""
    val, _ = integrate.quad(lambda y: y ** (-n - 1) * math.exp(-p * y), a, b, epsabs=0, epsrel=1e-13, limit=200)
    return val


def projected_eigs(h, T):
    """Eigenvalues of V_N^H T V_N with V_N from a full SVD of h, descending."""
    h = np.asarray(h, dtype=complex).reshape(1, -1)
    _, _, vh = np.linalg.svd(h)
    vn = vh.conj().T[:, 1:]
    q = vn.conj().T @ T @ vn
    return np.sort(np.linalg.eigvalsh(0.5 * (q + q.conj().T)))[::-1]


def cpa_outage(h, T, alpha, rate, mu_b, mu_e):
    """CPA secrecy outage conditioned on ``h``, from the joint Gaussian law of Eve's gains.

    With ``a = g v_I`` and ``b = g V_N w_I``, CPA gives
    ``gamma_E = alpha |a|^2 / ((1 - alpha) |b|^2 + 1/mu_E)``.  Given ``b``,
    ``a`` is complex Gaussian with mean ``(c/theta_1) b`` and variance
    ``v^H T v - |c|^2/theta_1``, so ``|a|^2`` is a scaled noncentral
    chi-square.  Integrating over ``|b|^2 ~ theta_1 Exp(1)`` gives the
    outage.  ``mu_e = inf`` drops the noise term.
    """
    h = np.asarray(h, dtype=complex).reshape(-1)
    T = np.asarray(T, dtype=complex)
    n = h.size
    v = h.conj() / np.linalg.norm(h)
    _, _, vh = np.linalg.svd(h.reshape(1, -1))
    vn = vh.conj().T[:, 1:]
    q = vn.conj().T @ T @ vn
    w, U = np.linalg.eigh(0.5 * (q + q.conj().T))
    theta1, w1 = w[-1], U[:, -1]
    c = v.conj() @ T @ vn @ w1
    va = float(np.real(v.conj() @ T @ v))
    s2 = va - abs(c) ** 2 / theta1
    gain = float(np.real(np.vdot(h, h)))
    z = (alpha * mu_b * gain + 1.0) / 2.0 ** rate - 1.0
    if z <= 0:
        return 1.0
    noise = 0.0 if math.isinf(mu_e) else 1.0 / mu_e

    # integrate in u = scale * y so the bulk of the integrand sits on unit width
    scale = 1.0 + z * (1.0 - alpha) * theta1 / (alpha * s2)

    def integrand(u):
        y = u / scale
        thr = z * ((1.0 - alpha) * theta1 * y + noise) / alpha
        nc = 2.0 * abs(c) ** 2 * y / (theta1 * s2)
        return math.exp(-y) * stats.ncx2.sf(2.0 * thr / s2, 2, nc)

    val, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val / scale


def mc_outage_direct(h, T, omega, alpha, rate, mu_b, mu_e, trials, seed):
    """Plain Monte Carlo on the general SINR, drawing ``g`` with a Cholesky factor."""
    rng = np.random.default_rng(seed)
    h = np.asarray(h, dtype=complex).reshape(-1)
    n = h.size
    v = h.conj() / np.linalg.norm(h)
    _, _, vh = np.linalg.svd(h.reshape(1, -1))
    vn = vh.conj().T[:, 1:]
    L = np.linalg.cholesky(np.asarray(T, dtype=complex))
    gs = (rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))) / math.sqrt(2)
    g = gs @ L.T
    a2 = np.abs(g @ v) ** 2
    gn = g @ vn
    an = np.real(np.einsum("ti,ij,tj->t", gn, omega, gn.conj()))
    noise = 0.0 if math.isinf(mu_e) else 1.0 / mu_e
    gain = float(np.real(np.vdot(h, h)))
    z = (alpha * mu_b * gain + 1.0) / 2.0 ** rate - 1.0
    hits = alpha * a2 > z * ((1.0 - alpha) / (n - 1) * an + noise)
    p = hits.mean()
    return p, math.sqrt(p * (1 - p) / trials)
