"""Closed-form secrecy outage of the correlation-based allocation.

Both outage probabilities have three evaluation routes, chosen by ``method``.

``"series"``
    The published series, term by term, in mpmath at a precision picked
    from a bound on the term magnitudes.  The alternating binomial sums
    cancel badly in double precision.

``"quadrature"``
    No truncation.  The pair of Eve gains is a Kibble bivariate
    exponential with correlation ``rho``.  Given the AN gain, the signal
    gain is a scaled noncentral chi-square with two degrees of freedom.
    The cdf is then a one-dimensional integral, done by adaptive
    quadrature.  This serves as the reference when ``rho`` is close to 1
    and the truncated series has not converged.

``"stable"``
    The same ``k``-truncated series regrouped into positive terms and
    evaluated in float64.  The ``k``-th term of the asymptotic cdf is
    ``(1-rho) rho^k I_u(k+1, k+1)`` with ``u = z / (z + sigma_n^2/sigma_d^2)``.
    The ``k``-th term of the exact cdf is ``(1-rho) rho^k`` times the
    probability that a Gamma(k+1) variate lies below ``z`` times one plus
    an independent Gamma(k+1).  That probability comes from a finite
    positive double sum.  For every ``K`` the two routes agree to rounding
    error (``tests/test_analytics.py``).  Sweeps and optimizers use this one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np
from scipy import integrate, stats
from scipy import special as sps

from .beamformer import BeamformingBasis
from .correlation import CorrelationMatrix
from .errors import DegenerateCorrelationError, DomainError, NumericError, SeriesDivergenceError
from .special import DEFAULT_SERIES, SeriesControl, f_antiderivative

log = logging.getLogger(__name__)

CLAMP_SILENT = 1e-9
CLAMP_FATAL = 1e-6
BASE_DPS = 40
GUARD_DIGITS = 22


def db_to_linear(db) -> float:
    if isinstance(db, str):
        if db.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise DomainError(f"not a dB value: {db!r}")
    if math.isinf(db) and db > 0:
        return math.inf
    return 10.0 ** (float(db) / 10.0)


@dataclass(frozen=True)
class SecrecyScenario:
    """Link parameters for one conditioned outage evaluation.

    ``mu_e = math.inf`` selects the noiseless-eavesdropper (asymptotic)
    regime.  ``h`` may be left unset in templates for experiments averaged
    over the main channel.
    """

    corr: CorrelationMatrix
    rate: float
    mu_b: float
    mu_e: float
    h: Optional[np.ndarray] = None
    alpha: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.rate > 0:
            raise DomainError("target secrecy rate must be positive")
        if not self.mu_b > 0:
            raise DomainError("mu_B must be positive")
        if not self.mu_e > 0:
            raise DomainError("mu_E must be positive or infinite")
        if self.h is not None:
            h = np.array(self.h, dtype=complex).reshape(-1)
            if h.size != self.corr.n_antennas:
                raise DomainError("h length does not match the correlation matrix")
            h.setflags(write=False)
            object.__setattr__(self, "h", h)

    @property
    def asymptotic(self) -> bool:
        return math.isinf(self.mu_e)

    @property
    def n_antennas(self) -> int:
        return self.corr.n_antennas

    @property
    def main_gain(self) -> float:
        return float(np.vdot(self.h, self.h).real)

    def with_alpha(self, alpha: float) -> "SecrecyScenario":
        return replace(self, alpha=float(alpha))

    def with_h(self, h) -> "SecrecyScenario":
        return replace(self, h=h)

    def threshold(self) -> float:
        """Eve SINR above which the link is in secrecy outage."""
        return (gamma_b(self) + 1.0) / 2.0 ** self.rate - 1.0


@dataclass(frozen=True)
class OutageParams:
    """Parameters of the correlated pair (Eve's signal gain, Eve's AN gain).

    ``sigma_n``/``sigma_d`` describe the asymptotic regime; ``s_n``/``s_d``
    are their noisy counterparts and are infinite when ``mu_E`` is.
    """

    rho: float
    sigma_n: float
    sigma_d: float
    s_n: float
    s_d: float
    gamma_b: float


def gamma_b(scenario: SecrecyScenario) -> float:
    """Bob's SNR ``alpha mu_B ||h||^2``."""
    return scenario.alpha * scenario.mu_b * scenario.main_gain


def outage_params(scenario: SecrecyScenario, basis: BeamformingBasis) -> OutageParams:
    a = scenario.alpha
    if not 0.0 < a < 1.0:
        raise DomainError(f"outage parameters need 0 < alpha < 1, got {a}")
    v = basis.info_gain
    theta1 = float(basis.theta[0])
    sigma_n2 = 0.5 * a * v
    sigma_d2 = 0.5 * (1.0 - a) * theta1
    rho = a * (1.0 - a) * abs(basis.cross_term) ** 2 / (4.0 * sigma_n2 * sigma_d2)
    if rho >= 1.0 - 1e-12:
        raise DegenerateCorrelationError(f"signal/AN gain correlation rho = {rho} is not below 1")
    rho = max(rho, 0.0)
    mu = scenario.mu_e
    s_n = math.sqrt(0.5 * a * mu * v) if not math.isinf(mu) else math.inf
    s_d = math.sqrt(0.5 * (1.0 - a) * mu * theta1) if not math.isinf(mu) else math.inf
    return OutageParams(rho, math.sqrt(sigma_n2), math.sqrt(sigma_d2), s_n, s_d, gamma_b(scenario))


def _clamp(raw: float, what: str) -> float:
    if not math.isfinite(raw):
        raise NumericError(f"{what} evaluated to {raw}")
    if raw < -CLAMP_FATAL or raw > 1.0 + CLAMP_FATAL:
        raise SeriesDivergenceError(f"{what} = {raw!r} is outside [0, 1]; increase the truncation")
    if raw < -CLAMP_SILENT or raw > 1.0 + CLAMP_SILENT:
        log.warning("%s = %r clamped to [0, 1]", what, raw)
    return min(1.0, max(0.0, raw))


# ---------------------------------------------------------------- asymptotic


def _asymptotic_cdf_stable(z: float, p: OutageParams, ctrl: SeriesControl) -> float:
    r = p.sigma_n ** 2 / p.sigma_d ** 2
    u = z / (z + r)
    rho = p.rho
    if not ctrl.adaptive:
        k = np.arange(ctrl.truncation + 1, dtype=float)
        terms = (1.0 - rho) * rho ** k * sps.betainc(k + 1.0, k + 1.0, u)
        return float(math.fsum(terms))
    total = 0.0
    k = 0
    while True:
        term = (1.0 - rho) * rho ** k * float(sps.betainc(k + 1.0, k + 1.0, u))
        total += term
        if ctrl.done(k, term, total) or term == 0.0:
            return total
        k += 1


def _asymptotic_cdf_series(z: float, p: OutageParams, ctrl: SeriesControl, dps: int):
    with mpmath.workdps(dps):
        rho = mpmath.mpf(p.rho)
        r = mpmath.mpf(p.sigma_n) ** 2 / mpmath.mpf(p.sigma_d) ** 2
        z = mpmath.mpf(z)
        zr = z + r
        total = mpmath.mpf(0)
        bound = mpmath.mpf(0)
        k = 0
        while True:
            inner = mpmath.mpf(0)
            inner_abs = mpmath.mpf(0)
            for i in range(k + 1):
                e = i - 2 * k - 1
                c = mpmath.binomial(k, i) * (-r) ** (k - i) / e
                inner += c * (zr ** e - r ** e)
                inner_abs += abs(c) * (zr ** e + r ** e)
            coef = mpmath.factorial(2 * k + 1) * r ** k * rho ** k / mpmath.factorial(k) ** 2
            term = r * (1 - rho) * coef * inner
            total += term
            bound = max(bound, r * (1 - rho) * coef * inner_abs)
            if ctrl.done(k, float(term), float(total)):
                break
            k += 1
        return total, bound


def conditional_integral_cdf(z: float, p: OutageParams, asymptotic: bool) -> float:
    """Untruncated cdf of Eve's SINR by quadrature over the AN gain."""
    if asymptotic:
        beta, gam = z * p.sigma_d ** 2 / p.sigma_n ** 2, 0.0
    else:
        beta, gam = z * p.s_d ** 2 / p.s_n ** 2, z / (2.0 * p.s_n ** 2)
    rho = p.rho
    if rho < 1e-14:
        # independent gains: P(X > beta Y + gam) = e^{-gam} / (1 + beta)
        return 1.0 - math.exp(-gam) / (1.0 + beta)
    k = 1.0 - rho
    # the integrand decays roughly like exp(-(1 + beta) y); rescale so quad sees unit width
    scale = 1.0 + beta

    def surv(u):
        y = u / scale
        return math.exp(-y) * stats.ncx2.sf(2.0 * (beta * y + gam) / k, 2, 2.0 * rho * y / k)

    val, _ = integrate.quad(surv, 0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return 1.0 - val / scale


def _series_with_precision(fn, *args):
    value, bound = fn(*args, BASE_DPS)
    need = int(math.ceil(float(mpmath.log10(bound)))) + GUARD_DIGITS if bound > 0 else 0
    if need > BASE_DPS:
        value, _ = fn(*args, need)
    return float(value)


def asymptotic_eve_cdf(z: float, params: OutageParams, ctrl: SeriesControl = DEFAULT_SERIES,
                       method: str = "series") -> float:
    """Cdf of Eve's SINR with CPA when Eve is noiseless, at ``z``."""
    if z <= 0:
        return 0.0
    if method == "stable":
        return _asymptotic_cdf_stable(z, params, ctrl)
    if method == "series":
        return _series_with_precision(_asymptotic_cdf_series, z, params, ctrl)
    if method == "quadrature":
        return conditional_integral_cdf(z, params, True)
    raise ValueError(f"unknown method {method!r}")


def asymptotic_outage(scenario: SecrecyScenario, basis: BeamformingBasis,
                      ctrl: SeriesControl = DEFAULT_SERIES, method: str = "series") -> float:
    """Secrecy outage with CPA for a noiseless eavesdropper (``mu_E`` ignored)."""
    if scenario.alpha >= 1.0:
        return 1.0
    z = scenario.threshold()
    if z <= 0:
        return 1.0
    p = outage_params(scenario, basis)
    return _clamp(1.0 - asymptotic_eve_cdf(z, p, ctrl, method), "asymptotic outage")


# --------------------------------------------------------------------- exact


@lru_cache(maxsize=None)
def _exact_index(k: int):
    # (j, l) pairs with 0 <= l <= j <= k and their k-independent log weights
    j, l = np.tril_indices(k + 1)
    # log[ C(j, l)/j! * (k+l)!/k! ]; C(j, l)/j! = 1/(l! (j-l)!)
    logw = (-sps.gammaln(l + 1) - sps.gammaln(j - l + 1)
            + sps.gammaln(k + l + 1) - sps.gammaln(k + 1))
    return j.astype(float), l.astype(float), logw


def _exact_survival_k(k: int, c: float, theta_d: float) -> float:
    # P(G_n > c * theta_n * (1 + G_d)) for G_n ~ Gamma(k+1, theta_n), G_d ~ Gamma(k+1, theta_d);
    # the scale theta_n enters only through c = z / theta_n.
    j, l, logw = _exact_index(k)
    log_c = math.log(c)
    log_td = math.log(theta_d)
    l1p = math.log1p(c * theta_d)
    lt = logw - c + j * log_c + l * log_td - (k + 1 + l) * l1p
    return float(np.exp(lt).sum())


def _exact_cdf_stable(z: float, p: OutageParams, ctrl: SeriesControl) -> float:
    rho = p.rho
    theta_n = 2.0 * (1.0 - rho) * p.s_n ** 2
    theta_d = 2.0 * (1.0 - rho) * p.s_d ** 2
    c = z / theta_n
    total = 0.0
    k = 0
    while True:
        w = (1.0 - rho) * rho ** k
        surv = min(1.0, _exact_survival_k(k, c, theta_d))
        term = w * (1.0 - surv)
        total += term
        if ctrl.done(k, term, total) or (ctrl.adaptive and w == 0.0):
            return total
        k += 1


def _exact_cdf_series(z: float, p: OutageParams, ctrl: SeriesControl, dps: int):
    K = ctrl.limit
    with mpmath.workdps(dps):
        rho = mpmath.mpf(p.rho)
        sn2 = mpmath.mpf(p.s_n) ** 2
        sd2 = mpmath.mpf(p.s_d) ** 2
        z = mpmath.mpf(z)
        r = sn2 / sd2
        pp = 1 / (2 * (1 - rho) * sn2)
        two_sn = 2 * (1 - rho) * sn2
        pref = mpmath.exp(1 / (2 * (1 - rho) * sd2)) / (4 * sn2 * sd2 * (1 - rho))
        f_hi, f_lo, diff = {}, {}, {}

        def D(n):
            if n not in diff:
                f_hi[n] = f_antiderivative(n, pp, z + r, dps=dps)
                f_lo[n] = f_antiderivative(n, pp, r, dps=dps)
                diff[n] = f_hi[n] - f_lo[n]
            return diff[n]

        total = mpmath.mpf(0)
        bound = mpmath.mpf(0)
        k = 0
        while True:
            a_k = rho ** k * (1 - rho) ** (-k) / (2 ** k * mpmath.factorial(k) ** 2 * sd2 ** k)
            # m-sum depends on (i - j) only
            E, E_abs = {}, {}
            for s in range(-(k + 1), k + 1):
                acc = mpmath.mpf(0)
                acc_abs = mpmath.mpf(0)
                for m in range(k + 1):
                    n = k + s - m + 1
                    c = mpmath.binomial(k, m) * (-r) ** (k - m)
                    acc += c * D(n)
                    acc_abs += abs(c) * (abs(f_hi[n]) + abs(f_lo[n]))
                E[s], E_abs[s] = acc, acc_abs
            acc = mpmath.mpf(0)
            acc_abs = mpmath.mpf(0)
            for i in range(k + 1):
                b = mpmath.binomial(k, i) * (-1) ** (k - i)
                for j in range(k + i + 2):
                    c = b * mpmath.factorial(k + i + 1) / (mpmath.factorial(j) * two_sn ** (j - i - 2))
                    acc += c * E[i - j]
                    acc_abs += abs(c) * E_abs[i - j]
            term = pref * a_k * acc
            total += term
            bound = max(bound, pref * a_k * acc_abs)
            if ctrl.done(k, float(term), float(total)):
                break
            k += 1
        return total, bound


def exact_eve_cdf(z: float, params: OutageParams, ctrl: SeriesControl = DEFAULT_SERIES,
                  method: str = "series") -> float:
    """Cdf of Eve's SINR with CPA and finite ``mu_E``, at ``z`` (``0 < alpha < 1``)."""
    if z <= 0:
        return 0.0
    if math.isinf(params.s_n):
        raise DomainError("exact cdf needs a finite mu_E")
    if method == "stable":
        return _exact_cdf_stable(z, params, ctrl)
    if method == "series":
        return _series_with_precision(_exact_cdf_series, z, params, ctrl)
    if method == "quadrature":
        return conditional_integral_cdf(z, params, False)
    raise ValueError(f"unknown method {method!r}")


def exact_outage_alpha_one(scenario: SecrecyScenario, basis: BeamformingBasis) -> float:
    """No AN: Eve's SINR is exponential with mean ``mu_E v_I^H T v_I``."""
    z = replace(scenario, alpha=1.0).threshold()
    if z <= 0:
        return 1.0
    return math.exp(-z / (scenario.mu_e * basis.info_gain))


def exact_outage(scenario: SecrecyScenario, basis: BeamformingBasis,
                 ctrl: SeriesControl = DEFAULT_SERIES, method: str = "series") -> float:
    """Secrecy outage with CPA for a finite eavesdropper SNR ``mu_E``."""
    if scenario.asymptotic:
        raise DomainError("exact outage needs a finite mu_E; use asymptotic_outage")
    if scenario.alpha >= 1.0:
        return exact_outage_alpha_one(scenario, basis)
    z = scenario.threshold()
    if z <= 0:
        return 1.0
    p = outage_params(scenario, basis)
    return _clamp(1.0 - exact_eve_cdf(z, p, ctrl, method), "exact outage")


def cpa_outage(scenario: SecrecyScenario, basis: BeamformingBasis,
               ctrl: SeriesControl = DEFAULT_SERIES, method: str = "series") -> float:
    """Dispatch on the regime: asymptotic when ``mu_E`` is infinite, exact otherwise."""
    if scenario.asymptotic:
        return asymptotic_outage(scenario, basis, ctrl, method)
    return exact_outage(scenario, basis, ctrl, method)


def upa_outage_mc_reference(scenario: SecrecyScenario, basis: BeamformingBasis, mc):
    """UPA has no closed form under correlation; estimate it by simulation."""
    from . import allocation, montecarlo

    return montecarlo.estimate_outage(scenario, basis, allocation.upa(basis.n_antennas), mc)
