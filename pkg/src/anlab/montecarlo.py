"""Monte Carlo estimates of secrecy outage and AN interference statistics.

Eve's channel is drawn in fixed-size chunks.  Chunk ``c`` of stream ``s``
always comes from ``SeedSequence(seed, spawn_key=(*s, c))``, and chunks are
reduced in index order, so a result does not depend on how many workers
produced it.

Only two statistics of each Eve draw enter any SINR: ``|g v_I|^2`` and the
vector ``|g V_N W|^2``.  An :class:`EveSample` keeps exactly those, so one
frozen sample can score many values of ``alpha`` and many AN spectra
(common random numbers).
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .allocation import PowerAllocation
from .beamformer import BeamformingBasis, build_basis
from .channel import RandomSource, correlate, sample_whitened
from .errors import BudgetError, DomainError
from .special import DEFAULT_SERIES

CHUNK = 1 << 16
MIN_TRIALS = 1_000
MIN_H_REALIZATIONS = 50

# stream ids; the two-level experiments append the h index
EVE_STREAM = 1
MAIN_STREAM = 2
AUX_STREAM = 3


@dataclass(frozen=True)
class MonteCarloConfig:
    trials: int = 1_000_000
    h_realizations: int = 1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < MIN_TRIALS:
            raise BudgetError(f"at least {MIN_TRIALS} trials are needed for a reported estimate")
        if self.h_realizations < 1:
            raise BudgetError("h_realizations must be positive")
        if self.workers < 1:
            raise DomainError("workers must be positive")

    @property
    def source(self) -> RandomSource:
        return RandomSource(self.seed, ())

    def chunks(self):
        """``(index, size)`` of every chunk covering ``trials``."""
        n_full, rest = divmod(self.trials, CHUNK)
        out = [(c, CHUNK) for c in range(n_full)]
        if rest:
            out.append((n_full, rest))
        return out

    def map_chunks(self, fn):
        """Apply ``fn(index, size)`` to every chunk; results come back in chunk order."""
        items = self.chunks()
        if self.workers == 1 or len(items) == 1:
            return [fn(c, n) for c, n in items]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(lambda it: fn(*it), items))


@dataclass(frozen=True)
class OutageResult:
    """An outage probability with its standard error.

    ``evaluator`` is ``"mc"`` or ``"analytic"``; analytic results carry
    ``standard_error = 0`` and ``trials = 0``.  ``alpha_star`` and
    ``min_outage`` are filled in by the alpha optimizer.
    """

    estimate: float
    standard_error: float
    trials: int
    fingerprint: str
    alpha_star: Optional[float] = None
    min_outage: Optional[float] = None
    evaluator: str = "mc"
    allocation: str = ""
    infeasible: bool = False

    def __post_init__(self):
        if not 0.0 <= self.estimate <= 1.0:
            raise DomainError(f"outage estimate {self.estimate} outside [0, 1]")
        if self.standard_error < 0:
            raise DomainError("standard error must be nonnegative")


def binomial_result(hits: int, trials: int, fingerprint: str, allocation: str = "") -> OutageResult:
    p = hits / trials
    return OutageResult(p, math.sqrt(p * (1.0 - p) / trials), trials, fingerprint, allocation=allocation)


def fingerprint(*parts) -> str:
    """Short stable hash of arrays, numbers and strings."""
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            a = np.ascontiguousarray(part)
            h.update(str(a.dtype).encode() + str(a.shape).encode())
            h.update(a.tobytes())
        elif isinstance(part, float):
            h.update(repr(part).encode())
        else:
            h.update(json.dumps(part, sort_keys=True, default=repr).encode())
        h.update(b"|")
    return h.hexdigest()[:16]


def scenario_fingerprint(scenario, alloc: Optional[PowerAllocation] = None, mc: Optional[MonteCarloConfig] = None,
                         stream=()) -> str:
    parts = [scenario.corr.matrix, scenario.h if scenario.h is not None else "h?",
             float(scenario.alpha), float(scenario.rate), float(scenario.mu_b), float(scenario.mu_e)]
    if alloc is not None:
        parts += [alloc.kind, alloc.phi]
    if mc is not None:
        parts += [mc.trials, mc.seed, list(stream)]
    return fingerprint(*parts)


# ------------------------------------------------------------------ sampling


def draw_eve_channels(corr, source: RandomSource, chunk: int, size: int) -> np.ndarray:
    """Correlated Eve rows ``g = g_s sqrt(Lambda) U_T^H`` for one chunk."""
    return correlate(sample_whitened(source.generator(chunk), corr.n_antennas, size), corr)


def sinr_eve(g, basis: BeamformingBasis, alloc: PowerAllocation, scenario, omega=None):
    """Eve's SINR for rows ``g``, using the AN covariance ``omega``.

    ``omega`` defaults to the allocation's ``W diag(phi) W^H``.  Any Hermitian
    PSD matrix with trace ``N_t - 1`` is accepted.  With infinite ``mu_E`` a
    zero AN term gives an infinite SINR.
    """
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    a = scenario.alpha
    m = basis.n_antennas - 1
    Om = alloc.omega(basis) if omega is None else np.asarray(omega)
    gv = g @ basis.v_info
    gn = g @ basis.null_basis
    an = np.real(np.einsum("ti,ij,tj->t", gn, Om, gn.conj()))
    noise = 0.0 if scenario.asymptotic else 1.0 / scenario.mu_e
    denom = (1.0 - a) / m * an + noise
    num = a * np.abs(gv) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), np.inf)
    return out if out.size > 1 else float(out[0])


def sample_quadratic_form(basis: BeamformingBasis, omega, source: RandomSource, trials: int) -> np.ndarray:
    """Draws of ``g V_N Omega V_N^H g^H`` for a fixed AN covariance ``omega``."""
    Om = np.asarray(omega, dtype=complex)
    out = []
    n_full, rest = divmod(trials, CHUNK)
    for c, n in [(c, CHUNK) for c in range(n_full)] + ([(n_full, rest)] if rest else []):
        gn = draw_eve_channels(basis.corr, source, c, n) @ basis.null_basis
        out.append(np.real(np.einsum("ti,ij,tj->t", gn, Om, gn.conj())))
    return np.concatenate(out)


@dataclass(frozen=True)
class EveSample:
    """Frozen Eve draws reduced to ``a2 = |g v_I|^2`` and ``b2 = |g V_N W|^2``."""

    a2: np.ndarray
    b2: np.ndarray
    fingerprint: str
    seed: int
    chunk_sizes: tuple

    @property
    def trials(self) -> int:
        return self.a2.shape[0]

    def interference(self, phi) -> np.ndarray:
        """Per-trial AN leakage ``sum_m phi_m |g V_N w_m|^2``."""
        return self.b2 @ np.asarray(phi, dtype=float)

    def indicators(self, scenario, phi, interference=None) -> np.ndarray:
        z = scenario.threshold()
        if z <= 0:
            return np.ones(self.trials, dtype=bool)
        a = scenario.alpha
        s = self.interference(phi) if interference is None else interference
        denom = (1.0 - a) / self.b2.shape[1] * s
        if scenario.asymptotic:
            return (a * self.a2 > z * denom) | (denom <= 0)
        return a * self.a2 > z * (denom + 1.0 / scenario.mu_e)

    def outage(self, scenario, phi, interference=None) -> float:
        if scenario.threshold() <= 0:
            return 1.0
        return float(np.count_nonzero(self.indicators(scenario, phi, interference))) / self.trials

    def outage_curve(self, scenario, alphas, phi) -> np.ndarray:
        s = self.interference(phi)
        return np.array([self.outage(scenario.with_alpha(a), phi, s) for a in alphas])

    def result(self, scenario, alloc: PowerAllocation, kind: Optional[str] = None) -> OutageResult:
        label = kind or alloc.kind
        fp = fingerprint(self.fingerprint, float(scenario.alpha), float(scenario.rate), float(scenario.mu_b),
                         float(scenario.mu_e), alloc.phi)
        if scenario.threshold() <= 0:
            return OutageResult(1.0, 0.0, self.trials, fp, allocation=label)
        hits = int(np.count_nonzero(self.indicators(scenario, alloc.phi)))
        return binomial_result(hits, self.trials, fp, label)

    def batch_means(self, values: np.ndarray):
        """Mean and batch-means standard error using the chunk layout as batches."""
        edges = np.cumsum((0,) + self.chunk_sizes)
        means = np.array([values[edges[i]:edges[i + 1]].mean() for i in range(len(self.chunk_sizes))])
        w = np.asarray(self.chunk_sizes, dtype=float)
        mean = float(np.dot(w, means) / w.sum())
        if len(means) < 2:
            return mean, float(values.std(ddof=1) / math.sqrt(values.size))
        var = np.dot(w, (means - mean) ** 2) / (w.sum() * (len(means) - 1))
        return mean, float(math.sqrt(var))


def draw_eve_sample(basis: BeamformingBasis, mc: MonteCarloConfig, stream: Sequence[int] = (EVE_STREAM,)) -> EveSample:
    source = mc.source.child(*stream)
    P = basis.projector

    def one(c, n):
        g = draw_eve_channels(basis.corr, source, c, n)
        return np.abs(g @ basis.v_info) ** 2, np.abs(g @ P) ** 2

    parts = mc.map_chunks(one)
    a2 = np.concatenate([p[0] for p in parts])
    b2 = np.concatenate([p[1] for p in parts])
    a2.setflags(write=False)
    b2.setflags(write=False)
    fp = fingerprint(basis.corr.matrix, basis.h, mc.trials, mc.seed, list(stream))
    return EveSample(a2, b2, fp, mc.seed, tuple(n for _, n in mc.chunks()))


# ---------------------------------------------------------------- estimators


def estimate_outage(scenario, basis: BeamformingBasis, alloc: PowerAllocation, mc: MonteCarloConfig,
                    stream: Sequence[int] = (EVE_STREAM,)) -> OutageResult:
    """Fraction of Eve draws whose SINR exceeds ``(gamma_B + 1)/2^R_s - 1``."""
    fp = scenario_fingerprint(scenario, alloc, mc, stream)
    if scenario.threshold() <= 0:
        return OutageResult(1.0, 0.0, mc.trials, fp, allocation=alloc.kind)
    sample = draw_eve_sample(basis, mc, stream)
    hits = int(np.count_nonzero(sample.indicators(scenario, alloc.phi)))
    return binomial_result(hits, mc.trials, fp, alloc.kind)


def estimate_mean_interference(basis: BeamformingBasis, alloc: PowerAllocation, mc: MonteCarloConfig,
                               stream: Sequence[int] = (AUX_STREAM,)):
    """Sample mean and standard error of ``||g V_N W sqrt(Phi)||^2``."""
    s = draw_eve_sample(basis, mc, stream).interference(alloc.phi)
    return float(s.mean()), float(s.std(ddof=1) / math.sqrt(s.size))


def estimate_gain_correlation(basis: BeamformingBasis, mc: MonteCarloConfig, stream: Sequence[int] = (AUX_STREAM,)):
    """Empirical correlation coefficient of ``|g v_I|^2`` and ``|g V_N w_I|^2``.

    Returns ``(estimate, standard_error)``; the error is from batch means
    over chunks.
    """
    sample = draw_eve_sample(basis, mc, stream)
    x = sample.a2
    y = sample.b2[:, 0]
    edges = np.cumsum((0,) + sample.chunk_sizes)
    per = np.array([np.corrcoef(x[edges[i]:edges[i + 1]], y[edges[i]:edges[i + 1]])[0, 1]
                    for i in range(len(sample.chunk_sizes))])
    est = float(np.corrcoef(x, y)[0, 1])
    if per.size < 2:
        return est, float((1 - est ** 2) / math.sqrt(x.size))
    return est, float(per.std(ddof=1) / math.sqrt(per.size))


def draw_main_basis(corr, mc: MonteCarloConfig, index: int) -> BeamformingBasis:
    """Basis for the ``index``-th main channel of a two-level experiment."""
    source = mc.source.child(MAIN_STREAM, index)
    h = correlate(sample_whitened(source.generator(0), corr.n_antennas), corr)
    return build_basis(h, corr)


def estimate_average_outage(template, mc: MonteCarloConfig, allocation: str = "cpa", *, search=None,
                            regime: Optional[str] = None, min_realizations: int = MIN_H_REALIZATIONS,
                            return_samples: bool = False, ctrl=None, method: str = "stable"):
    """Average over main channels of the alpha-minimized outage.

    For every one of ``mc.h_realizations`` main channels the basis is built,
    ``alpha`` is optimized for the allocation, and the minimum is recorded.
    CPA uses the closed forms; UPA and OPA use a frozen Eve sample per
    channel.  ``regime`` forces ``"asymptotic"`` (``mu_E`` treated as
    infinite) or ``"exact"``.  Returns an :class:`OutageResult` whose
    standard error is taken across main channels.
    """
    from . import optimizer

    if mc.h_realizations < min_realizations:
        raise BudgetError(f"averaged experiments need at least {min_realizations} main channels")
    scen = template
    if regime == "asymptotic" and not template.asymptotic:
        scen = _replace_mu_e(template, math.inf)
    elif regime not in (None, "auto", "asymptotic", "exact"):
        raise DomainError(f"unknown regime {regime!r}")
    if regime == "exact" and scen.asymptotic:
        raise DomainError("exact regime needs a finite mu_E")
    search = search or optimizer.AlphaSearch()
    ctrl = ctrl or DEFAULT_SERIES
    inner = MonteCarloConfig(mc.trials, 1, mc.seed, 1)

    def one(i):
        basis = draw_main_basis(scen.corr, mc, i)
        s = scen.with_h(basis.h)
        if allocation == "cpa":
            _, res = optimizer.optimize_alpha(s, basis, "cpa", "analytic", search, ctrl=ctrl, method=method)
        else:
            _, res = optimizer.optimize_alpha(s, basis, allocation, "mc", search, mc=inner,
                                              stream=(EVE_STREAM, i))
        return res.min_outage

    idx = range(mc.h_realizations)
    if mc.workers > 1:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            values = np.array(list(pool.map(one, idx)))
    else:
        values = np.array([one(i) for i in idx])
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size))
    fp = fingerprint(scen.corr.matrix, float(scen.rate), float(scen.mu_b), float(scen.mu_e), allocation,
                     mc.trials, mc.h_realizations, mc.seed)
    res = OutageResult(min(1.0, max(0.0, mean)), se, mc.trials * mc.h_realizations, fp,
                       min_outage=mean, evaluator="analytic" if allocation == "cpa" else "mc",
                       allocation=allocation)
    return (res, values) if return_samples else res


def _replace_mu_e(template, mu_e):
    from dataclasses import replace

    return replace(template, mu_e=mu_e)
