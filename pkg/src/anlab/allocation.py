"""Artificial-noise power allocation over the null space of the main channel.

Allocations are parameterized by a nonnegative spectrum ``phi`` summing to
``N_t - 1``.  It is expressed in the eigenbasis ``W`` of ``Q = V_N^H T V_N``,
so ``Omega = W diag(phi) W^H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .beamformer import BeamformingBasis
from .errors import BudgetError, DomainError, UnsupportedDimensionError, ValidationError

TRACE_TOL = 1e-9
OPA_MAX_ANTENNAS = 6
OPA_MIN_TRIALS = 10_000


@dataclass(frozen=True)
class PowerAllocation:
    kind: str
    phi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float).reshape(-1)
        if np.any(phi < 0):
            raise ValidationError("phi entries must be nonnegative")
        if abs(phi.sum() - phi.size) > TRACE_TOL * max(1, phi.size):
            raise ValidationError(f"phi must sum to N_t - 1 = {phi.size}, got {phi.sum():.12g}")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    def omega(self, basis: BeamformingBasis) -> np.ndarray:
        """Full AN covariance shape ``W diag(phi) W^H``."""
        W = basis.eigvecs
        return (W * self.phi) @ W.conj().T


def cpa(basis: BeamformingBasis) -> PowerAllocation:
    """All AN power along the principal eigenvector of ``Q``."""
    m = basis.n_antennas - 1
    phi = np.zeros(m)
    phi[0] = m
    return PowerAllocation("cpa", phi)


def upa(n_antennas: int) -> PowerAllocation:
    """Isotropic AN, ``Omega = I``."""
    if n_antennas < 2:
        raise DomainError("UPA needs at least 2 antennas")
    return PowerAllocation("upa", np.ones(n_antennas - 1))


def custom(phi) -> PowerAllocation:
    return PowerAllocation("custom", phi)


def mean_interference(alloc: PowerAllocation, basis: BeamformingBasis) -> float:
    """Average AN power leaking to Eve, ``sum_m phi_m theta_m``."""
    if alloc.phi.size != basis.theta.size:
        raise ValidationError("allocation and basis dimensions differ")
    return float(np.dot(alloc.phi, basis.theta))


def project_simplex(phi, total: float) -> np.ndarray:
    """Clip negatives to zero and rescale onto ``{phi >= 0, sum = total}``."""
    out = np.clip(np.asarray(phi, dtype=float), 0.0, None)
    s = out.sum()
    if s <= 0:
        return np.full(out.size, total / out.size)
    return out * (total / s)


@dataclass
class _SearchTrace:
    evaluations: int = 0
    history: list = field(default_factory=list)


def compass_search(objective, starts, total: float, *, initial_step: Optional[float] = None,
                   min_step: Optional[float] = None):
    """Derivative-free compass search on the scaled simplex.

    Polls ``phi +/- step * e_m`` for every coordinate, mapped back onto the
    simplex.  Moves to the first improvement; halves the step when none
    improves.  Runs once from every start and returns ``(phi, value, trace)``
    for the best end point.
    """
    dim = len(starts[0])
    step0 = 0.25 * total if initial_step is None else initial_step
    step_min = 1e-3 * total if min_step is None else min_step
    trace = _SearchTrace()
    best_phi, best_val = None, np.inf
    for start in starts:
        phi = project_simplex(start, total)
        val = objective(phi)
        trace.evaluations += 1
        step = step0
        while step >= step_min and dim > 1:
            improved = False
            for m in range(dim):
                for sign in (1.0, -1.0):
                    cand = phi.copy()
                    cand[m] += sign * step
                    cand = project_simplex(cand, total)
                    if np.allclose(cand, phi):
                        continue
                    cv = objective(cand)
                    trace.evaluations += 1
                    if cv < val:
                        phi, val, improved = cand, cv, True
                        break
                if improved:
                    break
            if not improved:
                step *= 0.5
        trace.history.append((phi.copy(), val))
        if val < best_val:
            best_phi, best_val = phi, val
    return best_phi, best_val, trace


def opa_search(basis: BeamformingBasis, scenario, mc, *, sample=None, max_antennas: int = OPA_MAX_ANTENNAS):
    """Numerically optimal AN spectrum for a fixed ``alpha``.

    Minimizes the Monte Carlo outage estimate over the simplex by compass
    search started at both CPA and UPA.  Every candidate is scored on the
    same frozen set of Eve channels.  Returns ``(allocation, OutageResult)``.
    """
    from . import montecarlo

    n = basis.n_antennas
    if n > max_antennas:
        raise UnsupportedDimensionError(f"OPA search supports N_t <= {max_antennas}, got {n}")
    if mc.trials < OPA_MIN_TRIALS:
        raise BudgetError(f"OPA search needs at least {OPA_MIN_TRIALS} trials, got {mc.trials}")
    if sample is None:
        sample = montecarlo.draw_eve_sample(basis, mc)
    m = n - 1
    starts = [cpa(basis).phi, upa(n).phi]

    def objective(phi):
        return sample.outage(scenario, phi)

    phi, _, trace = compass_search(objective, starts, float(m))
    alloc = PowerAllocation("opa", phi)
    result = sample.result(scenario, alloc, kind="opa")
    return alloc, result
