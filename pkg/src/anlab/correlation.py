"""Transmitter-side correlation matrices for the Kronecker channel model.

A correlated channel row vector is formed as ``h = h_s @ T^{1/2}``.  We keep
both square roots of ``T``: the Cholesky factor and the eigen form
``sqrt(Lambda) @ U_T^H``.  Sampling uses the eigen form, which stays
well behaved close to rank deficiency; both give the same distribution for
isotropic ``h_s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateCorrelationError, DomainError, ValidationError

HERMITIAN_TOL = 1e-12
UNIT_DIAGONAL_TOL = 1e-9
TRACE_TOL = 1e-6
# smallest eigenvalue must exceed this fraction of the largest
PD_RELATIVE_TOL = 1e-10


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array used by the exponential correlation model."""

    model: str
    length: float
    rho_r: float
    positions: np.ndarray = field(repr=False)

    @property
    def distances(self) -> np.ndarray:
        return np.abs(self.positions[:, None] - self.positions[None, :])


@dataclass(frozen=True)
class CorrelationMatrix:
    """Validated correlation matrix ``T`` with its decompositions.

    Attributes
    ----------
    matrix : (N_t, N_t) complex ndarray
    eigenvalues : (N_t,) ndarray, nonincreasing
    eigenvectors : (N_t, N_t) unitary ndarray, columns matching ``eigenvalues``
    cholesky_root : (N_t, N_t) ndarray ``R`` with ``T = R^H R``
    synthetic : bool
        True when built from a bare spectrum, in which case the unit diagonal
        was not enforced.
    geometry : ArrayGeometry or None
    """

    matrix: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    cholesky_root: np.ndarray = field(repr=False)
    synthetic: bool = False
    geometry: Optional[ArrayGeometry] = None

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def sqrt_factor(self) -> np.ndarray:
        """``sqrt(Lambda) @ U_T^H``, the right factor applied to whitened rows."""
        return np.sqrt(self.eigenvalues)[:, None] * self.eigenvectors.conj().T

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def _decompose(T: np.ndarray, *, synthetic: bool, geometry=None) -> CorrelationMatrix:
    w, U = np.linalg.eigh(T)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    U = U[:, order]
    if w[-1] <= PD_RELATIVE_TOL * w[0]:
        raise DegenerateCorrelationError(
            f"correlation matrix is not positive definite "
            f"(smallest eigenvalue {w[-1]:.3e}, largest {w[0]:.3e})"
        )
    try:
        lower = np.linalg.cholesky(T)
    except np.linalg.LinAlgError as exc:
        raise DegenerateCorrelationError(f"Cholesky factorization failed: {exc}") from exc
    for arr in (T, w, U, lower):
        arr.setflags(write=False)
    root = lower.conj().T
    root.setflags(write=False)
    return CorrelationMatrix(T, w, U, root, synthetic=synthetic, geometry=geometry)


def build_exponential_correlation(n_antennas: int, length: float, rho_r: float) -> CorrelationMatrix:
    """Exponential model ``t_ij = rho_r ** delta_ij`` on a uniform linear array.

    The ``n_antennas`` elements are spread evenly over ``length`` meters.
    ``0 ** 0`` is taken as 1 so ``rho_r = 0`` gives the identity.
    """
    if n_antennas < 2:
        raise DomainError(f"need at least 2 antennas, got {n_antennas}")
    if not 0.0 <= rho_r <= 1.0:
        raise DomainError(f"rho_r must lie in [0, 1], got {rho_r}")
    if not length > 0:
        raise DomainError(f"array length must be positive, got {length}")
    if rho_r == 1.0:
        raise DegenerateCorrelationError("rho_r = 1 gives a rank-one correlation matrix")
    positions = np.linspace(0.0, float(length), n_antennas)
    geometry = ArrayGeometry("exponential-ULA", float(length), float(rho_r), positions)
    T = np.power(float(rho_r), geometry.distances).astype(complex)
    return _decompose(T, synthetic=False, geometry=geometry)


def from_explicit(matrix) -> CorrelationMatrix:
    """Validate a user supplied correlation matrix."""
    T = np.array(matrix, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValidationError(f"correlation matrix must be square, got shape {T.shape}")
    scale = max(1.0, float(np.abs(T).max()))
    if np.abs(T - T.conj().T).max() > HERMITIAN_TOL * scale:
        raise ValidationError("correlation matrix is not Hermitian")
    if np.abs(np.diag(T) - 1.0).max() > UNIT_DIAGONAL_TOL:
        raise ValidationError("correlation matrix must have a unit diagonal")
    T = 0.5 * (T + T.conj().T)
    return _decompose(T, synthetic=False)


def from_spectrum(eigenvalues, eigenvectors=None) -> CorrelationMatrix:
    """Build ``T = U diag(lambda) U^H`` from a spectrum (``U`` defaults to I).

    Only the spectrum affects secrecy performance, so this is enough to
    describe a scenario.  The unit diagonal is not checked here.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.size
    if lam.ndim != 1 or n < 1:
        raise DomainError("eigenvalues must be a nonempty 1-d sequence")
    if np.any(lam <= 0):
        raise DomainError("eigenvalues must be strictly positive")
    if abs(lam.sum() - n) > TRACE_TOL:
        raise DomainError(f"eigenvalues must sum to N_t = {n}, got {lam.sum():.9g}")
    if eigenvectors is None:
        U = np.eye(n, dtype=complex)
    else:
        U = np.array(eigenvectors, dtype=complex)
        if U.shape != (n, n) or np.abs(U.conj().T @ U - np.eye(n)).max() > 1e-10:
            raise ValidationError("eigenvectors must form an N_t x N_t unitary matrix")
    T = (U * lam) @ U.conj().T
    T = 0.5 * (T + T.conj().T)
    return _decompose(T, synthetic=True)
