"""Information beam, null-space artificial-noise basis, and the projected correlation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlation import CorrelationMatrix
from .errors import DegenerateChannelError


@dataclass(frozen=True)
class BeamformingBasis:
    """Beamformers derived from a fixed main channel ``h``.

    Attributes
    ----------
    v_info : (N_t,) unit vector ``h^H / ||h||``
    null_basis : (N_t, N_t-1) orthonormal columns spanning the null space of ``h``
    projected : (N_t-1, N_t-1) Hermitian ``Q = V_N^H T V_N``
    eigvecs : unitary ``W`` with ``Q = W diag(theta) W^H``
    theta : nonincreasing eigenvalues of ``Q``
    """

    h: np.ndarray = field(repr=False)
    corr: CorrelationMatrix = field(repr=False)
    v_info: np.ndarray = field(repr=False)
    null_basis: np.ndarray = field(repr=False)
    projected: np.ndarray = field(repr=False)
    eigvecs: np.ndarray = field(repr=False)
    theta: np.ndarray

    @property
    def n_antennas(self) -> int:
        return self.h.shape[0]

    @property
    def principal(self) -> np.ndarray:
        """``w_I``, the principal eigenvector of ``Q``."""
        return self.eigvecs[:, 0]

    @property
    def info_gain(self) -> float:
        """``v_I^H T v_I``."""
        v = self.v_info
        return float(np.real(v.conj() @ self.corr.matrix @ v))

    @property
    def cross_term(self) -> complex:
        """``v_I^H T V_N w_I``."""
        v = self.v_info
        return complex(v.conj() @ self.corr.matrix @ (self.null_basis @ self.principal))

    @property
    def projector(self) -> np.ndarray:
        """``V_N W``: maps a row ``g`` to its null-space coordinates in Q's eigenbasis."""
        return self.null_basis @ self.eigvecs


def householder_complement(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the unit vector ``v``.

    Builds the Householder reflector ``H`` sending ``v`` to a multiple of
    ``e_1``.  ``H`` is unitary and Hermitian and its first column is
    parallel to ``v``, so its remaining columns span ``v``'s complement.
    """
    n = v.shape[0]
    x0 = v[0]
    # via the angle: x0 / |x0| overflows when x0 is subnormal
    phase = np.exp(1j * np.angle(x0)) if x0 != 0 else 1.0
    u = v.astype(complex).copy()
    u[0] += phase * np.linalg.norm(v)
    u /= np.linalg.norm(u)
    H = np.eye(n, dtype=complex) - 2.0 * np.outer(u, u.conj())
    return H[:, 1:]


def _fix_phase(w: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(w)))
    return w * (abs(w[k]) / w[k])


def build_basis(h, corr: CorrelationMatrix) -> BeamformingBasis:
    """MRT beam plus null-space AN basis for main channel ``h``.

    Eigenvectors of ``Q`` are sorted by decreasing eigenvalue.  Each one is
    rotated so its largest-magnitude entry is real and positive.
    """
    h = np.array(h, dtype=complex).reshape(-1)
    n = h.shape[0]
    if n < 2:
        raise DegenerateChannelError("a single antenna leaves no null space for artificial noise")
    norm = np.linalg.norm(h)
    if not norm > 0:
        raise DegenerateChannelError("main channel is identically zero")
    v_info = h.conj() / norm
    V_N = householder_complement(v_info)
    Q = V_N.conj().T @ corr.matrix @ V_N
    Q = 0.5 * (Q + Q.conj().T)
    theta, W = np.linalg.eigh(Q)
    order = np.argsort(-theta, kind="stable")
    theta = theta[order]
    W = np.column_stack([_fix_phase(W[:, j]) for j in order])
    for arr in (h, v_info, V_N, Q, W, theta):
        arr.setflags(write=False)
    return BeamformingBasis(h, corr, v_info, V_N, Q, W, theta)


def effective_gains(g, basis: BeamformingBasis):
    """Return ``(g v_I, g V_N)`` for a row ``g`` or a stack of rows."""
    g = np.asarray(g, dtype=complex)
    return g @ basis.v_info, g @ basis.null_basis
