"""Correlated Rayleigh channel draws for Bob and Eve."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .correlation import CorrelationMatrix
from .errors import DomainError, ValidationError

StreamId = Union[int, Tuple[int, ...]]


@dataclass(frozen=True)
class RandomSource:
    """Deterministic random stream identified by ``(seed, stream)``.

    Each chunk of a stream gets its own generator, derived from
    ``SeedSequence(seed, spawn_key=(*stream, chunk))``.  Work split into
    chunks therefore reproduces bit-for-bit whatever the worker schedule.
    """

    seed: int
    stream: StreamId = 0

    @property
    def key(self) -> Tuple[int, ...]:
        s = self.stream
        return tuple(int(v) for v in s) if isinstance(s, tuple) else (int(s),)

    def child(self, *stream: int) -> "RandomSource":
        return RandomSource(self.seed, self.key + tuple(int(v) for v in stream))

    def generator(self, chunk: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.key + (int(chunk),))
        return np.random.Generator(np.random.PCG64(ss))


def sample_whitened(rng, n_antennas: int, size: Optional[int] = None) -> np.ndarray:
    """Draw i.i.d. CN(0, 1) entries: real and imaginary parts have variance 1/2.

    ``rng`` is a :class:`RandomSource` (chunk 0 is used) or a numpy Generator.
    Returns shape ``(n_antennas,)`` or ``(size, n_antennas)``.
    """
    if isinstance(rng, RandomSource):
        rng = rng.generator(0)
    shape = (n_antennas,) if size is None else (size, n_antennas)
    out = rng.standard_normal(shape + (2,))
    out *= np.sqrt(0.5)
    return out.view(complex)[..., 0]


def correlate(whitened, corr: CorrelationMatrix) -> np.ndarray:
    """Map whitened rows to correlated rows: ``whitened @ sqrt(Lambda) @ U_T^H``."""
    w = np.asarray(whitened, dtype=complex)
    if w.shape[-1] != corr.n_antennas:
        raise ValidationError(
            f"whitened vector has length {w.shape[-1]}, correlation is {corr.n_antennas}x{corr.n_antennas}"
        )
    return w @ corr.sqrt_factor


@dataclass(frozen=True)
class ChannelRealization:
    """Whitened and correlated main/eavesdropper channels.

    ``g_s``/``g`` stay ``None`` for a fixed main channel; Eve's channel is
    drawn per Monte Carlo trial instead.
    """

    h_s: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    corr: CorrelationMatrix = field(repr=False)
    g_s: Optional[np.ndarray] = field(default=None, repr=False)
    g: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def gain(self) -> float:
        """``||h||^2``."""
        return float(np.vdot(self.h, self.h).real)


def fixed_main_channel(h_s, corr: CorrelationMatrix) -> ChannelRealization:
    """Hold a main channel realization fixed for a conditioned experiment."""
    hs = np.array(h_s, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(hs)):
        raise DomainError("h_s must be finite")
    h = correlate(hs, corr)
    hs.setflags(write=False)
    h.setflags(write=False)
    return ChannelRealization(hs, h, corr)


def draw_main_channel(source: RandomSource, corr: CorrelationMatrix) -> ChannelRealization:
    """Random main channel for experiments averaged over ``h``."""
    return fixed_main_channel(sample_whitened(source, corr.n_antennas), corr)
