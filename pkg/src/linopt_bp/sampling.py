"""Reproducible random sources for the Monte Carlo experiments.

Randomness is always derived from a :class:`RandomSource`, a 64-bit seed
wrapped around numpy's counter-based Philox generator.  Chunked estimators
draw chunk ``i`` from the substream keyed by ``SeedSequence(seed,
spawn_key=(i,))``, so a result depends only on (seed, chunk layout) and not on
whether chunks ran serially or in parallel.  Identical seeds give bitwise
identical sample streams.

Haar sampling on O(2m) uses the QR decomposition of a standard Gaussian
matrix with the sign of the triangular factor's diagonal fixed to be
positive; without the sign fix QR output is not Haar distributed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phase_space import MeanVector

ALGORITHM = "philox4x64"


@dataclass(frozen=True)
class RandomSource:
    """Seeded, replayable randomness with independent numbered substreams."""

    seed: int
    algorithm: str = ALGORITHM

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.algorithm != ALGORITHM:
            raise ValueError(f"unsupported generator algorithm {self.algorithm!r}")
        object.__setattr__(self, "seed", int(self.seed))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(self.seed)))

    def substream(self, index: int) -> np.random.Generator:
        if index < 0:
            raise ValueError(f"substream index must be >= 0, got {index}")
        seq = np.random.SeedSequence(self.seed, spawn_key=(int(index),))
        return np.random.Generator(np.random.Philox(seq))


def as_source(rng) -> RandomSource:
    if isinstance(rng, RandomSource):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RandomSource(int(rng))
    raise TypeError(f"expected RandomSource or integer seed, got {type(rng).__name__}")


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return as_source(rng).generator()


def haar_orthogonal_batch(m: int, size: int, rng) -> np.ndarray:
    """Stack of ``size`` independent Haar draws from O(2m), shape (size, 2m, 2m)."""
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    gen = _as_generator(rng)
    g = gen.standard_normal((size, 2 * m, 2 * m))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.einsum("...ii->...i", r))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


def haar_orthogonal(m: int, rng) -> np.ndarray:
    """One Haar-distributed matrix from O(2m)."""
    return haar_orthogonal_batch(m, 1, rng)[0]


def uniform_sphere_batch(m: int, radius: float, size: int, rng) -> np.ndarray:
    """Rows uniform on the (2m-1)-sphere of the given radius, shape (size, 2m)."""
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    gen = _as_generator(rng)
    if radius == 0.0:
        return np.zeros((size, 2 * m))
    g = gen.standard_normal((size, 2 * m))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms < 1e-12):  # essentially unreachable; keeps radius exact
        bad = norms < 1e-12
        g[bad] = gen.standard_normal((int(bad.sum()), 2 * m))
        norms = np.linalg.norm(g, axis=1)
    return g * (radius / norms)[:, None]


def uniform_sphere(m: int, radius: float, rng) -> MeanVector:
    """A mean vector drawn uniformly from the sphere of the given radius."""
    return MeanVector(uniform_sphere_batch(m, radius, 1, rng)[0])


def uniform_angles_batch(m: int, size: int, rng) -> np.ndarray:
    """(size, m) array of i.i.d. angles uniform on [-pi, pi]."""
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    gen = _as_generator(rng)
    return gen.uniform(-np.pi, np.pi, (size, m))


def uniform_angles(m: int, rng) -> np.ndarray:
    return uniform_angles_batch(m, 1, rng)[0]
