"""Monte Carlo estimation of gradient moments over random circuits.

Sampling is organized in fixed-size chunks: chunk ``i`` always covers the same
sample indices and draws from substream ``i`` of the seed, so an estimate is a
pure function of (family, n_samples, seed).  Chunks may be evaluated on a
thread pool; partial sums are merged with ``math.fsum`` (exact for doubles),
making the result bitwise independent of scheduling.  Within a chunk numpy's
pairwise summation keeps the tiny, cancellation-prone plateau-regime moments
accurate.

Families bundle an experiment instance with its vectorized gradient sampler:

* ``ToyGradientFamily`` draws uniform angle vectors;
* ``CompilingGradientFamily`` / ``MeasurementGradientFamily`` draw independent
  Haar pairs (O_minus, O_plus) and evaluate the analytic overlap gradient;
* ``QuadraticGradientFamily`` draws a single Haar O_minus per sample.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .phase_space import MeanVector, as_mean_vector
from .sampling import RandomSource, as_source, haar_orthogonal_batch, uniform_angles_batch
from .validation import check_same_modes, check_skew_symmetric, check_symmetric, modes_of

CHUNK_SIZE = 4096
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class MomentEstimate:
    """First and second sample moments with their standard errors."""

    n_samples: int
    mean: float
    second_moment: float
    std_error_mean: float
    std_error_second: float
    seed: int

    def as_dict(self) -> dict:
        """JSON-ready record of all fields (consumed by the CLI writers)."""
        return {
            "n_samples": self.n_samples,
            "mean": self.mean,
            "second_moment": self.second_moment,
            "std_error_mean": self.std_error_mean,
            "std_error_second": self.std_error_second,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TailEstimate:
    """Empirical tail frequency P(|dC| >= epsilon) with binomial standard error."""

    n_samples: int
    epsilon: float
    fraction: float
    std_error: float
    seed: int

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "epsilon": self.epsilon,
            "fraction": self.fraction,
            "std_error": self.std_error,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class ToyGradientFamily:
    """Local phase-shifter bank: gradient of the toy cost w.r.t. the first angle."""

    m: int
    s: float

    name = "toy"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"mode count must be >= 1, got {self.m}")
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")

    def sample_gradients(self, size: int, rng: np.random.Generator) -> np.ndarray:
        theta = uniform_angles_batch(self.m, size, rng)
        return self.s * np.sin(theta[:, 0]) * np.exp(
            self.s * (np.cos(theta).sum(axis=1) - self.m)
        )


@dataclass(frozen=True, eq=False)
class MeasurementGradientFamily:
    """Overlap cost against a fixed target mean, Haar (O_minus, O_plus) pairs."""

    u: MeanVector
    n: MeanVector
    d: np.ndarray

    name = "measurement"

    def __post_init__(self):
        u = as_mean_vector(self.u)
        n = as_mean_vector(self.n)
        check_same_modes(u.m, n.m, "state and target")
        d = check_skew_symmetric(self.d, "d")
        check_same_modes(u.m, modes_of(d, "d"), "state and d")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", d)

    def sample_gradients(self, size: int, rng: np.random.Generator) -> np.ndarray:
        m = self.u.m
        o_minus = haar_orthogonal_batch(m, size, rng)
        o_plus = haar_orthogonal_batch(m, size, rng)
        y = np.einsum("j,njk->nk", self.u.values, o_minus)
        b = np.einsum("j,nkj->nk", self.n.values, o_plus)
        bilinear = np.einsum("ni,ij,nj->n", y, self.d, b)
        dots = np.einsum("ni,ni->n", y, b)
        e_total = self.u.intensity() + self.n.intensity()
        return -np.exp(dots - e_total) * bilinear


def CompilingGradientFamily(u: MeanVector, d) -> MeasurementGradientFamily:
    """Compiling cost = overlap cost with the input state as its own target."""
    u = as_mean_vector(u)
    return MeasurementGradientFamily(u=u, n=u, d=d)


@dataclass(frozen=True, eq=False)
class QuadraticGradientFamily:
    """Quadratic-cost gradient w B w^T with w = u O_minus, Haar O_minus draws."""

    u: MeanVector
    b: np.ndarray

    name = "quadratic"

    def __post_init__(self):
        u = as_mean_vector(self.u)
        b = check_symmetric(self.b, "b")
        check_same_modes(u.m, modes_of(b, "b"), "state and b")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "b", b)

    def sample_gradients(self, size: int, rng: np.random.Generator) -> np.ndarray:
        o_minus = haar_orthogonal_batch(self.u.m, size, rng)
        w = np.einsum("j,njk->nk", self.u.values, o_minus)
        return np.einsum("ni,ij,nj->n", w, self.b, w)


_FAMILIES = {
    "toy": ToyGradientFamily,
    "compiling": CompilingGradientFamily,
    "measurement": MeasurementGradientFamily,
    "quadratic": QuadraticGradientFamily,
}


def make_family(name: str, **params):
    """Build a gradient family by name; raises on an unknown cost family."""
    try:
        builder = _FAMILIES[name]
    except KeyError:
        raise ValueError(
            f"unknown cost family {name!r}; expected one of {sorted(_FAMILIES)}"
        ) from None
    return builder(**params)


# -- chunked engine ---------------------------------------------------------


def _chunks(n_samples: int):
    start = 0
    index = 0
    while start < n_samples:
        size = min(CHUNK_SIZE, n_samples - start)
        yield index, size
        index += 1
        start += size


def _check_family(family):
    if not hasattr(family, "sample_gradients"):
        raise TypeError(
            f"unknown cost family object {type(family).__name__}; "
            "expected one of the gradient families (see make_family)"
        )


def _moment_sums(family, n_samples: int, source: RandomSource, n_jobs: int):
    def one(chunk) -> tuple:
        index, size = chunk
        x = family.sample_gradients(size, source.substream(index))
        x2 = x * x
        return (
            float(np.sum(x)),
            float(np.sum(np.abs(x))),
            float(np.sum(x2)),
            float(np.sum(x2 * x2)),
        )

    parts = _run_chunks(one, n_samples, n_jobs)
    return tuple(math.fsum(col) for col in zip(*parts))


def _run_chunks(fn, n_samples: int, n_jobs: int) -> list:
    chunks = list(_chunks(n_samples))
    if n_jobs <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, chunks))


def _estimate(family, n_samples, rng, n_jobs, use_abs: bool) -> MomentEstimate:
    _check_family(family)
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    source = as_source(rng)
    sum_x, sum_abs, sum_x2, sum_x4 = _moment_sums(family, n_samples, source, n_jobs)
    n = float(n_samples)
    mean = (sum_abs if use_abs else sum_x) / n
    second = sum_x2 / n
    var_mean = max(0.0, second - mean * mean)
    var_second = max(0.0, sum_x4 / n - second * second)
    return MomentEstimate(
        n_samples=n_samples,
        mean=mean,
        second_moment=second,
        std_error_mean=math.sqrt(var_mean / n),
        std_error_second=math.sqrt(var_second / n),
        seed=source.seed,
    )


def estimate_grad_moments(family, n_samples: int, rng, n_jobs: int = 1) -> MomentEstimate:
    """Signed-gradient moments: mean (centered at 0 by symmetry) and second moment."""
    return _estimate(family, n_samples, rng, n_jobs, use_abs=False)


def estimate_abs_grad(family, n_samples: int, rng, n_jobs: int = 1) -> MomentEstimate:
    """Moments of |dC|: mean is the expected gradient magnitude."""
    return _estimate(family, n_samples, rng, n_jobs, use_abs=True)


def tail_frequency(family, epsilon: float, n_samples: int, rng, n_jobs: int = 1) -> TailEstimate:
    """Empirical fraction of samples with |dC| >= epsilon."""
    _check_family(family)
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    source = as_source(rng)

    def one(chunk) -> float:
        index, size = chunk
        x = family.sample_gradients(size, source.substream(index))
        return float(np.count_nonzero(np.abs(x) >= epsilon))

    count = math.fsum(_run_chunks(one, n_samples, n_jobs))
    frac = count / n_samples
    return TailEstimate(
        n_samples=n_samples,
        epsilon=epsilon,
        fraction=frac,
        std_error=math.sqrt(max(0.0, frac * (1.0 - frac)) / n_samples),
        seed=source.seed,
    )
