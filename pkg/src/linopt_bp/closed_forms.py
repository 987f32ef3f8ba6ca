"""Closed-form gradient-moment predictions and the trainability classifier.

For the compiling/measurement family the second moment of the split-layer
gradient over independent Haar pairs (O_minus, O_plus) is, exactly,

    E[(dC)^2] = pref(m, E) * |D_k|_F^2 / (2m),
    pref(m, E) = exp(-4E) Gamma(m) I_m(4E) / (2 (2E)^(m-2)),

obtained by evaluating the underlying sphere integral in polar coordinates
(the skew symmetry of D_k kills the polar-axis coordinate, leaving an
I_m kernel).  Since the mean squared column norm lies between the extreme
squared column norms xi_min and xi_max, the moment always falls inside
``pref * [xi_min, xi_max]``, collapsing to a point prediction for generators
with equal column norms.

A looser variant replaces the kernel with

    pref_upper(m, E) = exp(-4E) Gamma(m) I_{m-1}(4E) / (2m (2E)^(m-3)),

which distributes the column mass uniformly over all 2m polar slots including
the axis one.  It upper-bounds the sharp prefactor (ratio
``(2E/m) I_{m-1}(4E)/I_m(4E) >= 1``), converges to it as E -> 0, and decays at
the same exponential rate in m, so either form supports the regime analysis;
Monte Carlo agrees with the sharp form.

The unequal-intensity (heterodyne) generalization substitutes
``exp(-2(E0+E1))`` and argument ``4 sqrt(E0 E1)``.

For the quadratic family the second moment over O_minus is exactly

    |u|^4 (tr B^2 + |B|_F^2) / (2m (2m+2)).

Regime classification fits the log of the closed-form moment against the mode
count with basis {1, m, sqrt(m), log m} and declares a barren plateau when
the coefficient of m falls below ``SLOPE_THRESHOLD``; for intensities scaling
linearly, E = a(m-1), that coefficient approaches the closed-form rate

    rate(a) = -(4a + 1 - sqrt(16a^2+1)) + log(2 / (1 + sqrt(16a^2+1))).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .phase_space import MeanVector, as_mean_vector
from .special_functions import LogScaled, bessel_i, log_gamma
from .validation import check_skew_symmetric, check_symmetric, modes_of

SLOPE_THRESHOLD = -0.05  # nats per mode; below this the fitted decay is a plateau

__all__ = [
    "MomentInterval",
    "xi_bounds",
    "second_moment_prefactor",
    "second_moment_prefactor_upper",
    "second_moment_point",
    "second_moment_interval",
    "heterodyne_prefactor",
    "heterodyne_prefactor_upper",
    "quadratic_second_moment",
    "chebyshev_bound",
    "linear_intensity_rate",
    "intensity_law",
    "DecayFit",
    "RegimeVerdict",
    "fit_decay",
    "fit_linear_rate",
    "classify_regime",
    "classify_noise",
    "SLOPE_THRESHOLD",
]


@dataclass(frozen=True)
class MomentInterval:
    """Endpoints (log scale) bracketing a gradient second moment."""

    lo: LogScaled
    hi: LogScaled

    def __post_init__(self):
        if self.lo.log_value > self.hi.log_value + 1e-12:
            raise ValueError("interval endpoints are out of order")

    @property
    def is_point(self) -> bool:
        if math.isinf(self.lo.log_value) and math.isinf(self.hi.log_value):
            return True
        return abs(self.hi.log_value - self.lo.log_value) <= 1e-12

    @property
    def point(self) -> LogScaled:
        if not self.is_point:
            raise ValueError("interval has not collapsed to a point")
        return self.lo


def xi_bounds(d_k) -> tuple:
    """Extreme squared column norms (xi_min, xi_max) of a gate generator."""
    d_k = check_skew_symmetric(d_k, "d_k")
    norms = np.sum(d_k * d_k, axis=0)
    return float(norms.min()), float(norms.max())


def _kernel(m: int, half_arg: float, exp_term: float, sharp: bool) -> LogScaled:
    """Common log-scale prefactor assembly for both overlap-family variants.

    ``half_arg`` is 2E (equal intensities) or 2 sqrt(E0 E1); the Bessel
    argument is twice that.
    """
    log_arg = math.log(half_arg)
    if sharp:
        log_val = (
            exp_term
            + log_gamma(m)
            + bessel_i(m, 2.0 * half_arg).log_value
            - math.log(2.0)
            - (m - 2) * log_arg
        )
    else:
        log_val = (
            exp_term
            + log_gamma(m)
            + bessel_i(m - 1, 2.0 * half_arg).log_value
            - math.log(2.0 * m)
            - (m - 3) * log_arg
        )
    return LogScaled(log_val)


def second_moment_prefactor(m: int, energy: float) -> LogScaled:
    """Sharp prefactor exp(-4E) Gamma(m) I_m(4E) / (2 (2E)^(m-2))."""
    _check_me(m, energy)
    if energy == 0.0:
        return LogScaled(-math.inf)
    return _kernel(m, 2.0 * energy, -4.0 * energy, sharp=True)


def second_moment_prefactor_upper(m: int, energy: float) -> LogScaled:
    """Loose prefactor exp(-4E) Gamma(m) I_{m-1}(4E) / (2m (2E)^(m-3)).

    Upper-bounds the sharp prefactor with the same exponential decay rate and
    coincides with it in the E -> 0 limit.
    """
    _check_me(m, energy)
    if energy == 0.0:
        return LogScaled(-math.inf)
    return _kernel(m, 2.0 * energy, -4.0 * energy, sharp=False)


def second_moment_point(m: int, energy: float, d_k) -> LogScaled:
    """Exact second moment of the split-layer gradient: pref * |D_k|_F^2/(2m)."""
    d_k = check_skew_symmetric(d_k, "d_k")
    mean_sq = float(np.sum(d_k * d_k)) / (2 * m)
    return second_moment_prefactor(m, energy).scaled(mean_sq)


def second_moment_interval(m: int, energy: float, d_k, sharp: bool = True) -> MomentInterval:
    """Prefactor times [xi_min, xi_max]; a point when column norms are equal."""
    lo_xi, hi_xi = xi_bounds(d_k)
    pref = (
        second_moment_prefactor(m, energy)
        if sharp
        else second_moment_prefactor_upper(m, energy)
    )
    return MomentInterval(pref.scaled(lo_xi), pref.scaled(hi_xi))


def heterodyne_prefactor(m: int, e0: float, e1: float) -> LogScaled:
    """Sharp unequal-intensity prefactor; equals the equal-intensity one at e0 = e1.

    At e0 = 0 or e1 = 0 the cost is circuit-independent and the moment is an
    exact zero (log -inf).
    """
    _check_me(m, e0, "e0")
    _check_me(m, e1, "e1")
    if e0 == 0.0 or e1 == 0.0:
        return LogScaled(-math.inf)
    geo = math.sqrt(e0 * e1)
    return _kernel(m, 2.0 * geo, -2.0 * (e0 + e1), sharp=True)


def heterodyne_prefactor_upper(m: int, e0: float, e1: float) -> LogScaled:
    """Loose unequal-intensity prefactor (same caveats as the equal-intensity one)."""
    _check_me(m, e0, "e0")
    _check_me(m, e1, "e1")
    if e0 == 0.0 or e1 == 0.0:
        return LogScaled(-math.inf)
    geo = math.sqrt(e0 * e1)
    return _kernel(m, 2.0 * geo, -2.0 * (e0 + e1), sharp=False)


def quadratic_second_moment(u: MeanVector, b_k) -> float:
    """Second moment |u|^4 (tr B^2 + |B|_F^2) / (2m (2m+2)) of w B w^T.

    Requires tr B = 0 (guaranteed for energy-conserving gate generators);
    both algebraic forms of the numerator are evaluated and must agree.
    """
    u = as_mean_vector(u)
    b_k = check_symmetric(b_k, "b_k")
    m = modes_of(b_k, "b_k")
    if u.m != m:
        raise ValueError(f"state has {u.m} modes but b_k acts on {m}")
    fro_sq = float(np.sum(b_k * b_k))
    scale = max(1.0, fro_sq)
    trace = float(np.trace(b_k))
    if abs(trace) > 1e-8 * math.sqrt(scale):
        raise ValueError(f"b_k must be traceless, got trace {trace:.3e}")
    tr_b2 = float(np.trace(b_k @ b_k))
    both = tr_b2 + fro_sq
    if abs(both - 2.0 * fro_sq) > 1e-10 * scale:
        raise ValueError("tr B^2 and |B|_F^2 disagree; b_k is not symmetric enough")
    return u.norm**4 * both / (2 * m * (2 * m + 2))


def chebyshev_bound(moment: float, order: int, epsilon: float) -> float:
    """Tail bound P(|dC| >= eps) <= moment / eps^order, clamped to [0, 1]."""
    if moment < 0:
        raise ValueError(f"moment must be >= 0, got {moment}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return min(1.0, moment / epsilon**order)


def linear_intensity_rate(a: float) -> float:
    """Per-mode log decay rate of the moment prefactor when E = a(m-1).

    rate(a) = -(4a + 1 - sqrt(16a^2+1)) + log(2 / (1 + sqrt(16a^2+1))) < 0.
    """
    if a <= 0:
        raise ValueError(f"a must be > 0, got {a}")
    root = math.sqrt(16.0 * a * a + 1.0)
    return -(4.0 * a + 1.0 - root) + math.log(2.0 / (1.0 + root))


def _check_me(m: int, energy: float, name: str = "energy") -> None:
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    if energy < 0:
        raise ValueError(f"{name} must be >= 0, got {energy}")


# -- intensity-law grammar --------------------------------------------------

_LAW_RE = re.compile(r"^(constant|power|linear|expdecay|logpower):([-\d.,eE+]+)$")


def intensity_law(spec) -> Callable[[np.ndarray], np.ndarray]:
    """Parse an intensity scaling law into a vectorized function of m.

    Grammar: ``constant:E`` | ``power:a,r`` (E = a m^r) | ``linear:a`` |
    ``expdecay:a,b`` (E = a b^-m) | ``logpower:a,r`` (E = a log(m) m^r).
    Callables pass through unchanged.
    """
    if callable(spec):
        return spec
    match = _LAW_RE.match(str(spec).strip())
    if not match:
        raise ValueError(
            f"cannot parse intensity law {spec!r}; expected constant:E, power:a,r, "
            "linear:a, expdecay:a,b or logpower:a,r"
        )
    name, arg_text = match.groups()
    args = [float(s) for s in arg_text.split(",")]

    def _nargs(n):
        if len(args) != n:
            raise ValueError(f"law {name!r} takes {n} parameter(s), got {len(args)}")

    if name == "constant":
        _nargs(1)
        return lambda m: np.full_like(np.asarray(m, dtype=float), args[0])
    if name == "linear":
        _nargs(1)
        return lambda m: args[0] * np.asarray(m, dtype=float)
    if name == "power":
        _nargs(2)
        return lambda m: args[0] * np.asarray(m, dtype=float) ** args[1]
    if name == "expdecay":
        _nargs(2)
        if args[1] <= 1.0:
            raise ValueError(f"expdecay base must be > 1, got {args[1]}")
        return lambda m: args[0] * args[1] ** (-np.asarray(m, dtype=float))
    _nargs(2)
    return lambda m: args[0] * np.log(np.asarray(m, dtype=float)) * np.asarray(m, dtype=float) ** args[1]


# -- decay fitting and classification ---------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log-moment values against the mode count."""

    m_grid: tuple
    log_values: tuple
    coefficients: dict
    slope: float  # coefficient of the linear-in-m basis function
    residual_rms: float


@dataclass(frozen=True)
class RegimeVerdict:
    verdict: str  # "BPL" or "trainable"
    fit: DecayFit

    @property
    def is_bpl(self) -> bool:
        return self.verdict == "BPL"


_DEFAULT_BASIS = ("const", "m", "sqrt_m", "log_m")
_BASIS_FUNCS = {
    "const": lambda m: np.ones_like(m),
    "m": lambda m: m,
    "sqrt_m": lambda m: np.sqrt(m),
    "log_m": lambda m: np.log(m),
    "inv_m": lambda m: 1.0 / m,
}


def fit_decay(m_grid, log_values, basis: Sequence[str] = _DEFAULT_BASIS) -> DecayFit:
    """Fit log_values ~ sum_f c_f f(m) and report the coefficient of m.

    Requires at least 6 grid points; raises on a degenerate (constant) series
    or on non-finite values.
    """
    m_arr = np.asarray(m_grid, dtype=float)
    vals = np.asarray(log_values, dtype=float)
    if m_arr.ndim != 1 or m_arr.size < 6:
        raise ValueError(f"need an ascending grid of at least 6 mode counts, got {m_arr.size}")
    if np.any(np.diff(m_arr) <= 0):
        raise ValueError("mode grid must be strictly ascending")
    if vals.shape != m_arr.shape:
        raise ValueError("log_values must match the grid length")
    if not np.all(np.isfinite(vals)):
        raise ValueError("log moment values must be finite for fitting")
    if float(vals.max() - vals.min()) < 1e-12:
        raise ValueError("degenerate fit: all moment values are equal")
    if "m" not in basis:
        raise ValueError("basis must include the linear term 'm'")
    design = np.column_stack([_BASIS_FUNCS[name](m_arr) for name in basis])
    coeffs, _, _, _ = np.linalg.lstsq(design, vals, rcond=None)
    resid = vals - design @ coeffs
    return DecayFit(
        m_grid=tuple(float(x) for x in m_arr),
        log_values=tuple(float(x) for x in vals),
        coefficients={name: float(c) for name, c in zip(basis, coeffs)},
        slope=float(coeffs[list(basis).index("m")]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def fit_linear_rate(m_grid, log_values) -> float:
    """Exponential decay rate of a linear-intensity moment curve.

    Uses the {1, m, log m, 1/m} basis, matching the known correction structure
    of the closed form, so the m coefficient isolates the exponential rate.
    """
    return fit_decay(m_grid, log_values, basis=("const", "m", "log_m", "inv_m")).slope


def classify_regime(law, m_grid, xi: float = 1.0) -> RegimeVerdict:
    """Classify an intensity scaling law as plateau-forming or trainable.

    Evaluates the sharp closed-form moment lower end ``xi * pref(m, E(m))``
    over the grid (default xi = 1, the equal-column-norm full-rank rotation
    generator, for which the lower end is the point value), fits the decay
    and compares the linear slope against ``SLOPE_THRESHOLD``.
    """
    law_fn = intensity_law(law)
    m_arr = np.asarray(m_grid, dtype=int)
    energies = np.asarray(law_fn(np.asarray(m_arr, dtype=float)), dtype=float)
    logs = [
        second_moment_prefactor(int(m), float(e)).scaled(xi).log_value
        for m, e in zip(m_arr, energies)
    ]
    return _verdict_from_logs(m_arr, logs)


def classify_noise(e0_law, k: float, layers_law, m_grid, xi: float = 1.0) -> RegimeVerdict:
    """Classify an attenuation scenario: E1 = k^(2 L(m)) E0(m).

    ``layers_law`` maps the mode count to the number of attenuation layers
    (an integer-valued callable, e.g. ``lambda m: m``).
    """
    from .cost_functions import attenuated_intensity

    e0_fn = intensity_law(e0_law)
    m_arr = np.asarray(m_grid, dtype=int)
    logs = []
    for m in m_arr:
        e0 = float(e0_fn(np.asarray(float(m))))
        n_layers = int(layers_law(int(m)))
        e1 = attenuated_intensity(e0, k, n_layers)
        logs.append(heterodyne_prefactor(int(m), e0, e1).scaled(xi).log_value)
    return _verdict_from_logs(m_arr, logs)


def _verdict_from_logs(m_arr, logs) -> RegimeVerdict:
    fit = fit_decay(np.asarray(m_arr, dtype=float), np.asarray(logs, dtype=float))
    verdict = "BPL" if fit.slope <= SLOPE_THRESHOLD else "trainable"
    return RegimeVerdict(verdict=verdict, fit=fit)
