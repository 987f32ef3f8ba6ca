"""Shared oracles and helpers for the test suite.

The oracles here are deliberately independent of the package internals:
plain truncated power series, quadrature, brute-force matrix products and
central finite differences.  Tests compare package outputs against these.
"""

import math

import numpy as np

from linopt_bp import cost_functions as cf


def series_bessel_i(nu: int, x: float, terms: int = 30) -> float:
    """Truncated power-series oracle for I_nu(x) in linear scale."""
    total = 0.0
    for k in range(terms):
        total += (x / 2.0) ** (nu + 2 * k) / (
            math.factorial(k) * math.gamma(nu + k + 1)
        )
    return total


def log_gamma_recursion(x: float) -> float:
    """log Gamma via the recursion Gamma(x+1) = x Gamma(x) from 0 < x <= 1.

    Anchored at Gamma(1) = 1 and Gamma(0.5) = sqrt(pi).
    """
    log_val = 0.0
    while x > 1.0:
        x -= 1.0
        log_val += math.log(x)
    if abs(x - 1.0) < 1e-15:
        return log_val
    if abs(x - 0.5) < 1e-15:
        return log_val + 0.5 * math.log(math.pi)
    raise ValueError("oracle only anchored at integer and half-integer points")


def simpson(fn, lo: float, hi: float, n: int = 4001) -> float:
    """Composite Simpson quadrature on an odd-length uniform grid."""
    if n % 2 == 0:
        n += 1
    xs = np.linspace(lo, hi, n)
    ys = np.array([fn(x) for x in xs])
    h = (hi - lo) / (n - 1)
    return float(h / 3.0 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-2:2].sum()))


def circuit_cost(circuit, theta, family: str, u, hamiltonian=None, target=None) -> float:
    """Cost of the fully composed circuit at explicit parameters."""
    total = circuit.orthogonal_action(theta)
    eye = np.eye(2 * circuit.m)
    if family == "compiling":
        return cf.measurement_cost(u, u if target is None else target, eye, total)
    if family == "quadratic":
        return cf.quadratic_cost(u, hamiltonian, eye, total)
    raise ValueError(family)


def fd_gradient(circuit, layer: int, family: str, u, hamiltonian=None,
                target=None, step: float = 1e-5) -> float:
    """Central finite difference of the circuit cost at one layer parameter."""
    theta = np.array(circuit.theta, copy=True)
    plus, minus = theta.copy(), theta.copy()
    plus[layer - 1] += step
    minus[layer - 1] -= step
    c_plus = circuit_cost(circuit, plus, family, u, hamiltonian, target)
    c_minus = circuit_cost(circuit, minus, family, u, hamiltonian, target)
    return (c_plus - c_minus) / (2.0 * step)


def assert_within_sigma(estimate: float, expected: float, std_error: float,
                        n_sigma: float = 3.0, context: str = ""):
    gap = abs(estimate - expected)
    limit = n_sigma * std_error
    assert gap <= limit, (
        f"{context}: |{estimate:.6e} - {expected:.6e}| = {gap:.3e} "
        f"exceeds {n_sigma} sigma = {limit:.3e}"
    )
