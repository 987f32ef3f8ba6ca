"""Gradient-descent training of layered circuits.

Plain constant-step descent on all layer parameters, with an optional
halving backoff when a step increases the cost.  Per-layer gradients reuse
the analytic kernels from ``cost_functions`` (each layer takes its turn as
the split layer via prefix/suffix transfer products), so the trainer and the
Monte Carlo estimators evaluate literally the same gradient.

Training traces are plain CSV with columns iteration,cost,grad_norm.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import cost_functions as cf
from .linear_optics import LayeredCircuit
from .phase_space import MeanVector, as_mean_vector

COST_FAMILIES = ("compiling", "quadratic")


@dataclass(frozen=True)
class TrainConfig:
    lr: float
    max_iters: int
    tol: float
    backoff: bool = True
    max_backoffs: int = 40

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"learning rate must be > 0, got {self.lr}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")


@dataclass(frozen=True, eq=False)
class TrainRecord:
    iteration: int
    cost: float
    grad_norm: float
    theta: np.ndarray = field(repr=False)


class NonFiniteCostError(RuntimeError):
    """Cost or gradient became non-finite during training."""

    def __init__(self, iteration: int, theta: np.ndarray):
        super().__init__(
            f"non-finite cost or gradient at iteration {iteration}; "
            f"max |theta| = {np.abs(theta).max():.3e}"
        )
        self.iteration = iteration
        self.theta = np.array(theta, copy=True)


class _Objective:
    """Cost and per-layer analytic gradients for one circuit and input state."""

    def __init__(self, circuit: LayeredCircuit, family: str, u: MeanVector,
                 hamiltonian=None, target=None):
        if family not in COST_FAMILIES:
            raise ValueError(f"unknown cost family {family!r}; expected one of {COST_FAMILIES}")
        self.circuit = circuit
        self.family = family
        self.u = as_mean_vector(u)
        if self.u.m != circuit.m:
            raise ValueError(f"state has {self.u.m} modes but circuit acts on {circuit.m}")
        if family == "quadratic":
            if hamiltonian is None:
                raise ValueError("the quadratic family needs a Hamiltonian")
            self.ham = hamiltonian
        else:
            self.target = as_mean_vector(target) if target is not None else self.u

    def evaluate(self, theta) -> tuple:
        """(cost, gradient vector over all layers) at the given parameters."""
        if not np.all(np.isfinite(theta)):
            raise ValueError("non-finite circuit parameters")
        transfers = self.circuit.layer_transfers(theta)
        depth = len(transfers)
        dim = 2 * self.circuit.m
        prefixes = [np.eye(dim)]
        for t in transfers[:-1]:
            prefixes.append(prefixes[-1] @ t)
        suffixes = [None] * (depth + 1)
        suffixes[depth] = np.eye(dim)
        for idx in range(depth - 1, -1, -1):
            suffixes[idx] = transfers[idx] @ suffixes[idx + 1]
        total = suffixes[0]

        grads = np.empty(depth)
        if self.family == "compiling":
            cost = cf.measurement_cost(self.u, self.target, np.eye(dim), total)
            for idx in range(depth):
                grads[idx] = cf.measurement_grad(
                    self.u, self.target, self.circuit.layers[idx].gen.d,
                    prefixes[idx], suffixes[idx],
                )
        else:
            cost = cf.quadratic_cost(self.u, self.ham, np.eye(dim), total)
            for idx in range(depth):
                grads[idx] = cf.quadratic_grad(
                    self.u, self.circuit.layers[idx].gen, self.ham,
                    prefixes[idx], suffixes[idx],
                )
        return cost, grads


def layer_gradients(circuit: LayeredCircuit, family: str, u: MeanVector,
                    hamiltonian=None, target=None, theta=None) -> np.ndarray:
    """Analytic gradient of the chosen cost with respect to every layer parameter."""
    objective = _Objective(circuit, family, u, hamiltonian, target)
    _, grads = objective.evaluate(circuit.theta if theta is None else theta)
    return grads


def train(circuit: LayeredCircuit, cost_family: str, u: MeanVector,
          config: TrainConfig, hamiltonian=None, target=None) -> list:
    """Gradient descent from the circuit's current parameters.

    Returns one TrainRecord per accepted iterate (including the starting
    point); stops when the gradient norm drops to ``config.tol`` or after
    ``config.max_iters`` steps.  Raises NonFiniteCostError if the cost or
    gradient leaves the representable range.
    """
    objective = _Objective(circuit, cost_family, u, hamiltonian, target)
    theta = np.array(circuit.theta, copy=True)
    cost, grads = _safe_evaluate(objective, theta, 0)
    records = [TrainRecord(0, cost, float(np.linalg.norm(grads)), theta.copy())]

    lr = config.lr
    backoffs = 0
    iteration = 0
    while iteration < config.max_iters and records[-1].grad_norm > config.tol:
        candidate = theta - lr * grads
        new_cost, new_grads = _safe_evaluate(objective, candidate, iteration + 1)
        if config.backoff and new_cost > cost and backoffs < config.max_backoffs:
            lr *= 0.5
            backoffs += 1
            continue
        theta, cost, grads = candidate, new_cost, new_grads
        iteration += 1
        records.append(TrainRecord(iteration, cost, float(np.linalg.norm(grads)), theta.copy()))
    return records


def _safe_evaluate(objective, theta, iteration) -> tuple:
    try:
        cost, grads = objective.evaluate(theta)
    except (ValueError, FloatingPointError) as exc:
        raise NonFiniteCostError(iteration, theta) from exc
    if not np.isfinite(cost) or not np.all(np.isfinite(grads)):
        raise NonFiniteCostError(iteration, theta)
    return cost, grads


def write_trace_csv(records, path) -> None:
    """Write a training trace as iteration,cost,grad_norm rows."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["iteration", "cost", "grad_norm"])
        for rec in records:
            writer.writerow([rec.iteration, repr(rec.cost), repr(rec.grad_norm)])
