"""Generators, gate exponentials and layered circuits of passive linear optics.

A parameterized gate is specified by a symmetric matrix ``eps`` through the
quadratic Hamiltonian ``R eps R^T`` (with ``R = (q1, p1, ..., qm, pm)``).  Its
Heisenberg action on the mean vector is ``u -> u exp(theta D)`` with

    D = -2 eps Delta,

where ``Delta`` is the symplectic form; ``D`` is skew-symmetric exactly when
``eps`` commutes with ``Delta`` (an energy-conserving generator), and then
``exp(theta D)`` is simultaneously orthogonal and symplectic.  The sign is
pinned by the phase-shifter convention: ``exp(-i theta a* a)`` sends a
coherent amplitude ``alpha`` to ``exp(-i theta) alpha``, i.e. the single-mode
transfer matrix is ``[[cos t, -sin t], [sin t, cos t]]``.

A depth-L circuit alternates parameterized gates with fixed orthogonal layers
``W_l``; its total transfer matrix composes left to right in layer order,

    T(theta) = prod_l exp(theta_l D_l) W_l,

and splits at the distinguished layer k as ``T = O_minus O_plus`` with
``O_minus`` covering layers 1..k-1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .sampling import haar_orthogonal
from .validation import (
    as_square_matrix,
    check_mode_index,
    check_orthogonal,
    check_skew_symmetric,
    check_symmetric,
    modes_of,
)

GENERATOR_KINDS = ("phase-shifter", "two-mode-phase", "beamsplitter", "global-phase")


def symplectic_form(m: int) -> np.ndarray:
    """Block-diagonal symplectic form, one [[0,1],[-1,0]] block per mode."""
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * m, 2 * m))
    for j in range(m):
        out[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = block
    return out


@dataclass(frozen=True, eq=False)
class GeneratorPair:
    """A parameterized gate: symmetric Hamiltonian matrix and its transfer generator.

    Invariants (validated on construction): ``eps`` symmetric, ``d`` equal to
    ``-2 eps Delta`` and skew-symmetric, which forces ``[eps, Delta] = 0``.
    """

    d: np.ndarray
    eps: np.ndarray
    label: str

    def __post_init__(self):
        eps = check_symmetric(self.eps, "eps")
        d = check_skew_symmetric(self.d, "d")
        if d.shape != eps.shape:
            raise ValueError("d and eps must have matching shapes")
        m = modes_of(d, "generator")
        expected = -2.0 * eps @ symplectic_form(m)
        if np.abs(d - expected).max(initial=0.0) > 1e-10:
            raise ValueError("d does not match -2 eps Delta for the given eps")
        for arr in (d, eps):
            arr.flags.writeable = False
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "eps", eps)

    @classmethod
    def from_symmetric(cls, eps, label: str = "custom") -> "GeneratorPair":
        """Build the pair from a symmetric eps commuting with the symplectic form."""
        eps = check_symmetric(eps, "eps")
        m = modes_of(eps, "eps")
        d = -2.0 * eps @ symplectic_form(m)
        try:
            check_skew_symmetric(d, "d")
        except ValueError:
            raise ValueError(
                "eps does not commute with the symplectic form; "
                "the gate would not conserve energy"
            ) from None
        return cls(d=d, eps=eps, label=label)

    @property
    def m(self) -> int:
        return self.d.shape[0] // 2


def make_generator(kind: str, modes: Sequence[int], m: int) -> GeneratorPair:
    """Standard gate generators embedded in an m-mode register.

    kinds:
      phase-shifter(j)     eps has a +1/2 identity block on mode j
      two-mode-phase(i,j)  +1/2 block on mode i, -1/2 block on mode j
      beamsplitter(i,j)    mixing generator q_j p_i - q_i p_j
      global-phase         +1/2 identity on every mode (equal column norms)
    """
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    modes = tuple(int(j) for j in modes)
    eps = np.zeros((2 * m, 2 * m))
    if kind == "phase-shifter":
        if len(modes) != 1:
            raise ValueError("phase-shifter takes exactly one mode index")
        (j,) = modes
        check_mode_index(j, m)
        eps[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = 0.5 * np.eye(2)
        label = f"phase-shifter({j})"
    elif kind == "two-mode-phase":
        i, j = _two_distinct(modes, m)
        eps[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = 0.5 * np.eye(2)
        eps[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = -0.5 * np.eye(2)
        label = f"two-mode-phase({i},{j})"
    elif kind == "beamsplitter":
        i, j = _two_distinct(modes, m)
        qi, pi, qj, pj = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
        eps[qj, pi] = eps[pi, qj] = 0.5
        eps[qi, pj] = eps[pj, qi] = -0.5
        label = f"beamsplitter({i},{j})"
    elif kind == "global-phase":
        if modes:
            raise ValueError("global-phase takes no mode indices")
        eps = 0.5 * np.eye(2 * m)
        label = "global-phase"
    else:
        raise ValueError(f"unknown generator kind {kind!r}; expected one of {GENERATOR_KINDS}")
    return GeneratorPair.from_symmetric(eps, label)


def _two_distinct(modes: tuple, m: int) -> tuple:
    if len(modes) != 2:
        raise ValueError("two-mode gates take exactly two mode indices")
    i, j = modes
    check_mode_index(i, m)
    check_mode_index(j, m)
    if i == j:
        raise ValueError(f"mode indices must be distinct, got ({i}, {j})")
    return i, j


def gate_action(gen: GeneratorPair, theta: float) -> np.ndarray:
    """Transfer matrix exp(theta D) of one gate; orthogonal for all theta."""
    theta = float(theta)
    if theta == 0.0:
        return np.eye(gen.d.shape[0])
    return expm(theta * gen.d)


@dataclass(frozen=True, eq=False)
class Layer:
    gen: GeneratorPair
    fixed: np.ndarray  # unparameterized orthogonal layer applied after the gate

    def __post_init__(self):
        fixed = check_orthogonal(self.fixed, "fixed layer")
        if fixed.shape != self.gen.d.shape:
            raise ValueError("fixed layer dimension does not match the gate generator")
        fixed.flags.writeable = False
        object.__setattr__(self, "fixed", fixed)

    def transfer(self, theta: float) -> np.ndarray:
        return gate_action(self.gen, theta) @ self.fixed


class LayeredCircuit:
    """Alternating parameterized gates and fixed orthogonal layers.

    Immutable after construction; evaluation methods are read-only, so one
    circuit can be evaluated concurrently at different parameter vectors.
    """

    def __init__(self, layers: Sequence, theta, split: int = 1):
        built = []
        for entry in layers:
            layer = entry if isinstance(entry, Layer) else Layer(*entry)
            built.append(layer)
        if not built:
            raise ValueError("a circuit needs at least one layer")
        m = built[0].gen.m
        if any(layer.gen.m != m for layer in built):
            raise ValueError("all layers must act on the same number of modes")
        theta = np.array(theta, dtype=float, copy=True).reshape(-1)
        if theta.size != len(built):
            raise ValueError(
                f"theta length {theta.size} does not match depth {len(built)}"
            )
        if not 1 <= int(split) <= len(built):
            raise ValueError(f"split layer {split} out of range 1..{len(built)}")
        theta.flags.writeable = False
        self._layers = tuple(built)
        self._theta = theta
        self._split = int(split)
        self._m = m

    @property
    def layers(self) -> tuple:
        return self._layers

    @property
    def theta(self) -> np.ndarray:
        return self._theta

    @property
    def depth(self) -> int:
        return len(self._layers)

    @property
    def split(self) -> int:
        return self._split

    @property
    def m(self) -> int:
        return self._m

    def with_theta(self, theta) -> "LayeredCircuit":
        return LayeredCircuit(self._layers, theta, self._split)

    def with_split(self, split: int) -> "LayeredCircuit":
        return LayeredCircuit(self._layers, self._theta, split)

    def _check_theta(self, theta) -> np.ndarray:
        if theta is None:
            return self._theta
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.depth:
            raise ValueError(f"theta length {theta.size} does not match depth {self.depth}")
        return theta

    def layer_transfers(self, theta=None) -> list:
        theta = self._check_theta(theta)
        return [layer.transfer(t) for layer, t in zip(self._layers, theta)]

    def orthogonal_action(self, theta=None) -> np.ndarray:
        """Full transfer matrix of the circuit (layers composed in order)."""
        out = np.eye(2 * self._m)
        for transfer in self.layer_transfers(theta):
            out = out @ transfer
        return out

    def split_action(self, theta=None) -> tuple:
        """(O_minus, O_plus): layers before the split layer, and from it on."""
        transfers = self.layer_transfers(theta)
        o_minus = np.eye(2 * self._m)
        for t in transfers[: self._split - 1]:
            o_minus = o_minus @ t
        o_plus = np.eye(2 * self._m)
        for t in transfers[self._split - 1 :]:
            o_plus = o_plus @ t
        return o_minus, o_plus

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        layers = []
        for layer in self._layers:
            kind, modes = _parse_label(layer.gen.label)
            layers.append(
                {
                    "kind": kind,
                    "modes": list(modes),
                    "W": [[float(x) for x in row] for row in layer.fixed],
                }
            )
        return {
            "m": self._m,
            "L": self.depth,
            "k": self._split,
            "layers": layers,
            "theta": [float(t) for t in self._theta],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, doc: dict) -> "LayeredCircuit":
        m = int(doc["m"])
        layers = []
        for entry in doc["layers"]:
            gen = make_generator(entry["kind"], entry["modes"], m)
            fixed = as_square_matrix(entry["W"], "W")
            layers.append(Layer(gen, fixed))
        circuit = cls(layers, doc["theta"], int(doc["k"]))
        if circuit.depth != int(doc["L"]):
            raise ValueError("layer list length does not match the declared depth")
        return circuit

    @classmethod
    def from_json(cls, text: str) -> "LayeredCircuit":
        return cls.from_json_dict(json.loads(text))


def _parse_label(label: str) -> tuple:
    if label == "global-phase":
        return "global-phase", ()
    if "(" not in label or not label.endswith(")"):
        raise ValueError(
            f"cannot serialize a custom generator (label {label!r}); "
            "only the standard kinds round-trip through JSON"
        )
    kind, args = label[:-1].split("(", 1)
    modes = tuple(int(s) for s in args.split(",") if s)
    return kind, modes


def random_circuit(m: int, depth: int, rng, split: int = 1, identity_fixed: bool = False) -> "LayeredCircuit":
    """A circuit with a beamsplitter/phase-shifter gate cycle and random fixed layers.

    Gate pattern: even layers are beamsplitters on adjacent mode pairs, odd
    layers single-mode phase shifters (plain phase shifters throughout when
    m = 1).  Fixed layers are Haar-orthogonal draws frozen at construction,
    or identities when ``identity_fixed`` is set.
    """
    if not isinstance(rng, np.random.Generator):
        from .sampling import as_source

        rng = as_source(rng).generator()
    layers = []
    for idx in range(depth):
        if m == 1:
            gen = make_generator("phase-shifter", (0,), m)
        elif idx % 2 == 0:
            i = (idx // 2) % m
            gen = make_generator("beamsplitter", (i, (i + 1) % m), m)
        else:
            gen = make_generator("phase-shifter", ((idx // 2) % m,), m)
        fixed = np.eye(2 * m) if identity_fixed else haar_orthogonal(m, rng)
        layers.append(Layer(gen, fixed))
    theta = np.zeros(depth)
    return LayeredCircuit(layers, theta, split)
