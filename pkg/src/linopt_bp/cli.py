"""Command-line front end: closed-form vs Monte Carlo experiments as CSV/JSON.

Subcommands
-----------
toy         expected |gradient| of the local phase-shifter bank: closed form
            vs Monte Carlo over uniform angles
prop1       compiling-cost gradient second moment: sharp interval prediction
            vs Monte Carlo over Haar (O_minus, O_plus) pairs
prop2       quadratic-cost gradient second moment: closed form vs Monte Carlo
heterodyne  unequal-intensity moment prefactor (optionally vs Monte Carlo)
noise       attenuation sweep E1 = k^(2L(m)) E0(m) with regime verdict
regimes     intensity-law sweep with regime verdict
train       gradient-descent run emitting an iteration,cost,grad_norm trace

Every output file embeds the schema string, the full config (JSON) and the
seed as preamble records, so any file can be reproduced exactly from its own
header.  Exit codes: 0 success, 2 configuration error, 3 numerical failure.
The default output directory is taken from LINOPT_BP_OUTDIR when set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import closed_forms as cforms
from . import cost_functions as cf
from . import estimators as est
from . import trainer as tr
from .linear_optics import make_generator, random_circuit
from .phase_space import MeanVector
from .sampling import RandomSource, haar_orthogonal, uniform_sphere

SCHEMA = "linopt-bp/1"
ENV_OUTDIR = "LINOPT_BP_OUTDIR"
INSTANCE_STREAM = 2**32  # substream index reserved for instance construction

COMMANDS = ("toy", "prop1", "prop2", "heterodyne", "noise", "regimes", "train")


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


class NumericalError(RuntimeError):
    """A result left the representable range."""


# -- option schema -----------------------------------------------------------

_COMMON = {
    "seed": 0,
    "format": "csv",
    "output": None,
    "jobs": 1,
}

_DEFAULTS = {
    "toy": {**_COMMON, "m": 5, "s": 0.5, "samples": 100_000},
    "prop1": {
        **_COMMON,
        "m": 3,
        "intensity": 1.0,
        "samples": 100_000,
        "generator": "global-phase",
        "modes": None,
    },
    "prop2": {**_COMMON, "m": 2, "intensity": 1.0, "samples": 100_000},
    "heterodyne": {**_COMMON, "m": 4, "e0": 1.0, "e1": 0.5, "samples": 0},
    "noise": {
        **_COMMON,
        "m_grid": "4:64:4",
        "e0_law": "power:1,0.5",
        "k": 0.9,
        "layers_law": "linear:1",
    },
    "regimes": {**_COMMON, "m_grid": "4:64:4", "law": None, "a": None, "r": None, "b": None},
    "train": {
        **_COMMON,
        "m": 2,
        "layers": 4,
        "intensity": 0.5,
        "lr": 1.0,
        "max_iters": 2000,
        "tol": 1e-8,
        "family": "compiling",
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linopt-bp",
        description="Trainability experiments for random linear-optical circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, help="64-bit seed recorded in the output")
        p.add_argument("--format", choices=["csv", "json"], help="output format")
        p.add_argument("--output", "-o", help="output file path")
        p.add_argument("--jobs", type=int, help="parallel chunk workers")
        p.add_argument("--config", help="JSON config file; explicit flags override it")

    p = sub.add_parser("toy", help="toy-model |gradient| vs closed form")
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=float, help="squared single-mode mean norm u1^2+u2^2")
    p.add_argument("--samples", type=int)
    add_common(p)

    p = sub.add_parser("prop1", help="compiling gradient second moment vs closed form")
    p.add_argument("--m", type=int)
    p.add_argument("--intensity", type=float, help="total input intensity E")
    p.add_argument("--samples", type=int)
    p.add_argument("--generator", choices=["global-phase", "phase-shifter", "two-mode-phase", "beamsplitter"])
    p.add_argument("--modes", type=int, nargs="*", help="mode indices for the generator")
    add_common(p)

    p = sub.add_parser("prop2", help="quadratic gradient second moment vs closed form")
    p.add_argument("--m", type=int)
    p.add_argument("--intensity", type=float)
    p.add_argument("--samples", type=int)
    add_common(p)

    p = sub.add_parser("heterodyne", help="unequal-intensity moment prefactor")
    p.add_argument("--m", type=int)
    p.add_argument("--e0", type=float)
    p.add_argument("--e1", type=float)
    p.add_argument("--samples", type=int, help="0 for closed form only")
    add_common(p)

    p = sub.add_parser("noise", help="attenuation sweep with regime verdict")
    p.add_argument("--m-grid", dest="m_grid")
    p.add_argument("--e0-law", dest="e0_law", help="intensity law for E0, e.g. power:1,0.5")
    p.add_argument("--k", type=float, help="attenuation factor in (0,1)")
    p.add_argument("--layers-law", dest="layers_law", help="linear:a | sqrt | const:L")
    add_common(p)

    p = sub.add_parser("regimes", help="intensity-law sweep with regime verdict")
    p.add_argument("--m-grid", dest="m_grid")
    p.add_argument("--law", help="law name or full grammar string, e.g. linear:1")
    p.add_argument("--a", type=float, help="first law parameter")
    p.add_argument("--r", type=float, help="exponent for power/logpower laws")
    p.add_argument("--b", type=float, help="base for the expdecay law")
    add_common(p)

    p = sub.add_parser("train", help="gradient-descent training trace")
    p.add_argument("--m", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--intensity", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--family", choices=list(tr.COST_FAMILIES))
    add_common(p)

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    command = args.command
    cfg = dict(_DEFAULTS[command])
    cfg["command"] = command
    file_path = getattr(args, "config", None)
    if file_path:
        try:
            with open(file_path) as handle:
                loaded = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {file_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config: file must contain a JSON object")
        loaded.pop("command", None)
        for key, value in loaded.items():
            if key not in cfg:
                raise ConfigError(f"config: unknown field {key!r} for command {command!r}")
            cfg[key] = value
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    return cfg


# -- small validators ---------------------------------------------------------


def _need(cfg, field, kind, low=None, high=None):
    value = cfg.get(field)
    if value is None:
        raise ConfigError(f"{field}: required")
    try:
        value = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}: expected {kind.__name__}, got {cfg[field]!r}") from None
    if low is not None and value < low:
        raise ConfigError(f"{field}: must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ConfigError(f"{field}: must be <= {high}, got {value}")
    cfg[field] = value
    return value


def _parse_m_grid(text) -> list:
    try:
        parts = [int(s) for s in str(text).split(":")]
    except ValueError:
        raise ConfigError(f"m_grid: cannot parse {text!r}; expected start:stop[:step]") from None
    if len(parts) == 2:
        start, stop, step = parts[0], parts[1], 1
    elif len(parts) == 3:
        start, stop, step = parts
    else:
        raise ConfigError(f"m_grid: cannot parse {text!r}; expected start:stop[:step]")
    if start < 1 or stop < start or step < 1:
        raise ConfigError(f"m_grid: invalid range {text!r}")
    grid = list(range(start, stop + 1, step))
    if len(grid) < 6:
        raise ConfigError(f"m_grid: need at least 6 points, got {len(grid)}")
    return grid


def _law_string(cfg) -> str:
    law = cfg.get("law")
    if law is None:
        raise ConfigError("law: required")
    law = str(law)
    if ":" in law:  # full grammar string, including list:E1,E2,...
        return law
    a, r, b = cfg.get("a"), cfg.get("r"), cfg.get("b")
    if law in ("constant", "linear"):
        if a is None:
            raise ConfigError(f"a: required for law {law!r}")
        return f"{law}:{a}"
    if law in ("power", "logpower"):
        if a is None or r is None:
            raise ConfigError(f"a, r: required for law {law!r}")
        return f"{law}:{a},{r}"
    if law == "expdecay":
        if a is None or b is None:
            raise ConfigError(f"a, b: required for law {law!r}")
        return f"{law}:{a},{b}"
    raise ConfigError(f"law: unknown law {law!r}")


def _parse_layers_law(text):
    text = str(text)
    if text == "sqrt":
        return lambda m: math.ceil(math.sqrt(m))
    if text.startswith("linear:"):
        a = float(text.split(":", 1)[1])
        return lambda m: int(round(a * m))
    if text.startswith("const:"):
        n = int(text.split(":", 1)[1])
        return lambda m: n
    raise ConfigError(f"layers_law: cannot parse {text!r}; expected linear:a | sqrt | const:L")


def _finite(value, what) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NumericalError(f"{what} is not finite")
    return value


# -- command handlers ----------------------------------------------------------


def _run_toy(cfg) -> tuple:
    m = _need(cfg, "m", int, low=1)
    s = _need(cfg, "s", float, low=0.0)
    samples = _need(cfg, "samples", int, low=est.MIN_SAMPLES)
    family = est.ToyGradientFamily(m=m, s=s)
    moments = est.estimate_abs_grad(family, samples, RandomSource(cfg["seed"]), cfg["jobs"])
    closed = cf.toy_grad_abs_expectation(s, m)
    rows = [
        [m, s, "closed_form", _finite(closed, "closed form"), 0.0],
        [m, s, "mc", _finite(moments.mean, "MC mean"), moments.std_error_mean],
    ]
    return ["m", "s", "kind", "value", "std_error"], rows, {"estimate": moments.as_dict()}


def _prop1_generator(cfg, m):
    kind = cfg["generator"]
    modes = cfg.get("modes")
    if modes is None:
        modes = {"global-phase": (), "phase-shifter": (0,)}.get(kind, (0, 1))
    try:
        return make_generator(kind, tuple(modes), m)
    except ValueError as exc:
        raise ConfigError(f"modes: {exc}") from exc


def _run_prop1(cfg) -> tuple:
    m = _need(cfg, "m", int, low=1)
    energy = _need(cfg, "intensity", float, low=0.0)
    samples = _need(cfg, "samples", int, low=est.MIN_SAMPLES)
    gen = _prop1_generator(cfg, m)
    xi_min, xi_max = cforms.xi_bounds(gen.d)
    interval = cforms.second_moment_interval(m, energy, gen.d)
    u = MeanVector.of([math.sqrt(2 * energy)] + [0.0] * (2 * m - 1))
    family = est.CompilingGradientFamily(u, gen.d)
    moments = est.estimate_grad_moments(family, samples, RandomSource(cfg["seed"]), cfg["jobs"])
    rows = [[
        m,
        energy,
        xi_min,
        xi_max,
        interval.lo.value,
        interval.hi.value,
        _finite(moments.second_moment, "MC second moment"),
        moments.std_error_second,
    ]]
    columns = ["m", "E", "xi_min", "xi_max", "pred_lo", "pred_hi",
               "mc_second_moment", "mc_stderr"]
    return columns, rows, {"estimate": moments.as_dict()}


def _run_prop2(cfg) -> tuple:
    m = _need(cfg, "m", int, low=2)
    energy = _need(cfg, "intensity", float, low=0.0)
    samples = _need(cfg, "samples", int, low=est.MIN_SAMPLES)
    source = RandomSource(cfg["seed"])
    inst = source.substream(INSTANCE_STREAM)
    dim = 2 * m
    a = inst.standard_normal((dim, dim))
    ham = cf.QuadraticHamiltonian(a @ a.T / dim)
    gen = make_generator("two-mode-phase", (0, 1), m)
    o_plus = haar_orthogonal(m, inst)
    eta_tilde = o_plus @ ham.eta @ o_plus.T
    b = cf.bk_matrix(gen.eps, eta_tilde)
    u = uniform_sphere(m, math.sqrt(2 * energy), inst)
    pred = cforms.quadratic_second_moment(u, b)
    family = est.QuadraticGradientFamily(u=u, b=b)
    moments = est.estimate_grad_moments(family, samples, source, cfg["jobs"])
    rows = [[m, energy, _finite(pred, "prediction"),
             _finite(moments.second_moment, "MC second moment"),
             moments.std_error_second]]
    return ["m", "E", "prediction", "mc_second_moment", "mc_stderr"], rows, {"estimate": moments.as_dict()}


def _run_heterodyne(cfg) -> tuple:
    m = _need(cfg, "m", int, low=1)
    e0 = _need(cfg, "e0", float, low=0.0)
    e1 = _need(cfg, "e1", float, low=0.0)
    samples = _need(cfg, "samples", int, low=0)
    sharp = cforms.heterodyne_prefactor(m, e0, e1)
    upper = cforms.heterodyne_prefactor_upper(m, e0, e1)
    extra = {}
    row = [m, e0, e1, sharp.log_value, upper.log_value]
    columns = ["m", "e0", "e1", "log_prefactor", "log_prefactor_upper"]
    if samples:
        if samples < est.MIN_SAMPLES:
            raise ConfigError(f"samples: must be 0 or >= {est.MIN_SAMPLES}, got {samples}")
        gen = make_generator("global-phase", (), m)
        u = MeanVector.of([math.sqrt(2 * e0)] + [0.0] * (2 * m - 1))
        n = MeanVector.of([0.0, math.sqrt(2 * e1)] + [0.0] * (2 * m - 2))
        family = est.MeasurementGradientFamily(u=u, n=n, d=gen.d)
        moments = est.estimate_grad_moments(family, samples, RandomSource(cfg["seed"]), cfg["jobs"])
        row += [_finite(moments.second_moment, "MC second moment"), moments.std_error_second]
        columns += ["mc_second_moment", "mc_stderr"]
        extra["estimate"] = moments.as_dict()
    return columns, [row], extra


def _run_noise(cfg) -> tuple:
    grid = _parse_m_grid(cfg["m_grid"])
    k = _need(cfg, "k", float)
    if not 0.0 < k < 1.0:
        raise ConfigError(f"k: must lie strictly inside (0, 1), got {k}")
    try:
        e0_law = cforms.intensity_law(cfg["e0_law"])
    except ValueError as exc:
        raise ConfigError(f"e0_law: {exc}") from exc
    layers_law = _parse_layers_law(cfg["layers_law"])
    verdict = cforms.classify_noise(e0_law, k, layers_law, grid)
    rows = []
    for m in grid:
        e0 = float(e0_law(np.asarray(float(m))))
        n_layers = layers_law(m)
        e1 = cf.attenuated_intensity(e0, k, n_layers)
        rows.append([m, e0, n_layers, e1,
                     cforms.heterodyne_prefactor(m, e0, e1).log_value])
    extra = {"verdict": verdict.verdict, "fit_slope": verdict.fit.slope}
    return ["m", "e0", "n_layers", "e1", "log_prefactor"], rows, extra


def _explicit_law(text: str, grid) -> "callable":
    try:
        values = [float(s) for s in text.split(":", 1)[1].split(",")]
    except ValueError:
        raise ConfigError(f"law: cannot parse explicit intensity list {text!r}") from None
    if len(values) != len(grid):
        raise ConfigError(
            f"law: explicit list has {len(values)} entries but the grid has {len(grid)}"
        )
    table = {float(m): e for m, e in zip(grid, values)}

    def law(m):
        arr = np.atleast_1d(np.asarray(m, dtype=float))
        out = np.array([table[float(x)] for x in arr])
        return out if np.ndim(m) else out[0]

    return law


def _run_regimes(cfg) -> tuple:
    grid = _parse_m_grid(cfg["m_grid"])
    law_text = _law_string(cfg)
    try:
        if law_text.startswith("list:"):
            law = _explicit_law(law_text, grid)
        else:
            law = cforms.intensity_law(law_text)
    except ValueError as exc:
        raise ConfigError(f"law: {exc}") from exc
    verdict = cforms.classify_regime(law, grid)
    rows = []
    for m in grid:
        energy = float(law(np.asarray(float(m))))
        rows.append([m, energy, cforms.second_moment_prefactor(m, energy).log_value])
    extra = {"law": law_text, "verdict": verdict.verdict, "fit_slope": verdict.fit.slope}
    return ["m", "E", "log_moment"], rows, extra


def _run_train(cfg) -> tuple:
    m = _need(cfg, "m", int, low=1)
    depth = _need(cfg, "layers", int, low=1)
    energy = _need(cfg, "intensity", float, low=0.0)
    lr = _need(cfg, "lr", float)
    max_iters = _need(cfg, "max_iters", int, low=0)
    tol = _need(cfg, "tol", float, low=0.0)
    family = cfg["family"]
    if family not in tr.COST_FAMILIES:
        raise ConfigError(f"family: unknown cost family {family!r}")
    try:
        config = tr.TrainConfig(lr=lr, max_iters=max_iters, tol=tol)
    except ValueError as exc:
        raise ConfigError(f"lr/max_iters/tol: {exc}") from exc
    source = RandomSource(cfg["seed"])
    inst = source.substream(INSTANCE_STREAM)
    circuit = random_circuit(m, depth, inst)
    theta0 = inst.uniform(-math.pi, math.pi, depth)
    circuit = circuit.with_theta(theta0)
    u = uniform_sphere(m, math.sqrt(2 * energy), inst)
    ham = None
    if family == "quadratic":
        dim = 2 * m
        a = inst.standard_normal((dim, dim))
        ham = cf.QuadraticHamiltonian(a @ a.T / dim)
    records = tr.train(circuit, family, u, config, hamiltonian=ham)
    rows = [[rec.iteration, rec.cost, rec.grad_norm] for rec in records]
    extra = {"final_cost": records[-1].cost, "iterations": records[-1].iteration}
    return ["iteration", "cost", "grad_norm"], rows, extra


_HANDLERS = {
    "toy": _run_toy,
    "prop1": _run_prop1,
    "prop2": _run_prop2,
    "heterodyne": _run_heterodyne,
    "noise": _run_noise,
    "regimes": _run_regimes,
    "train": _run_train,
}


def run_config(cfg: dict) -> tuple:
    """Run a full config dict; returns (columns, rows, extra_preamble)."""
    command = cfg.get("command")
    if command not in _HANDLERS:
        raise ConfigError(f"command: unknown command {cfg.get('command')!r}")
    _need(cfg, "seed", int, low=0, high=2**64 - 1)
    _need(cfg, "jobs", int, low=1)
    if cfg.get("format") not in ("csv", "json"):
        raise ConfigError(f"format: expected csv or json, got {cfg.get('format')!r}")
    return _HANDLERS[command](cfg)


# -- output writers -------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return str(value)


def _config_echo(cfg: dict) -> str:
    clean = {k: v for k, v in cfg.items() if k != "output"}
    return json.dumps(clean, sort_keys=True)


def render_csv(cfg: dict, columns, rows, extra) -> str:
    lines = [
        f"# schema: {SCHEMA}",
        f"# version: {__version__}",
        f"# command: {cfg['command']}",
        f"# seed: {cfg['seed']}",
        f"# config: {_config_echo(cfg)}",
    ]
    lines += [f"# {key}: {_fmt(value)}" for key, value in extra.items()]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def render_jsonl(cfg: dict, columns, rows, extra) -> str:
    head = {"record": "config", "schema": SCHEMA, "version": __version__,
            "seed": cfg["seed"], "config": json.loads(_config_echo(cfg))}
    head.update(extra)
    lines = [json.dumps(head, sort_keys=True)]
    for row in rows:
        lines.append(json.dumps({"record": "row", **dict(zip(columns, row))}, sort_keys=True))
    return "\n".join(lines) + "\n"


def _output_path(cfg: dict) -> str:
    if cfg.get("output"):
        return cfg["output"]
    ext = "csv" if cfg["format"] == "csv" else "jsonl"
    base = f"{cfg['command']}_seed{cfg['seed']}.{ext}"
    return os.path.join(os.environ.get(ENV_OUTDIR, "."), base)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        columns, rows, extra = run_config(cfg)
        text = (
            render_csv(cfg, columns, rows, extra)
            if cfg["format"] == "csv"
            else render_jsonl(cfg, columns, rows, extra)
        )
        path = _output_path(cfg)
        with open(path, "w") as handle:
            handle.write(text)
        print(path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, tr.NonFiniteCostError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
