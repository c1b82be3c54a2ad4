"""The ``bmoment`` command line.

Every subcommand is described once by a list of :class:`Param`; the same
description builds the argparse flags and validates the ``params`` map of a
JSON config file, so both entry points accept exactly the same settings.

Exit codes: 0 success, 2 validation error, 3 a reproduce case failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .cases import CASES, run_case
from .families import PowerLawFamily
from .gaussian_calculus import CovOp, Grid, bm_covariance, bm_fourth, indicator_moment, rw_second, wick_moment
from .integrability import MomentKind, NotInTableError, Space, classify, numeric_verify, rule
from .process_lab import ModelKind, ProcessModel, estimate_moment
from .rkhs_tightness import dominating_operator, hx_norm, rkhs_factor, tightness_dominated
from .rng import block_generator, default_seed
from .tensor_core import MomentTensor, NormedSpace, NormKind
from .tensor_norms import injective_norm, norm_oracle, projective_norm
from .zolotarev import moment_gate

__all__ = ["ConfigError", "ExperimentConfig", "Report", "run", "reproduce", "dumps", "main", "build_parser"]

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CASE_FAILED = 3
HELP_WIDTH = 100


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending parameter when there is one."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


# ---------------------------------------------------------------------------
# JSON with fixed 17-significant-digit floats
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj: Any, indent: int, level: int) -> str:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if hasattr(obj, "to_json"):
        return _encode(obj.to_json(), indent, level)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [_encode(v, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits; non-finite floats become strings."""
    return _encode(obj, indent, 0) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".bmoment-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# parameter schemas
# ---------------------------------------------------------------------------


def _json_value(raw: Any) -> Any:
    """Inline JSON text, a path (optionally prefixed by ``@``) to a JSON file, or an already-parsed value."""
    if not isinstance(raw, str):
        return raw
    path = raw[1:] if raw.startswith("@") else raw
    if raw.startswith("@") or os.path.isfile(path):
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(raw)


def _float_list(raw: Any) -> list[float]:
    if isinstance(raw, str):
        raw = raw.strip()
        if raw.startswith("[") or raw.startswith("@"):
            raw = _json_value(raw)
        else:
            return [float(v) for v in raw.split(",") if v.strip()]
    return [float(v) for v in raw]


def _bool(raw: Any) -> bool:
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, str) and raw.lower() in ("true", "1", "yes"):
        return True
    if isinstance(raw, str) and raw.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _int(raw: Any) -> int:
    if isinstance(raw, bool):
        raise ValueError("expected an integer")
    if isinstance(raw, float) and not raw.is_integer():
        raise ValueError(f"expected an integer, got {raw}")
    return int(raw)


@dataclass(frozen=True)
class Param:
    name: str
    convert: Callable[[Any], Any]
    help: str
    default: Any = None
    required: bool = False
    choices: tuple | None = None
    flag: bool = False  # boolean switch on the command line

    @property
    def option(self) -> str:
        return "--" + self.name.replace("_", "-")


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    params: tuple
    handler: Callable[[dict, int], Any]


def _validate(cmd: Command, params: dict) -> dict:
    known = {p.name: p for p in cmd.params}
    unknown = sorted(set(params) - set(known))
    if unknown:
        raise ConfigError(f"unknown parameter for {cmd.name}", key=unknown[0])
    out = {}
    for p in cmd.params:
        raw = params.get(p.name)
        if raw is None:
            if p.required:
                raise ConfigError("missing required parameter", key=p.name)
            out[p.name] = p.default
            continue
        try:
            value = p.convert(raw)
        except (ValueError, TypeError, OSError) as exc:
            raise ConfigError(str(exc), key=p.name) from None
        if p.choices is not None and value not in p.choices:
            raise ConfigError(f"must be one of {list(p.choices)}, got {value!r}", key=p.name)
        out[p.name] = value
    return out


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------


def _tensor(raw: Any) -> MomentTensor:
    obj = _json_value(raw)
    if isinstance(obj, dict):
        return MomentTensor.from_json(obj)
    return MomentTensor(np.asarray(obj, dtype=float))


def _matrix(raw: Any) -> np.ndarray:
    arr = np.asarray(_json_value(raw), dtype=float)
    if arr.ndim != 2:
        raise ValueError("expected a JSON matrix")
    return arr


def _matrix_list(raw: Any) -> list[np.ndarray]:
    obj = _json_value(raw)
    mats = [np.asarray(m, dtype=float) for m in obj]
    if not mats or any(m.ndim != 2 for m in mats):
        raise ValueError("expected a non-empty JSON list of matrices")
    return mats


def _grid(raw: Any) -> Grid:
    if isinstance(raw, str):
        return Grid.parse(raw)
    return Grid(np.asarray(raw, dtype=float))


def _guard(key: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), key=key) from None


def _handle_norms(p: dict, seed: int) -> dict:
    T = p["tensor"]
    space = _guard("space", NormedSpace, T.dim, p["space"])
    out: dict = {"order": T.order, "dim": T.dim, "space": p["space"]}
    if p["which"] in ("pi", "both"):
        out["pi"] = projective_norm(T, space).to_json()
        if p["oracle"]:
            out["pi_oracle"] = _guard("oracle", norm_oracle, T, space, "pi")
    if p["which"] in ("eps", "both"):
        out["eps"] = injective_norm(T, space).to_json()
        if p["oracle"]:
            out["eps_oracle"] = _guard("oracle", norm_oracle, T, space, "eps")
    return out


def _handle_exact_moment(p: dict, seed: int) -> MomentTensor:
    model, k = p["model"], p["order"]
    if model == "gaussian":
        if p["sigma"] is None:
            raise ConfigError("gaussian needs --sigma", key="sigma")
        return _guard("sigma", wick_moment, p["sigma"], k)
    grid = p["grid"]
    if grid is None:
        raise ConfigError(f"{model} needs --grid", key="grid")
    if model == "bm":
        if k not in (2, 4):
            raise ConfigError("bm has closed forms for orders 2 and 4", key="order")
        return bm_covariance(grid) if k == 2 else bm_fourth(grid)
    if model == "indicator":
        return _guard("order", indicator_moment, grid, k)
    if k != 2:
        raise ConfigError("rw has a closed form for order 2 only", key="order")
    if p["n_steps"] is None:
        raise ConfigError("rw needs --n-steps", key="n_steps")
    return _guard("n_steps", rw_second, grid, p["n_steps"])


def _build_model(p: dict) -> ProcessModel:
    kind = ModelKind(p["model"])
    if kind in (ModelKind.BROWNIAN, ModelKind.INDICATOR, ModelKind.RANDOM_WALK) and p["grid"] is None:
        raise ConfigError(f"{kind.value} needs --grid", key="grid")
    if kind is ModelKind.BROWNIAN:
        return ProcessModel.brownian(p["grid"])
    if kind is ModelKind.INDICATOR:
        return ProcessModel.indicator(p["grid"])
    if kind is ModelKind.RANDOM_WALK:
        return _guard("n_steps", ProcessModel.random_walk, p["grid"], p["n_steps"] or 0)
    if kind is ModelKind.GAUSSIAN_VECTOR:
        if p["sigma"] is None:
            raise ConfigError("gaussian_vector needs --sigma", key="sigma")
        return _guard("sigma", ProcessModel.gaussian_vector, p["sigma"])
    if kind is ModelKind.DIAGONAL_SEQ:
        fam = _guard("alpha", PowerLawFamily, p["alpha"], p["beta"])
        return _guard("truncation", ProcessModel.diagonal_seq, fam, p["truncation"])
    if p["n"] is None:
        raise ConfigError(f"{kind.value} needs --n", key="n")
    return _guard("n", ProcessModel, kind, n=p["n"])


def _handle_simulate(p: dict, seed: int):
    model = _build_model(p)
    est = _guard("order", estimate_moment, model, p["order"], p["samples"], seed, workers=p["workers"])
    return {"model": model.describe(), "estimate": est}


def _handle_classify(p: dict, seed: int) -> dict:
    fam = _guard("alpha", PowerLawFamily, p["alpha"], p["beta"])
    try:
        reqs = rule(p["space"], p["k"], p["moment"])
    except NotInTableError as exc:
        raise ConfigError(f"NOT_IN_TABLE: {exc}", key="space") from None
    verdict = classify(fam, p["space"], p["k"], p["moment"])
    out: dict = {
        "alpha": fam.alpha,
        "beta": fam.beta,
        "k": p["k"],
        "space": p["space"],
        "moment": p["moment"],
        "verdict": verdict.to_json(),
        "rule": {sense: req.describe() for sense, req in reqs.items()},
    }
    if p["verify"]:
        out["numeric"] = {
            sense: numeric_verify(fam, req.condition, req.a_power, p["n_terms"], p_power=req.p_power)
            for sense, req in reqs.items()
        }
        out["numeric_agrees"] = all(out["numeric"][s]["verdict"] == getattr(verdict, s) for s in reqs)
    return out


def _handle_rkhs(p: dict, seed: int) -> dict:
    sigma = _guard("sigma", CovOp, p["sigma"])
    factor = rkhs_factor(sigma, p["rank_tol"])
    action = p["action"]
    if action == "factor":
        return {"rank": factor.rank, "eigvals": factor.eigvals, "eigvecs": factor.eigvecs}
    if p["vector"] is None:
        raise ConfigError(f"{action} needs --vector", key="vector")
    x = np.asarray(p["vector"], dtype=float)
    if x.shape != (sigma.dim,):
        raise ConfigError(f"expected {sigma.dim} entries, got {x.size}", key="vector")
    value = hx_norm(factor, x)
    if action == "norm":
        return {"norm": value, "rank": factor.rank}
    return {"member": math.isfinite(value), "rank": factor.rank}


def _handle_tightness(p: dict, seed: int) -> dict:
    covs = [_guard("sigmas", CovOp, m) for m in p["sigmas"]]
    out: dict = {}
    if p["dominator"] is None:
        dom = _guard("sigmas", dominating_operator, covs)
        T = dom.T
        out["constructed"] = {"selected": list(dom.selected), "scale": dom.scale, "trace_budget": dom.trace_budget}
    else:
        T = _guard("dominator", CovOp, p["dominator"])
    rep = _guard("dominator", tightness_dominated, covs, T, p["tol"])
    out.update(rep.to_json())
    out["dominator"] = T.matrix
    return out


def _scalar_sampler(spec: str, n: int, seed: int, stream: int) -> np.ndarray:
    """``normal[:mu[:sigma]]`` or ``uniform[:lo:hi]`` (default: mean 0, variance 1)."""
    name, *args = spec.split(":")
    vals = [float(a) for a in args]
    rng = block_generator(seed, 0, stream=stream)
    if name == "normal" and len(vals) <= 2:
        mu, sd = (vals + [0.0, 1.0][len(vals):])[:2]
        return mu + sd * rng.standard_normal(n)
    if name == "uniform" and len(vals) in (0, 2):
        lo, hi = vals if vals else (-math.sqrt(3.0), math.sqrt(3.0))
        return rng.uniform(lo, hi, n)
    raise ValueError(f"unknown distribution {spec!r}; use normal[:mu[:sigma]] or uniform[:lo:hi]")


def _handle_zolotarev(p: dict, seed: int) -> dict:
    x = _guard("model_x", _scalar_sampler, p["model_x"], p["samples"], seed, 3)
    y = _guard("model_y", _scalar_sampler, p["model_y"], p["samples"], seed, 4)
    gate = _guard("s", moment_gate, x, y, p["s"], p["z"], p["n_directions"], seed)
    return gate.to_json()


def _handle_reproduce(p: dict, seed: int) -> dict:
    out = {"case": p["case"]}
    out.update(run_case(p["case"], seed))
    return out


_SPACES = tuple(k.value for k in NormKind)
_FMT = Param("out", str, "output format", default="json", choices=("json", "csv"))

COMMANDS: dict[str, Command] = {}


def _register(cmd: Command) -> None:
    COMMANDS[cmd.name] = cmd


_register(Command("norms", "projective and injective norms of a tensor", (
    Param("tensor", _tensor, "tensor as JSON ({order, dim, entries} or nested lists) or a JSON file", required=True),
    Param("space", str, "geometry of each factor", default="l2", choices=_SPACES),
    Param("which", str, "which norm(s) to compute", default="both", choices=("pi", "eps", "both")),
    Param("oracle", _bool, "also evaluate the brute-force oracle (small tensors only)", default=False, flag=True),
), _handle_norms))

_register(Command("exact-moment", "closed-form moment tensors", (
    Param("model", str, "closed-form family", required=True, choices=("gaussian", "bm", "indicator", "rw")),
    Param("order", _int, "tensor order (bm: 2 or 4, rw: 2)", default=2),
    Param("grid", _grid, "grid as 'uniform:n' or a comma list in [0, 1]"),
    Param("sigma", _matrix, "covariance matrix as JSON, a JSON file, or @file (gaussian)"),
    Param("n_steps", _int, "random walk steps (rw)"),
    _FMT,
), _handle_exact_moment))

_register(Command("simulate", "Monte Carlo moment tensor with standard errors", (
    Param("model", str, "process model", required=True, choices=tuple(k.value for k in ModelKind)),
    Param("order", _int, "tensor order", default=2),
    Param("samples", _int, "number of samples", default=100000),
    Param("grid", _grid, "grid as 'uniform:n' or a comma list in [0, 1]"),
    Param("n_steps", _int, "random walk steps"),
    Param("sigma", _matrix, "covariance matrix as JSON or @file (gaussian_vector)"),
    Param("n", _int, "dimension (sphere_uniform, scaled_gaussian, basis_uniform)"),
    Param("alpha", float, "power-law exponent of P(N = n) (diagonal_seq)", default=2.0),
    Param("beta", float, "growth exponent of a_n (diagonal_seq)", default=0.5),
    Param("truncation", _int, "support truncation (diagonal_seq)", default=100),
    Param("workers", _int, "threads; results do not depend on it", default=1),
    _FMT,
), _handle_simulate))

_register(Command("classify", "integral sense of E X^k for X = a_N e_N", (
    Param("alpha", float, "P(N = n) proportional to n^-alpha, alpha > 1", required=True),
    Param("beta", float, "a_n = n^beta, beta >= 0", required=True),
    Param("k", _int, "moment order", default=1),
    Param("space", str, "ambient space", default="c0", choices=tuple(s.value for s in Space)),
    Param("moment", str, "tensor product", default="injective", choices=tuple(m.value for m in MomentKind)),
    Param("verify", _bool, "also run the numeric check", default=False, flag=True),
    Param("n_terms", _int, "terms used by the numeric check", default=100000),
), _handle_classify))

_register(Command("rkhs", "reproducing-kernel norm and factors of a covariance", (
    Param("sigma", _matrix, "covariance matrix as JSON or @file", required=True),
    Param("vector", _float_list, "vector as a comma list or JSON"),
    Param("action", str, "what to compute", default="norm", choices=("norm", "member", "factor")),
    Param("rank_tol", float, "relative eigenvalue cutoff", default=1e-10),
), _handle_rkhs))

_register(Command("tightness", "Loewner domination of covariances by a trace-class operator", (
    Param("sigmas", _matrix_list, "JSON list of covariance matrices or @file", required=True),
    Param("dominator", _matrix, "dominating matrix; constructed from the sequence when omitted"),
    Param("tol", float, "eigenvalue tolerance", default=1e-10),
), _handle_tightness))

_register(Command("zolotarev", "moment gate and bounds for the Zolotarev distance", (
    Param("s", float, "order s > 0", required=True),
    Param("model_x", str, "normal[:mu[:sigma]] or uniform[:lo:hi]", default="normal"),
    Param("model_y", str, "normal[:mu[:sigma]] or uniform[:lo:hi]", default="uniform"),
    Param("samples", _int, "samples per side", default=100000),
    Param("z", float, "z-score threshold of the gate", default=4.0),
    Param("n_directions", _int, "random projection directions", default=16),
), _handle_zolotarev))

_register(Command("reproduce", "run a pinned end-to-end case", (
    Param("case", str, "case id", required=True, choices=tuple(CASES)),
), _handle_reproduce))


# ---------------------------------------------------------------------------
# config, report, run
# ---------------------------------------------------------------------------

_CONFIG_KEYS = ("command", "params", "seed", "output", "format")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    output: str | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {sorted(COMMANDS)}", key="command")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be an object", key="params")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv", key="format")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int)):
            raise ConfigError("seed must be an integer", key="seed")

    def to_json(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed, "output": self.output, "format": self.format}

    @classmethod
    def from_json(cls, obj: Any) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(obj) - set(_CONFIG_KEYS))
        if unknown:
            raise ConfigError("unknown config key", key=unknown[0])
        if "command" not in obj:
            raise ConfigError("missing required key", key="command")
        return cls(**obj)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return cls.from_json(obj)

    def save(self, path: str) -> None:
        _atomic_write(path, json.dumps(self.to_json(), indent=2) + "\n")


@dataclass
class Report:
    command: str
    params: dict
    results: Any
    version: str
    duration: float
    seed: int
    rendered: str = field(default="", repr=False)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "results": self.results,
            "version": self.version,
            "duration_seconds": self.duration,
        }

    def results_text(self) -> str:
        return dumps(self.results)


def _echo(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, MomentTensor):
            v = v.to_json()
        elif isinstance(v, Grid):
            v = v.points.tolist()
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, list):
            v = [m.tolist() if isinstance(m, np.ndarray) else m for m in v]
        out[k] = v
    return out


def _csv_rows(results: Any) -> tuple[list[str], list[list]]:
    if isinstance(results, MomentTensor):
        T, se = results, None
    elif isinstance(results, dict) and "estimate" in results:
        T, se = results["estimate"].tensor, results["estimate"].stderr
    else:
        raise ConfigError("csv output is only available for tensor results", key="out")
    header = [f"i{j}" for j in range(T.order)] + ["estimate"] + (["stderr"] if se is not None else [])
    rows = []
    for idx in itertools.product(range(T.dim), repeat=T.order):
        row = list(idx) + [_fmt_float(float(T.entries[idx]))]
        if se is not None:
            row.append(_fmt_float(float(se.entries[idx])))
        rows.append(row)
    return header, rows


def render(report: Report, fmt: str) -> str:
    if fmt == "csv":
        header, rows = _csv_rows(report.results)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    return dumps(report)


def run(config: ExperimentConfig) -> Report:
    """Validate, dispatch, and (when ``config.output`` is set) write the report atomically."""
    cmd = COMMANDS[config.command]
    params = _validate(cmd, config.params)
    fmt = params["out"] if "out" in config.params else config.format
    if "out" in params:
        params["out"] = fmt
    seed = default_seed() if config.seed is None else int(config.seed)
    start = time.perf_counter()
    results = cmd.handler(params, seed)
    report = Report(config.command, _echo(params), results, __version__, time.perf_counter() - start, seed)
    text = render(report, fmt)
    if config.output:
        try:
            _atomic_write(config.output, text)
        except OSError as exc:
            raise ConfigError(f"cannot write output: {exc}", key="output") from None
    report.rendered = text
    return report


def reproduce(case_id: str, seed: int | None = None) -> Report:
    return run(ExperimentConfig("reproduce", {"case": case_id}, seed=seed))


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------


def _formatter(prog: str) -> argparse.HelpFormatter:
    return argparse.HelpFormatter(prog, width=HELP_WIDTH, max_help_position=34)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmoment",
        description="Moments of random vectors: tensor norms, exact and simulated moments, integrability, RKHS, Zolotarev.",
        formatter_class=_formatter,
    )
    parser.add_argument("--version", action="version", version=f"bmoment {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for cmd in COMMANDS.values():
        sp = sub.add_parser(cmd.name, help=cmd.help, description=cmd.help, formatter_class=_formatter)
        for p in cmd.params:
            text = p.help + (" (required)" if p.required else "")
            if p.flag:
                sp.add_argument(p.option, dest=p.name, action="store_true", default=None, help=text)
            else:
                extra = {"choices": p.choices} if p.choices else {}
                if p.choices:
                    text += " {" + ",".join(map(str, p.choices)) + "}"
                if p.default is not None and not p.required:
                    text += f" [default: {p.default}]"
                sp.add_argument(p.option, dest=p.name, default=None, metavar=p.name.upper(), help=text, **extra)
        sp.add_argument("--seed", type=int, default=None, help="random seed [default: $BMOMENT_SEED or built-in]")
        sp.add_argument("--output", "-o", default=None, metavar="PATH", help="write the report here instead of stdout")
    rp = sub.add_parser("run", help="run a JSON experiment config", description="run a JSON experiment config",
                        formatter_class=_formatter)
    rp.add_argument("--config", required=True, metavar="PATH", help="config file (required)")
    rp.add_argument("--output", "-o", default=None, metavar="PATH", help="override the config's output path")
    return parser


def _params_from_args(cmd: Command, ns: argparse.Namespace) -> dict:
    return {p.name: getattr(ns, p.name) for p in cmd.params if getattr(ns, p.name) is not None}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command == "run":
            config = ExperimentConfig.load(ns.config)
            if ns.output:
                config = ExperimentConfig(config.command, config.params, config.seed, ns.output, config.format)
        else:
            cmd = COMMANDS[ns.command]
            params = _params_from_args(cmd, ns)
            config = ExperimentConfig(ns.command, params, seed=ns.seed, output=ns.output,
                                      format=params.get("out", "json"))
        report = run(config)
    except (ConfigError, ValueError) as exc:
        print(f"bmoment: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not config.output:
        sys.stdout.write(report.rendered)
    if config.command == "reproduce":
        passed = bool(report.results.get("passed"))
        print(f"case {report.results['case']}: {'PASS' if passed else 'FAIL'}", file=sys.stderr)
        if not passed:
            return EXIT_CASE_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
