"""Batch front end: ``price | converge | check | couple --config <path>``.

Exit status: 0 success, 1 a check failed, 2 invalid configuration,
3 infeasible model or lattice, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import jsonschema

from . import closedform, coupling, distortion, lattice, levy, valuation
from .checks import run_checks

EXIT_OK, EXIT_CHECK_FAILED, EXIT_SCHEMA, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3, 4

PRICE_HEADER = ("n", "delta", "h", "a", "value", "truncated_mass", "runtime_ms")
CONVERGE_HEADER = ("n", "delta", "h", "a", "value", "reference", "gap", "truncated_mass", "runtime_ms")
CHECK_HEADER = ("module", "property", "passed", "detail")
COUPLE_HEADER = ("process", "n_paths", "domination_rate", "mean", "mean_target", "mean_z",
                 "var", "var_target", "var_z", "passed")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_NUMS = {"type": "array", "items": _NUM, "minItems": 2}


def _obj(required: Sequence[str], **props) -> dict:
    return {"type": "object", "required": list(required), "properties": props,
            "additionalProperties": False}


def _const(v) -> dict:
    return {"const": v}


_MODEL = {"oneOf": [
    _obj(["type", "mu", "sigma"], type=_const("gbm"), mu=_NUM, sigma=_POS),
    _obj(["type", "C", "G", "M", "Y"], type=_const("tailcgmy"), C=_POS, G=_POS, M=_POS, Y=_POS,
         sigma=_NONNEG, drift=_NUM, q=_NONNEG),
    _obj(["type", "xs", "plus", "minus"], type=_const("tabulated"), xs=_NUMS, plus=_NUMS, minus=_NUMS,
         sigma=_NONNEG, drift=_NUM, q=_NONNEG, sigma2_jumps=_NONNEG),
]}

_FIXED = {"oneOf": [
    _obj(["family"], family=_const("linear")),
    _obj(["family", "gamma"], family=_const("minmaxvar"), gamma=_NONNEG),
    _obj(["family", "alpha"], family=_const("exponential"), alpha=_POS),
    _obj(["family", "knots"], family=_const("piecewise_linear"),
         knots={"type": "array", "minItems": 2,
                "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}}),
    _obj(["family", "components"], family=_const("composite"),
         components={"type": "array", "minItems": 1,
                     "items": {"type": "object", "required": ["weight", "family"]}}),
]}

_DISTORTION = {"oneOf": [
    _FIXED,
    _obj(["variant", "base"], variant=_const("sqrt_brownian"), base=_FIXED, sigma=_POS),
    _obj(["variant", "psi1", "psi2", "psi3"], variant=_const("general_example"),
         psi1=_FIXED, psi2=_FIXED, psi3=_FIXED, sigma=_POS),
    _obj(["variant", "gamma"], variant=_const("convex_cgmy"), gamma=_POS),
]}

_PAYOFF = {"oneOf": [
    _obj(["type", "S0", "K"], type=_const("call"), S0=_POS, K=_POS),
    _obj(["type", "K"], type=_const("digital"), K=_POS, S0=_POS),
    _obj(["type", "S0", "H"], type=_const("upin_digital"), S0=_POS, H=_POS),
    _obj(["type", "S0", "H", "K"], type=_const("upin_call"), S0=_POS, H=_POS, K=_POS),
    _obj(["type", "c"], type=_const("constant"), c=_NUM),
    _obj(["type", "table"], type=_const("table"),
         table={"type": "object", "patternProperties": {"^-?[0-9]+$": _NUM},
                "additionalProperties": False},
         default=_NUM),
]}

_GRID = _obj([], T=_POS, n_steps={"type": "integer", "minimum": 1},
             n_list={"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
             eps_trunc=_POS, a_override={"type": "integer", "minimum": 2}, h_override=_POS)

_REFERENCE = {"oneOf": [
    _obj(["type"], type=_const("closed_form"), delta_plus=_NONNEG),
    _obj(["type"], type=_const("quadrature"), delta_plus=_NONNEG),
    _obj(["type", "value"], type=_const("value"), value=_NUM),
    _obj(["type"], type=_const("last")),
]}

_SUBORDINATOR = {"oneOf": [
    _obj(["type", "rate", "mass"], type=_const("exponential"), rate=_POS, mass=_NONNEG),
    _obj(["type", "xs", "tails"], type=_const("tabulated"), xs=_NUMS, tails=_NUMS),
]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    **_obj([],
           command={"enum": ["price", "converge", "check", "couple"]},
           seed={"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
           model=_MODEL, distortion=_DISTORTION, payoff=_PAYOFF, grid=_GRID, reference=_REFERENCE,
           coupling=_obj(["nu1", "nu2", "n_paths"], nu1=_SUBORDINATOR, nu2=_SUBORDINATOR, T=_POS,
                         n_paths={"type": "integer", "minimum": 1}),
           output=_obj([], csv_path={"type": "string"})),
}

_REQUIRED = {
    "price": ("model", "distortion", "payoff", "grid"),
    "converge": ("model", "distortion", "payoff", "grid"),
    "check": (),
    "couple": ("coupling",),
}


class ConfigError(ValueError):
    pass


def load_config(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    validate_config(cfg, command)
    return cfg


def validate_config(cfg: dict, command: str) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc
    if cfg.get("command", command) != command:
        raise ConfigError(f"config command {cfg['command']!r} does not match {command!r}")
    missing = [k for k in _REQUIRED[command] if k not in cfg]
    if missing:
        raise ConfigError(f"{command} needs {', '.join(missing)}")
    grid = cfg.get("grid", {})
    if command == "price" and "n_steps" not in grid:
        raise ConfigError("price needs grid.n_steps")
    if command == "converge" and "n_list" not in grid:
        raise ConfigError("converge needs grid.n_list")


def fmt(x) -> str:
    """Locale-independent shortest round-trip representation."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return str(x)


def _family(cfg: dict):
    if "variant" in cfg:
        return distortion.scaling_family_from_config(cfg)
    return distortion.distortion_from_config(cfg)


def _build(cfg: dict):
    """Model, distortion, payoff; parameter errors other than model errors
    are configuration errors."""
    try:
        m = levy.model_from_config(cfg["model"])
    except levy.ModelError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"model: {exc}") from exc
    try:
        F = _family(cfg["distortion"])
        p = valuation.payoff_from_config(cfg["payoff"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return m, F, p


def _grid(m, grid: dict, n: int) -> lattice.GridSpec:
    return lattice.make_grid(m, float(grid.get("T", 1.0)), n,
                             float(grid.get("eps_trunc", lattice.DEFAULT_EPS_TRUNC)),
                             a=grid.get("a_override"), h=grid.get("h_override"))


def _reference(cfg: dict, m: levy.LevyModel, p: valuation.Payoff, T: float):
    ref = cfg.get("reference", {"type": "last"})
    kind = ref["type"]
    if kind == "value":
        return float(ref["value"])
    if kind == "last":
        return None
    if m.has_jumps():
        raise ConfigError("closed-form references need a jump-free model")
    spec = closedform.GbmSpec(1.0, m.drift + 0.5 * m.sigma2, m.sigma, T, float(ref.get("delta_plus", 0.0)))
    if isinstance(p, valuation.TerminalCall):
        spec = closedform.GbmSpec(p.S0, spec.mu, spec.sigma, T, spec.delta_plus)
        f = closedform.gbm_call if kind == "closed_form" else closedform.gbm_call_quadrature
        return f(spec, p.K)
    if isinstance(p, valuation.UpInDigital) and kind == "closed_form":
        spec = closedform.GbmSpec(p.S0, spec.mu, spec.sigma, T, spec.delta_plus)
        return closedform.gbm_upin_digital_reflection(spec, p.H)
    raise ConfigError(f"no {kind} reference for payoff {type(p).__name__}")


def _write(rows: list[tuple], header: Sequence[str], out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _timing(ms: float, keep: bool) -> float:
    return float(ms) if keep else 0.0


def cmd_price(cfg: dict, args) -> int:
    m, F, p = _build(cfg)
    g = _grid(m, cfg["grid"], int(cfg["grid"]["n_steps"]))
    r = valuation.distorted_value(m, F, p, g)
    row = (g.n_steps, g.delta, g.h, g.a, r.value, r.truncated_mass, _timing(r.runtime_ms, args.timing))
    _write([row], PRICE_HEADER, args.out)
    return EXIT_OK


def cmd_converge(cfg: dict, args) -> int:
    m, F, p = _build(cfg)
    grid = cfg["grid"]
    T = float(grid.get("T", 1.0))
    ref = _reference(cfg, m, p, T)
    results = [valuation.distorted_value(m, F, p, _grid(m, grid, int(n))) for n in grid["n_list"]]
    if ref is None:
        ref = results[-1].value
    rows = [(r.grid.n_steps, r.grid.delta, r.grid.h, r.grid.a, r.value, ref, abs(r.value - ref),
             r.truncated_mass, _timing(r.runtime_ms, args.timing)) for r in results]
    _write(rows, CONVERGE_HEADER, args.out)
    return EXIT_OK


def cmd_check(cfg: dict, args) -> int:
    results = run_checks()
    _write([(r.module, r.name, r.passed, r.detail) for r in results], CHECK_HEADER, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def cmd_couple(cfg: dict, args) -> int:
    c = cfg["coupling"]
    try:
        nu1 = coupling.subordinator_from_config(c["nu1"])
        nu2 = coupling.subordinator_from_config(c["nu2"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    T = float(c.get("T", 1.0))
    paths = coupling.couple_subordinators(nu1, nu2, T, int(c["n_paths"]), args.seed)
    rows = []
    for which, nu in ((1, nu1), (2, nu2)):
        r = coupling.marginal_check(paths, nu, which)
        rows.append((which, paths.n_paths, paths.domination_rate(), r.mean, r.mean_target, r.mean_z,
                     r.var, r.var_target, r.var_z, r.passed))
    _write(rows, COUPLE_HEADER, args.out)
    return EXIT_OK


COMMANDS = {"price": cmd_price, "converge": cmd_converge, "check": cmd_check, "couple": cmd_couple}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="choquet-lattice", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON run configuration (optional for check)")
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("--no-timing", dest="timing", action="store_false",
                    help="write runtime_ms as 0 so repeated runs give identical bytes")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "check":
                raise ConfigError(f"{args.command} needs --config")
            cfg = {}
        else:
            cfg = load_config(args.config, args.command)
        if args.seed is None:
            args.seed = int(cfg.get("seed", 0))
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except lattice.LatticeInfeasible as exc:
        print(f"lattice infeasible: condition {exc.condition}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (levy.ModelError, coupling.DominationError) as exc:
        print(f"model infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (distortion.NonConvergence, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
