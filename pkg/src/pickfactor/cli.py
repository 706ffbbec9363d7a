"""Command-line front end: ``pickfactor <command> ...``.

Output is a JSON run report on stdout (or a plain table with ``--table``).
Exit codes: 0 success, 1 input error, 2 nonconvergence or failed regression rows.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .errors import PickFactorError
from .examples import regression_rows
from .factorize import (
    FactorOptions,
    common_free_outer,
    contraction_certificate,
    dirichlet_truncated_radius,
    factor_through_subspace,
    subinner_free_outer,
    weak_product_factor,
)
from .fock import FreePoly, embed_symmetric, free_sarason, outer_defect, outer_status
from .kernels import KernelCombination, KernelRatio, KernelSpace, MultiPoly
from .moments import moment_profile, sarason_from_moments
from .pick import (
    PickProblem,
    approximant_errors,
    build_pick,
    classify_matrices,
    extremal_solve,
    subinner_approximants,
)
from .serialize import (
    InputError,
    complex_to_json,
    free_poly_from_json,
    free_poly_to_json,
    parse_poly,
    points_from_json,
    points_to_json,
    poly_from_json,
    poly_to_json,
    space_from_args,
)

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 1, 2


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    outputs: dict
    residuals: dict
    seed: int
    version: str
    tolerances: dict
    converged: bool = True
    wall_time: float | None = field(default=None, compare=False)

    def to_json(self, include_time: bool = False) -> dict:
        out = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "outputs": self.outputs,
            "residuals": self.residuals,
            "seed": self.seed,
            "version": self.version,
            "tolerances": self.tolerances,
            "converged": self.converged,
        }
        if include_time and self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RunReport":
        return cls(data["command"], data["inputs_digest"], data["outputs"], data["residuals"],
                   data["seed"], data["version"], data["tolerances"], data.get("converged", True),
                   data.get("wall_time"))

    def dumps(self, include_time: bool = False) -> str:
        return json.dumps(_finite(self.to_json(include_time)), indent=2, sort_keys=True)


def _finite(obj: Any) -> Any:
    """Convert numpy scalars to Python ones and non-finite floats (not representable in JSON) to strings."""
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _digest(inputs: dict) -> str:
    blob = json.dumps(inputs, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _load_json(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON input {path!r}: {exc}") from exc


def _space(args, prefix: str = "") -> KernelSpace:
    family = getattr(args, prefix + "space")
    if family is None:
        raise InputError(f"--{prefix.replace('_', '-')}space is required")
    return space_from_args(family, getattr(args, prefix + "dim", 1) or 1,
                           getattr(args, prefix + "alpha", None),
                           getattr(args, prefix + "coeffs", None), args.max_degree)


def _polys(args, space: KernelSpace | None = None) -> list[MultiPoly]:
    if args.input:
        data = _load_json(args.input)
        items = data if isinstance(data, list) else data.get("polys", [data]) if isinstance(data, dict) else None
        if items is None:
            raise InputError("JSON input must be a polynomial object or a list of them")
        out = []
        for item in items:
            sp = space
            if "space" not in item and sp is None:
                raise InputError("polynomial JSON needs a 'space' entry")
            if "space" in item:
                sp = KernelSpace.from_json(item["space"]).with_degree(args.max_degree)
            out.append(poly_from_json(item, sp))
        if not out or any(p.is_zero() for p in out) and len(out) == 1:
            raise InputError("empty polynomial input")
        return out
    if not args.poly:
        raise InputError("give --poly or --input")
    space = space or _space(args)
    return [parse_poly(space, text) for text in args.poly]


def _options(args) -> FactorOptions:
    return FactorOptions(tol_moments=args.tol, restarts=args.restarts, seed=args.seed,
                         probe_degree=args.probe_degree)


def _ratio_json(phi: KernelRatio) -> dict:
    def part(obj):
        if isinstance(obj, MultiPoly):
            return poly_to_json(obj)
        return kernel_combination_json(obj)
    return {"num": part(phi.numerator), "den": part(phi.denominator)}


def kernel_combination_json(kc: KernelCombination) -> dict:
    return {"points": points_to_json(kc.points), "weights": [complex_to_json(w) for w in kc.weights]}


# ---------------------------------------------------------------------------
# commands; each returns (outputs, residuals, converged, tolerances)
# ---------------------------------------------------------------------------

def cmd_factor(args):
    (f,) = _polys(args)[:1]
    space = f.space
    opts = _options(args)
    res = subinner_free_outer(space, f, opts)
    cert = contraction_certificate(space, res, args.probe_degree)
    outputs = {
        "outer": poly_to_json(res.outer),
        "subinner": _ratio_json(res.subinner),
        "gain": res.gain,
        "moment_residual": res.moment_residual,
        "converged": res.converged,
        "restarts_used": res.restarts_used,
    }
    residuals = {"moment": res.moment_residual, "norm_match": res.norm_match,
                 "stationarity": res.stationarity, "contraction_ratio": cert}
    return outputs, residuals, res.converged, {"tol_moments": opts.tol_moments, "restarts": opts.restarts}


def cmd_common_factor(args):
    fs = _polys(args)
    space = fs[0].space
    opts = _options(args)
    res = common_free_outer(space, fs, opts)
    outputs = {
        "outer": poly_to_json(res.outer),
        "ratios": [_ratio_json(r) for r in res.ratios],
        "column_residual": res.column_residual,
        "moment_residual": res.moment_residual,
        "converged": res.converged,
    }
    residuals = {"moment": res.moment_residual, "column": res.column_residual, "stationarity": res.stationarity}
    return outputs, residuals, res.converged, {"tol_moments": opts.tol_moments, "restarts": opts.restarts}


def cmd_weak_product(args):
    fs = _polys(args)
    if len(fs) != 2:
        raise InputError("weak-product needs exactly two polynomials")
    opts = _options(args)
    res = weak_product_factor(fs[0].space, fs[0], fs[1], opts)
    outputs = {"phi": _ratio_json(res.phi), "f": poly_to_json(res.outer), "norm": res.norm,
               "scale": res.scale, "converged": res.converged}
    return outputs, {"product": res.product_residual}, res.converged, {"tol_moments": opts.tol_moments}


def cmd_through_factor(args):
    space_k = _space(args, "k_")
    space_s = _space(args, "s_")
    (f,) = _polys(args, space_k)[:1]
    opts = _options(args)
    res = factor_through_subspace(f, space_k, space_s, opts)
    ok = bool(res.common.converged and res.identity_residual <= 1e-10 and res.norm_residual <= 1e-10)
    outputs = {
        "components": [poly_to_json(c) for c in res.components],
        "outer": poly_to_json(res.outer),
        "phi": _ratio_json(res.phi),
        "converged": ok,
    }
    residuals = {"identity": res.identity_residual, "norm": res.norm_residual,
                 "column": res.common.column_residual, "moment": res.common.moment_residual}
    return outputs, residuals, ok, {"tol_moments": opts.tol_moments}


def _moment_outputs(args) -> dict:
    (f,) = _polys(args)[:1]
    prof = moment_profile(f.space, f, getattr(args, "order", None))
    entries = [{"index": list(k), **complex_to_json(v)} for k, v in sorted(
        prof.entries.items(), key=lambda kv: (sum(kv[0]), tuple(-x for x in kv[0])))]
    v = sarason_from_moments(prof)
    return {"norm_sq": prof.norm_sq, "order": prof.order, "moments": entries, "sarason": poly_to_json(v.poly)}


def cmd_sarason(args):
    return _moment_outputs(args), {}, True, {}


def cmd_moments(args):
    return _moment_outputs(args), {}, True, {}


def _pick_problem(args) -> PickProblem:
    if args.input:
        data = _load_json(args.input)
        try:
            space = KernelSpace.from_json(data["space"]).with_degree(args.max_degree)
            points = points_from_json(data["points"], space.dim)
            targets = np.array([complex(t[0], t[1]) if isinstance(t, list) else complex(t)
                                for t in data["targets"]])
        except (KeyError, TypeError, IndexError) as exc:
            raise InputError(f"malformed Pick problem JSON: {exc}") from exc
        return PickProblem(space, points, targets, data.get("truncation"))
    space = _space(args)
    if not args.points or not args.targets:
        raise InputError("give --input or --points and --targets")
    pts = np.array([complex(x.replace("i", "j")) for x in args.points.split(",")])
    vals = np.array([complex(x.replace("i", "j")) for x in args.targets.split(",")])
    return PickProblem(space, pts.reshape(-1, space.dim), vals)


def cmd_pick(args):
    if args.pick_command == "approx":
        return _cmd_pick_approx(args)
    problem = _pick_problem(args)
    mats = build_pick(problem)
    label = classify_matrices(mats)
    outputs = {"classification": label, "rank_K": mats.rank_K, "rank_P": mats.rank_P,
               "min_eig_P": float(mats.eigvals_P[0])}
    residuals = {"hermitian": mats.hermitian_residual, "kernel_slack": mats.slack}
    tolerances = {"psd_tol": 1e-10, "rank_tol": 1e-10}
    if args.pick_command == "classify":
        return outputs, residuals, True, tolerances
    sol = extremal_solve(problem)
    phi = sol.phi
    outputs["phi"] = {
        "num_weights": [complex_to_json(w) for w in phi.numerator.weights],
        "den_weights": [complex_to_json(w) for w in phi.denominator.weights],
        "points": points_to_json(problem.points),
    }
    residuals.update({"interpolation": sol.interp_residual, "norm": sol.norm_residual,
                      "alternative": sol.alternative_residual})
    ok = sol.interp_residual <= 1e-8
    return outputs, residuals, ok, {**tolerances, "interp_tol": 1e-8}


def _cmd_pick_approx(args):
    space = _space(args)
    target = parse_poly(space, args.target)
    rng = np.random.default_rng(args.seed)
    d = space.dim
    pts = [np.zeros(d, dtype=complex)]
    schedule = []
    for _ in range(args.stages):
        schedule.append(np.array(pts))
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        pts.append(v * args.radius / np.linalg.norm(v))
    stages = subinner_approximants(space, target, schedule)
    probes = []
    for _ in range(args.probes):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        probes.append(v * 0.5 * rng.uniform() / np.linalg.norm(v))
    errors = approximant_errors(stages, target, probes)
    outputs = {"t": [s.t for s in stages], "errors": errors,
               "stages": [{"points": points_to_json(s.points), **kernel_ratio_weights(s.phi)} for s in stages]}
    residuals = {"interpolation": max(s.interp_residual for s in stages)}
    return outputs, residuals, True, {"t_tol": 1e-12, "psd_tol": 1e-10}


def kernel_ratio_weights(phi: KernelRatio) -> dict:
    return {"num_weights": [complex_to_json(w) for w in phi.numerator.weights],
            "den_weights": [complex_to_json(w) for w in phi.denominator.weights]}


def _free_input(args) -> FreePoly:
    if args.input:
        return free_poly_from_json(_load_json(args.input))
    if args.poly:
        space = KernelSpace.drury_arveson(args.dim or 1, args.max_degree)
        return embed_symmetric(parse_poly(space, args.poly[0]))
    raise InputError("give --input (free polynomial JSON) or --poly (symmetric embedding)")


def cmd_fock(args):
    if args.fock_command == "embed":
        space = KernelSpace.drury_arveson(args.dim or 1, args.max_degree)
        if not args.poly:
            raise InputError("fock embed needs --poly")
        F = embed_symmetric(parse_poly(space, args.poly[0]))
        return {"free_poly": free_poly_to_json(F)}, {}, True, {}
    F = _free_input(args)
    if args.fock_command == "sarason":
        V = free_sarason(F, args.side)
        return {"side": args.side, "sarason": free_poly_to_json(V)}, {}, True, {}
    curve = [{"N": n, "defect": outer_defect(F, n)} for n in args.n]
    status, _ = outer_status(F, max(args.n))
    return {"curve": curve, "status": status}, {}, True, {"lstsq_rcond": 1e-12}


def cmd_radius(args):
    r = dirichlet_truncated_radius(args.n)
    return {"n": args.n, "radius": r}, {}, True, {"bisection_tol": 1e-14}


def cmd_examples(args):
    rows = regression_rows(FactorOptions(tol_moments=args.tol, seed=args.seed))
    out = [{"id": r.id, "quantity": r.quantity, "expected": r.expected, "computed": r.computed,
            "delta": r.delta, "tol": r.tol, "check": r.kind, "pass": r.ok} for r in rows]
    ok = all(r.ok for r in rows)
    return {"rows": out, "all_pass": ok}, {}, ok, {"tol_moments": args.tol}


COMMANDS: dict[str, Callable] = {
    "factor": cmd_factor,
    "common-factor": cmd_common_factor,
    "weak-product": cmd_weak_product,
    "through-factor": cmd_through_factor,
    "sarason": cmd_sarason,
    "moments": cmd_moments,
    "pick": cmd_pick,
    "fock": cmd_fock,
    "radius": cmd_radius,
    "examples": cmd_examples,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_space_flags(p, prefix: str = "", required: bool = False):
    flag = f"--{prefix}space"
    p.add_argument(flag, dest=f"{prefix.replace('-', '_')}space", required=required,
                   help="hardy | dirichlet | drury_arveson | d_alpha | custom")
    p.add_argument(f"--{prefix}dim", dest=f"{prefix.replace('-', '_')}dim", type=int, default=1)
    p.add_argument(f"--{prefix}alpha", dest=f"{prefix.replace('-', '_')}alpha", type=float)
    p.add_argument(f"--{prefix}coeffs", dest=f"{prefix.replace('-', '_')}coeffs",
                   help="comma-separated a_0,a_1,... for a custom kernel")


def _add_poly_flags(p, multi: bool = False):
    p.add_argument("--poly", action="append",
                   help="polynomial expression, e.g. 'z-1' or '1+2*z1*z2'" + (" (repeatable)" if multi else ""))
    p.add_argument("--input", help="JSON file ('-' for stdin)")


def _add_solver_flags(p):
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--probe-degree", type=int, default=None)


def _global_flags(p, suppress: bool) -> None:
    """Global options; leaf parsers repeat them with suppressed defaults so they
    may also follow the subcommand."""
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=dflt(0))
    p.add_argument("--tol", type=float, default=dflt(1e-10), help="moment tolerance")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default=dflt("json"))
    fmt.add_argument("--table", dest="fmt", action="store_const", const="table", default=dflt("json"))
    p.add_argument("--max-degree", type=int, default=dflt(24), help="working degree of the space")
    p.add_argument("--timing", action="store_true", default=dflt(False),
                   help="include wall time in the report")


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); exit 2 is reserved for nonconvergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pickfactor", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("factor", "sarason", "moments"):
        p = sub.add_parser(name, parents=[common])
        _add_space_flags(p)
        _add_poly_flags(p)
        if name == "factor":
            _add_solver_flags(p)
        if name == "moments":
            p.add_argument("--order", type=int, default=None)
    for name in ("common-factor", "weak-product"):
        p = sub.add_parser(name, parents=[common])
        _add_space_flags(p)
        _add_poly_flags(p, multi=True)
        _add_solver_flags(p)
    p = sub.add_parser("through-factor", parents=[common])
    _add_space_flags(p, "k-", required=True)
    _add_space_flags(p, "s-", required=True)
    _add_poly_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("pick")
    psub = p.add_subparsers(dest="pick_command", required=True)
    for name in ("classify", "solve"):
        q = psub.add_parser(name, parents=[common])
        _add_space_flags(q)
        q.add_argument("--input")
        q.add_argument("--points", help="comma-separated complex points (d = 1), e.g. '0,0.5'")
        q.add_argument("--targets", help="comma-separated complex targets")
    q = psub.add_parser("approx", parents=[common])
    _add_space_flags(q)
    q.add_argument("--target", required=True, help="target multiplier polynomial")
    q.add_argument("--stages", type=int, default=6)
    q.add_argument("--radius", type=float, default=0.5)
    q.add_argument("--probes", type=int, default=20)

    p = sub.add_parser("fock")
    fsub = p.add_subparsers(dest="fock_command", required=True)
    q = fsub.add_parser("outer-defect", parents=[common])
    q.add_argument("--n", type=int, nargs="+", required=True)
    q.add_argument("--dim", type=int, default=None)
    _add_poly_flags(q)
    q = fsub.add_parser("sarason", parents=[common])
    q.add_argument("--side", choices=("left", "right"), default="left")
    q.add_argument("--dim", type=int, default=None)
    _add_poly_flags(q)
    q = fsub.add_parser("embed", parents=[common])
    q.add_argument("--dim", type=int, default=2)
    _add_poly_flags(q)

    p = sub.add_parser("radius", parents=[common])
    p.add_argument("--n", type=int, required=True)
    sub.add_parser("examples", parents=[common])
    return parser


def _command_name(args) -> str:
    if args.command == "pick":
        return f"pick {args.pick_command}"
    if args.command == "fock":
        return f"fock {args.fock_command}"
    return args.command


def _inputs(args) -> dict:
    skip = {"fmt", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _print_table(report: RunReport, out) -> None:
    if report.command == "examples":
        rows = report.outputs["rows"]
        out.write(f"{'id':<24} {'quantity':<28} {'expected':>22} {'computed':>22} {'|delta|':>10}  ok\n")
        for r in rows:
            out.write(f"{r['id']:<24} {r['quantity']:<28} {r['expected']:>22.15g} {r['computed']:>22.15g}"
                      f" {r['delta']:>10.3g}  {'PASS' if r['pass'] else 'FAIL'}\n")
        return
    flat = {}

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            flat[prefix] = obj

    walk("", {"outputs": report.outputs, "residuals": report.residuals})
    width = max((len(k) for k in flat), default=0)
    out.write(f"command: {report.command}\nconverged: {report.converged}\n")
    for k, v in flat.items():
        out.write(f"{k:<{width}}  {v}\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        outputs, residuals, converged, tolerances = COMMANDS[args.command](args)
    except (InputError, PickFactorError, ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(f"pickfactor: error: {exc}\n")
        return EXIT_INPUT
    tolerances = {"tol": args.tol, "max_degree": args.max_degree, **tolerances}
    report = RunReport(_command_name(args), _digest(_inputs(args)), outputs, residuals, args.seed,
                       __version__, tolerances, bool(converged), time.perf_counter() - start)
    if args.fmt == "table":
        _print_table(report, sys.stdout)
    else:
        sys.stdout.write(report.dumps(include_time=args.timing) + "\n")
    return EXIT_OK if converged else EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
