"""Command-line front end: hypick {triangle,solve,check,geometry,sampling,annulus}."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import geometry, quotients, sampling, solver
from .errors import BoundaryCase, DistinctnessError, DomainError, ShapeError
from .mobius import ConstantMap, ScaledMap, random_blaschke

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2
SEED_ENV = "HYPICK_SEED"
CSV_VERSION = "v1"


class InputError(ValueError):
    """Malformed or invalid input file."""


@dataclass
class ProblemFile:
    points: np.ndarray
    targets: np.ndarray | None
    metadata: dict = field(default_factory=dict)
    digest: str = ""


def _complex_list(items, name: str) -> np.ndarray:
    if not isinstance(items, list):
        raise InputError(f"field '{name}' must be a list")
    out = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise InputError(f"field '{name}[{i}]' must be an object with 're' and 'im'")
        for key in ("re", "im"):
            if key not in item:
                raise InputError(f"field '{name}[{i}].{key}' is missing")
            if isinstance(item[key], bool) or not isinstance(item[key], (int, float)):
                raise InputError(f"field '{name}[{i}].{key}' must be a number")
        z = complex(item["re"], item["im"])
        if not abs(z) < 1:
            raise InputError(f"{name}[{i}] has modulus {abs(z)!r} >= 1")
        out.append(z)
    return np.array(out, dtype=complex)


def parse_problem(raw: bytes) -> ProblemFile:
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise InputError(f"input is not UTF-8: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError("top level must be an object")
    if "points" not in doc:
        raise InputError("field 'points' is missing")
    points = _complex_list(doc["points"], "points")
    targets = None
    if doc.get("targets") is not None:
        targets = _complex_list(doc["targets"], "targets")
        if len(targets) != len(points):
            raise InputError(f"{len(points)} points but {len(targets)} targets")
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in meta.items()):
        raise InputError("field 'metadata' must map strings to strings")
    return ProblemFile(points, targets, meta, digest)


def load_problem(path: str) -> ProblemFile:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_problem(raw)


def _require_targets(p: ProblemFile) -> tuple:
    if p.targets is None or len(p.targets) == 0:
        raise InputError("this command needs a non-empty 'targets' list")
    return p.points, p.targets


def jsonable(x):
    """Recursively convert to JSON-safe values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(float(x.real)), jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def write_csv(path: str, kind: str, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# hypick {kind} csv {CSV_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def cmd_triangle(args, seed):
    p = load_problem(args.input)
    Z, W = _require_targets(p)
    t = quotients.triangle_from_data(Z, W)
    warnings = []
    if t.degenerate_at is not None:
        warnings.append({"degenerate_at": list(t.degenerate_at)})
    rows = [[k, j, v] for k, j, v in t.defined_entries()]
    results = {
        "n": t.n,
        "entries": [{"k": k, "j": j, "value": v, "modulus": abs(v)} for k, j, v in rows],
        "degenerate_at": list(t.degenerate_at) if t.degenerate_at else None,
    }
    if args.csv_out:
        write_csv(args.csv_out, "triangle", ["k", "j", "re", "im", "modulus"],
                  ([k, j, v.real, v.imag, abs(v)] for k, j, v in rows))
    return p.digest, results, warnings, EXIT_OK


def _seed_map(text: str, seed: int):
    kind, _, arg = text.partition(":")
    try:
        if kind == "zero":
            return ConstantMap(0j)
        if kind == "constant":
            re, _, im = arg.partition(",")
            return ConstantMap(complex(float(re), float(im or 0)))
        if kind == "scaled":
            return ScaledMap(float(arg))
        if kind == "blaschke":
            return random_blaschke(np.random.default_rng(seed), int(arg or 2))
    except (ValueError, DomainError) as exc:
        raise InputError(f"bad --seed-map {text!r}: {exc}") from None
    raise InputError(f"unknown --seed-map {text!r}; use zero, constant:RE,IM, scaled:R or blaschke:D")


def cmd_solve(args, seed):
    p = load_problem(args.input)
    Z, W = _require_targets(p)
    t = quotients.triangle_from_data(Z, W)
    verdict = solver.solvability_criteria(t)
    results = {"verdict": verdict.as_dict()}
    warnings = []
    if t.degenerate_at is not None:
        warnings.append({"degenerate_at": list(t.degenerate_at)})
    interpolant = None
    if verdict.status == solver.INFINITELY_MANY:
        try:
            interpolant = solver.schur_solve(t, _seed_map(args.seed_map, seed))
        except BoundaryCase as exc:
            warnings.append({"boundary_case": str(exc)})
        else:
            results["interpolant"] = interpolant.describe()
    elif verdict.candidate is not None:
        interpolant = verdict.candidate.chain or verdict.candidate.schur_form
        results["residual_witness"] = verdict.candidate.residual
    if interpolant is not None:
        results["residual"] = solver.interpolation_residual(interpolant, Z, W)
        sup = solver.grid_sup_norm(interpolant, args.grid)
        results["grid_check"] = {"points": args.grid**2, "sup_modulus": sup, "passed": sup <= 1 + 1e-9}
        if args.emit_samples:
            grid = solver.verification_grid(args.grid)
            vals = np.asarray(interpolant.value(grid))
            write_csv(args.emit_samples, "samples", ["re", "im", "g_re", "g_im"],
                      ([z.real, z.imag, g.real, g.imag] for z, g in zip(grid, vals)))
    ok = verdict.status in (solver.INFINITELY_MANY, solver.BOUNDARY_UNIQUE)
    return p.digest, results, warnings, EXIT_OK if ok else EXIT_NEGATIVE


def _permutation_mode(text: str):
    if text == "all":
        return "all"
    kind, _, count = text.partition(":")
    if kind == "sampled" and count.isdigit() and int(count) >= 1:
        return int(count)
    raise InputError(f"bad --permutations {text!r}; use all or sampled:N")


def cmd_check(args, seed):
    p = load_problem(args.input)
    Z, W = _require_targets(p)
    if args.order < 1:
        raise InputError("--order must be >= 1")
    if args.order + 1 > len(Z):
        raise InputError(f"--order {args.order} needs at least {args.order + 1} points, got {len(Z)}")
    rep = quotients.check_compatibility(Z, W, args.epsilon, args.order, args.tuple_budget,
                                        _permutation_mode(args.permutations), seed)
    warnings = []
    if rep.tuples_sampled:
        warnings.append({"sampled_tuples": rep.tuples_checked})
    if rep.permutations_sampled:
        warnings.append({"sampled_permutations": rep.permutations_checked})
    if rep.flagged:
        warnings.append({"degenerate_tuples": len(rep.flagged)})
    return p.digest, rep.as_dict(), warnings, EXIT_OK if rep.verdict else EXIT_NEGATIVE


def cmd_geometry(args, seed):
    p = load_problem(args.input)
    if len(p.points) == 0:
        raise InputError("field 'points' is empty")
    rep = geometry.geometry_report(p.points, args.order + 1, args.eta, args.bigM, args.alpha, args.dyadic_depth)
    warnings = []
    dec = rep.verdict.decomposition
    if dec.method == "greedy":
        warnings.append({"coloring": "greedy; part count is an upper bound"})
    return p.digest, rep.as_dict(), warnings, EXIT_OK if rep.verdict.passed else EXIT_NEGATIVE


def cmd_sampling(args, seed):
    p = load_problem(args.input)
    if len(p.points) < 2:
        raise InputError("at least two points are required")
    est = sampling.estimate_sampling_constant(p.points, args.family, args.trials, args.grid, seed)
    results = {"estimate": est.as_dict()}
    warnings = [{"skipped": note} for note in est.notes]
    code = EXIT_OK
    if args.density_R is not None:
        cover = geometry.r_dense_check(p.points, args.density_R, args.region_radius, args.grid_step)
        results["r_density"] = cover.as_dict()
        warnings.append({"truncation": f"R-density tested on |z| <= {args.region_radius}"})
        code = EXIT_OK if cover.passed else EXIT_NEGATIVE
    if args.csv_out:
        write_csv(args.csv_out, "sampling", ["family", "map", "ratio", "norm", "quotient"],
                  ([r["family"], json.dumps(jsonable(r["map"]), sort_keys=True), r["ratio"], r["norm"], r["quotient"]]
                   for r in est.per_trial))
    return p.digest, results, warnings, code


def cmd_annulus(args, seed):
    num, den = sampling.annulus_log_factors(args.theta, args.radius)
    results = {
        "theta": args.theta,
        "R": args.radius,
        "omega": num / den,
        "log_numerator": num,
        "log_denominator": den,
    }
    return None, results, [], EXIT_OK


COMMANDS = {
    "triangle": cmd_triangle,
    "solve": cmd_solve,
    "check": cmd_check,
    "geometry": cmd_geometry,
    "sampling": cmd_sampling,
    "annulus": cmd_annulus,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypick", description="Finite hyperbolic interpolation toolkit.")
    parser.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_input(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("input", help="JSON problem file")
        return sp

    sp = with_input("triangle", "difference-quotient triangle of the data")
    sp.add_argument("--csv-out")

    sp = with_input("solve", "solvability verdict and interpolant")
    sp.add_argument("--seed-map", default="zero", help="zero | constant:RE,IM | scaled:R | blaschke:D")
    sp.add_argument("--grid", type=int, default=64, help="verification grid is GRID x GRID")
    sp.add_argument("--emit-samples", metavar="PATH", help="write (z, g(z)) on the grid as CSV")

    sp = with_input("check", "epsilon-compatibility of the data")
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--permutations", default="all", help="all | sampled:N")
    sp.add_argument("--tuple-budget", type=int, default=10_000)

    sp = with_input("geometry", "separation, decomposition and density of the points")
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--order", type=int, default=0, help="interpolation order; order + 1 parts are allowed")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--bigM", type=float, default=1.0)
    sp.add_argument("--dyadic-depth", type=int, default=geometry.DEFAULT_DEPTH)

    sp = with_input("sampling", "sampling-constant witness and R-density")
    sp.add_argument("--family", default="scaled")
    sp.add_argument("--trials", type=int, default=16)
    sp.add_argument("--grid", type=int, default=64)
    sp.add_argument("--region-radius", type=float, default=0.9)
    sp.add_argument("--grid-step", type=float, default=0.25)
    sp.add_argument("--density-R", type=float, default=None)
    sp.add_argument("--csv-out")

    sp = sub.add_parser("annulus", help="annulus harmonic measure")
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--radius", type=float, required=True)

    # allow --seed after the subcommand as well
    for p in sub.choices.values():
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    return parser


def resolve_seed(flag) -> int:
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"${SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = resolve_seed(args.seed)
        digest, results, warnings, code = COMMANDS[args.command](args, seed)
    except (InputError, DomainError, DistinctnessError, ShapeError, ValueError) as exc:
        print(f"hypick {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {
        "command": args.command,
        "inputs_digest": digest,
        "results": results,
        "warnings": warnings,
        "seed": seed,
    }
    sys.stdout.write(json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
