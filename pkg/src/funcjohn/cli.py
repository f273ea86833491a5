"""Command-line entry point.

Configs and reports are JSON (decimal floats round-trip exactly via the
shortest-repr encoding); curve data is emitted as CSV.  Reports carry a
determinism hash computed over everything except the timing field, so two
runs with the same config and seed produce hash-identical reports.

Exit codes: 0 all certificates pass, 1 certificate failure, 2 config parse
error, 3 precondition failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import acceptance, polar
from .bump import bump_from_decomposition, norm_gap_probe
from .decomp import (
    decomposition_from_records,
    decomposition_to_records,
    generate_decomposition,
    hull_ball_margin,
    regularize_decomposition,
    verify_decomposition,
)
from .johnsolve import (
    InfeasibleProblemError,
    NoContactsError,
    SolverOptions,
    extract_and_certify,
    height_curve,
    phi_concavity_violation,
    solve_fixed_height,
    solve_john,
)
from .lcfunc import (
    BallIndicator,
    Bump,
    ExpNorm,
    Gaussian,
    HalfRestriction,
    Height,
    HeightPower,
    LogConcaveFunction,
    PolarHeightPower,
    Positioned,
)
from .position import make_position
from .verify import (
    check_domination,
    john_inclusion_check,
    lowner_counterexample,
    sandwich_construct,
)

EXIT_PASS = 0
EXIT_CERT_FAIL = 1
EXIT_CONFIG_ERROR = 2
EXIT_PRECONDITION = 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config -> objects
# ---------------------------------------------------------------------------


def position_from_config(data: dict):
    """Position dict -> AffinePosition.  The stored convention is the
    inverse form g(x) = alpha * w(A^{-1}(x - a)); configs may also supply
    the forward form alpha * w(Ax + a) via "form": "forward", which is
    converted on parse."""
    alpha = float(data.get("alpha", 1.0))
    A = np.asarray(data["A"], dtype=float)
    a = np.asarray(data.get("a", np.zeros(A.shape[0])), dtype=float)
    form = data.get("form", "inverse")
    if form == "forward":
        Ainv = np.linalg.inv(A)
        A, a = Ainv, -Ainv @ a
    elif form != "inverse":
        raise ConfigError(f"unknown position form {form!r}")
    return make_position(alpha, A, a,
                         positive_definite=bool(data.get("positive_definite",
                                                         False)))


def function_from_config(data: dict) -> LogConcaveFunction:
    if not isinstance(data, dict) or "variant" not in data:
        raise ConfigError("function config must be a dict with a 'variant'")
    variant = data["variant"]
    d = int(data.get("dimension", 1))
    if variant == "height":
        f = Height(dimension=d)
    elif variant == "height_power":
        f = HeightPower(dimension=d, s=float(data["s"]))
    elif variant == "ball_indicator":
        f = BallIndicator(dimension=d, radius=float(data.get("radius", 1.0)),
                          center=tuple(data["center"]) if "center" in data
                          else None)
    elif variant == "gaussian":
        f = Gaussian(dimension=d)
    elif variant == "expnorm":
        f = ExpNorm(dimension=d, p=float(data["p"]))
    elif variant == "polar_height_power":
        f = PolarHeightPower(dimension=d, s=float(data["s"]))
    elif variant == "bump":
        f = Bump(anchors=tuple(tuple(float(v) for v in u)
                               for u in data["anchors"]))
    elif variant == "half_restriction":
        f = HalfRestriction(inner=function_from_config(data["inner"]),
                            normal=tuple(float(v) for v in data["normal"]))
    else:
        raise ConfigError(f"unknown function variant {variant!r}")
    if "position" in data:
        f = Positioned(inner=f, position=position_from_config(data["position"]))
    return f


def solver_options_from_config(data: dict, seed: int) -> SolverOptions:
    opts = data.get("solver", {}) if isinstance(data, dict) else {}
    return SolverOptions(
        seed=int(opts.get("seed", seed)),
        restarts=int(opts.get("restarts", 2)),
        grid_density=int(opts.get("grid_density", 0)),
        constraint_tol=float(opts.get("constraint_tol", 1e-8)),
        step_tol=float(opts.get("step_tol", 1e-10)),
        max_outer_iterations=int(opts.get("max_outer_iterations", 200)),
    )


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def _jsonable(obj):
    """Recursive conversion of dataclasses / numpy values into plain JSON
    types; non-finite floats become tagged strings."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {"_record": type(obj).__name__}
        out.update({k: _jsonable(v)
                    for k, v in dataclasses.asdict(obj).items()})
        return out
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def determinism_hash(report: dict) -> str:
    scrubbed = {k: v for k, v in report.items() if k != "timing"}
    blob = json.dumps(scrubbed, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_report(report: dict, out_dir: str | None, started: float) -> dict:
    report["timing"] = {"wall_clock_seconds": time.perf_counter() - started}
    report["determinism_hash"] = determinism_hash(report)
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / "report.json").write_text(text + "\n")
    else:
        print(text)
    return report


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen_decomp(args, config, started):
    dec = generate_decomposition(args.d, args.seed)
    if args.regularize:
        dec = regularize_decomposition(dec, args.regularize, seed=args.seed)
    res = verify_decomposition(dec)
    passed = res.passes(1e-10)
    report = {
        "command": "gen-decomp",
        "config": {"d": args.d, "seed": args.seed,
                   "regularize": args.regularize},
        "decomposition": decomposition_to_records(dec),
        "residuals": _jsonable(res),
        "passed": passed,
    }
    write_report(report, args.out, started)
    if args.out:
        Path(args.out, "decomposition.json").write_text(
            json.dumps(decomposition_to_records(dec), indent=2) + "\n")
    return EXIT_PASS if passed else EXIT_CERT_FAIL


def cmd_verify_decomp(args, config, started):
    dec = decomposition_from_records(config)
    res = verify_decomposition(dec)
    margin = hull_ball_margin(dec) if res.passes(1e-8) else None
    passed = margin is not None and margin.margin >= -1e-9
    report = {
        "command": "verify-decomp",
        "config": config,
        "residuals": _jsonable(res),
        "hull_margin": _jsonable(margin) if margin is not None else None,
        "passed": passed,
    }
    write_report(report, args.out, started)
    return EXIT_PASS if passed else EXIT_CERT_FAIL


def cmd_bump(args, config, started):
    dec = decomposition_from_records(config)
    bf = bump_from_decomposition(dec)
    gap = norm_gap_probe(bf) if bf.regular else None
    passed = gap is None or gap.gap > 0
    report = {
        "command": "bump",
        "config": config,
        "regular": bf.regular,
        "anchors": _jsonable(bf.function.anchors),
        "sup_norm": bf.function.sup_norm(),
        "norm_gap": _jsonable(gap),
        "passed": passed,
    }
    write_report(report, args.out, started)
    return EXIT_PASS if passed else EXIT_CERT_FAIL


def _solve_common(args, config, started, fixed_xi=None):
    f = function_from_config(config["f"])
    w = function_from_config(config.get("w", {"variant": "height",
                                              "dimension": f.dim}))
    opts = solver_options_from_config(config, args.seed)
    if fixed_xi is None:
        rep = solve_john(f, w, opts)
    else:
        rep = solve_fixed_height(f, w, fixed_xi, opts)
    certified = None
    if config.get("certify") and isinstance(w, Height):
        try:
            rep = extract_and_certify(f, rep)
            certified = rep.recovered_weights is not None
        except (NoContactsError, ValueError) as exc:
            certified = False
            rep = dataclasses.replace(
                rep, diagnostics={**rep.diagnostics,
                                  "certification_error": str(exc)})
    passed = rep.feasible and certified is not False
    report = {
        "command": "solve-john" if fixed_xi is None else "fixed-height",
        "config": config,
        "seed": args.seed,
        "solve": _jsonable(rep),
        "certified": certified,
        "passed": passed,
    }
    write_report(report, args.out, started)
    return EXIT_PASS if passed else EXIT_CERT_FAIL


def cmd_solve_john(args, config, started):
    return _solve_common(args, config, started)


def cmd_fixed_height(args, config, started):
    xi = args.xi if args.xi is not None else config.get("xi")
    if xi is None:
        raise ConfigError("fixed-height needs --xi or config key 'xi'")
    return _solve_common(args, config, started, fixed_xi=float(xi))


def cmd_height_curve(args, config, started):
    f = function_from_config(config["f"])
    w = function_from_config(config.get("w", {"variant": "height",
                                              "dimension": f.dim}))
    alphas = [float(v) for v in config["alphas"]]
    opts = solver_options_from_config(config, args.seed)
    samples = height_curve(f, w, alphas, opts)
    violation = phi_concavity_violation(samples)
    passed = all(s.feasible for s in samples) and violation <= 1e-6
    rows = [[s.alpha, s.t, s.psi, s.phi, s.feasible, s.max_violation]
            for s in samples]
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        with open(Path(args.out, "curve.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alpha", "t", "psi", "phi", "feasible",
                             "max_violation"])
            writer.writerows(rows)
    report = {
        "command": "height-curve",
        "config": config,
        "seed": args.seed,
        "samples": _jsonable(samples),
        "concavity_violation": _jsonable(violation),
        "passed": passed,
    }
    write_report(report, args.out, started)
    return EXIT_PASS if passed else EXIT_CERT_FAIL


def cmd_polar(args, config, started):
    f = function_from_config(config["f"])
    points = np.asarray(config["points"], dtype=float)
    if points.ndim == 1:
        points = points[:, None] if f.dim == 1 else points[None, :]
    values = polar.polar_eval_many(f, points)
    report = {
        "command": "polar",
        "config": config,
        "values": _jsonable(values),
        "passed": True,
    }
    write_report(report, args.out, started)
    return EXIT_PASS


def cmd_john_check(args, config, started):
    f = function_from_config(config["f"])
    rec = john_inclusion_check(f, seed=args.seed)
    report = {
        "command": "john-check",
        "config": config,
        "seed": args.seed,
        "record": _jsonable(rec),
        "passed": rec.passed,
    }
    write_report(report, args.out, started)
    return EXIT_PASS if rec.passed else EXIT_CERT_FAIL


def cmd_sandwich(args, config, started):
    f = function_from_config(config["f"])
    rec = sandwich_construct(f, seed=args.seed)
    report = {
        "command": "sandwich",
        "config": config,
        "seed": args.seed,
        "record": _jsonable(rec),
        "passed": rec.passed,
    }
    write_report(report, args.out, started)
    return EXIT_PASS if rec.passed else EXIT_CERT_FAIL


def cmd_lowner_check(args, config, started):
    kind = args.kind or config.get("kind")
    if kind not in ("expnorm", "polar_height_power"):
        raise ConfigError("lowner-check needs --kind expnorm or "
                          "polar_height_power")
    rec = lowner_counterexample(
        kind, args.d, p=args.p, s=args.s,
        trials=int(config.get("trials", 200)), seed=args.seed)
    report = {
        "command": "lowner-check",
        "config": {"kind": kind, "d": args.d, "p": args.p, "s": args.s,
                   **config},
        "seed": args.seed,
        "record": _jsonable(rec),
        "passed": rec.passed,
    }
    write_report(report, args.out, started)
    return EXIT_PASS if rec.passed else EXIT_CERT_FAIL


def cmd_corpus(args, config, started):
    numbers = None
    if args.criteria:
        numbers = sorted({int(v) for v in args.criteria.split(",")})
        unknown = [n for n in numbers if n not in acceptance.CRITERIA]
        if unknown:
            raise ConfigError(f"unknown criteria: {unknown}")
    results = acceptance.run_all(numbers)
    for res in results:
        print(res.verdict_line(), flush=True)
    passed = all(r.passed for r in results)
    report = {
        "command": "corpus",
        "config": {"criteria": numbers},
        "results": _jsonable(results),
        "passed": passed,
    }
    if args.out:
        write_report(report, args.out, started)
    return EXIT_PASS if passed else EXIT_CERT_FAIL


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


COMMANDS = {
    "gen-decomp": cmd_gen_decomp,
    "verify-decomp": cmd_verify_decomp,
    "bump": cmd_bump,
    "solve-john": cmd_solve_john,
    "fixed-height": cmd_fixed_height,
    "height-curve": cmd_height_curve,
    "polar": cmd_polar,
    "john-check": cmd_john_check,
    "sandwich": cmd_sandwich,
    "lowner-check": cmd_lowner_check,
    "corpus": cmd_corpus,
}

_NEEDS_CONFIG = {"verify-decomp", "bump", "solve-john", "fixed-height",
                 "height-curve", "polar", "john-check", "sandwich"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="funcjohn",
        description="John positions, polars, and decompositions of the "
                    "identity for log-concave functions")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--d", type=int, default=1)
        if name == "gen-decomp":
            p.add_argument("--regularize", type=int, default=0)
        if name == "fixed-height":
            p.add_argument("--xi", type=float, default=None)
        if name == "lowner-check":
            p.add_argument("--kind", default=None)
            p.add_argument("--p", type=float, default=2.0)
            p.add_argument("--s", type=float, default=1.0)
        if name == "corpus":
            p.add_argument("--criteria", default=None)
    return parser


def main(argv=None) -> int:
    started = time.perf_counter()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command in _NEEDS_CONFIG and not config:
            raise ConfigError(f"{args.command} requires --config")
        return COMMANDS[args.command](args, config, started)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (KeyError, TypeError) as exc:
        print(f"config error: {exc!r}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ValueError, InfeasibleProblemError) as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
