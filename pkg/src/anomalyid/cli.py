"""Command-line interface: formulas, simulation, certification, diagrams, export.

Every subcommand emits one machine-readable record, as a single JSON object
(default) or as a two-line CSV (header row + data row, nested keys joined
with dots).  Exact rationals are printed as "num/den" next to a 15-digit
decimal.  The exit status is 0 exactly when all internal tolerance checks
pass, mirrored by the "pass" field of the results.

The ANOMALYID_DIM_CAP environment variable overrides the global dimension
cap (default 4096).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any

from . import __version__
from .brauer import (
    WalledBrauerDiagram,
    bratteli_lattice,
    check_generator_relations,
    compose,
)
from .certification import certify_report, dual_gap_report, success_probability_formula
from .combinatorics import f_coeff
from .operators import DimensionCapError
from .sdpa import export_sdp
from .simulate import MODES, SimulationConfig, simulate

RELATION_TOL = 1e-12


def _fraction_fields(name: str, value: Fraction) -> dict[str, Any]:
    return {
        name: f"{value.numerator}/{value.denominator}",
        f"{name}_decimal": float(f"{float(value):.15g}"),
    }


def _flatten(prefix: str, obj: Any, out: dict[str, Any]) -> None:
    if isinstance(obj, dict):
        for key, val in obj.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), val, out)
    elif isinstance(obj, (list, tuple)):
        out[prefix] = json.dumps(obj, separators=(",", ":"))
    else:
        out[prefix] = obj


def emit(record: dict[str, Any], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(record, indent=2, default=str))
        return
    flat: dict[str, Any] = {}
    _flatten("", record, flat)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(flat.keys())
    writer.writerow(flat.values())
    sys.stdout.write(buf.getvalue())


def _record(command: str, params: dict[str, Any], results: dict[str, Any]) -> dict[str, Any]:
    return {
        "command": command,
        "version": __version__,
        "params": params,
        "results": results,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_formula(args: argparse.Namespace) -> dict[str, Any]:
    value = success_probability_formula(args.k, args.d)
    results: dict[str, Any] = _fraction_fields("p_success", value)
    results["f_table"] = {str(m): f_coeff(m, args.d) for m in range(args.k + 1)}
    results["pass"] = True
    return _record("formula", {"k": args.k, "d": args.d}, results)


def cmd_simulate(args: argparse.Namespace) -> dict[str, Any]:
    config = SimulationConfig(
        n=args.n, k=args.k, d=args.d, trials=args.trials, seed=args.seed, mode=args.mode
    )
    result = simulate(config)
    results: dict[str, Any] = {
        "estimate": result.estimate,
        "stderr": result.stderr,
        **_fraction_fields("analytic", result.analytic),
        "z_score": result.z_score,
        "pass": abs(result.z_score) <= 4.0,
    }
    params = {
        "n": args.n,
        "k": args.k,
        "d": args.d,
        "trials": args.trials,
        "seed": args.seed,
        "mode": args.mode,
    }
    return _record("simulate", params, results)


def cmd_certify(args: argparse.Namespace) -> dict[str, Any]:
    report = certify_report(args.n, args.k, args.d)
    results: dict[str, Any] = {
        "method": report.method,
        "born": report.born,
        **_fraction_fields("formula", report.formula),
        "zero_error_residual": report.zero_error,
        "completeness_residual": report.completeness,
        "min_tester_eigenvalue": report.min_tester_eig,
        "min_inconclusive_eigenvalue": report.min_inconclusive_eig,
    }
    ok = report.passed
    params: dict[str, Any] = {"n": args.n, "k": args.k, "d": args.d}
    if args.dual:
        if (args.n, args.k, args.d) != (4, 2, 2):
            raise DualUnsupportedError(
                f"--dual supports only n=4 k=2 d=2, got n={args.n} k={args.k} d={args.d}"
            )
        nu_list = [float(x) for x in args.nu.split(",")] if args.nu else [50.0, 200.0, 800.0]
        if any(nu <= 0 for nu in nu_list):
            raise ValueError("all --nu values must be positive")
        rows = dual_gap_report(nu_list)
        trace_expected = float(report.formula) * args.d ** (2 * args.n)
        eps_series = [row.epsilon for row in rows]
        dual_ok = all(
            eps_series[i + 1] <= eps_series[i] + 1e-12 for i in range(len(eps_series) - 1)
        )
        weak_duality_ok = all(row.dual_value >= float(report.formula) - 1e-10 for row in rows)
        results["dual"] = [
            {"nu": row.nu, "epsilon": row.epsilon, "dual_value": row.dual_value} for row in rows
        ]
        results["dual_trace_expected"] = trace_expected
        results["dual_epsilon_decreasing"] = dual_ok
        results["dual_weak_duality"] = weak_duality_ok
        ok = ok and dual_ok and weak_duality_ok
        params["nu"] = nu_list
    results["pass"] = ok
    return _record("certify", params, results)


class DualUnsupportedError(ValueError):
    pass


def _load_diagram(path: str) -> WalledBrauerDiagram:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    return WalledBrauerDiagram.from_json_dict(data)


def cmd_brauer(args: argparse.Namespace) -> dict[str, Any]:
    if args.brauer_command == "compose":
        a = _load_diagram(args.a)
        b = _load_diagram(args.b)
        scaled = compose(a, b)
        results = {
            "diagram": scaled.diagram.to_json_dict(),
            "loops": scaled.loop_count,
            "pass": True,
        }
        return _record("brauer.compose", {"a": args.a, "b": args.b}, results)
    if args.brauer_command == "relations":
        residuals = check_generator_relations(args.n, args.m, args.d)
        worst = max(residuals.values()) if residuals else 0.0
        results = {
            "residuals": {name: float(val) for name, val in residuals.items()},
            "max_residual": worst,
            "pass": worst <= RELATION_TOL,
        }
        return _record(
            "brauer.relations", {"n": args.n, "m": args.m, "d": args.d}, results
        )
    if args.brauer_command == "bratteli":
        lattice = bratteli_lattice(args.n, args.m, args.d)
        levels = []
        for level in lattice.levels:
            levels.append(
                [
                    {"left": list(lab.left), "right": list(lab.right), "paths": count}
                    for lab, count in sorted(
                        level.items(), key=lambda kv: (kv[0].left, kv[0].right)
                    )
                ]
            )
        total = lattice.dimension_sum()
        expected = args.d ** (args.n + args.m)
        results = {
            "levels": levels,
            "dimension_sum": total,
            "dimension_expected": expected,
            "pass": total == expected,
        }
        return _record(
            "brauer.bratteli", {"n": args.n, "m": args.m, "d": args.d}, results
        )
    raise ValueError(f"unknown brauer subcommand {args.brauer_command!r}")


def cmd_export_sdp(args: argparse.Namespace) -> dict[str, Any]:
    meta = export_sdp(args.n, args.k, args.d, args.out)
    expected = meta.pop("expected_optimum")
    results: dict[str, Any] = {
        "path": meta["path"],
        "n_constraints": meta["n_constraints"],
        "block_sizes": meta["block_sizes"],
        "patterns": [list(p) for p in meta["patterns"]],
        **_fraction_fields("expected_optimum", expected),
        "pass": True,
    }
    return _record("export-sdp", {"n": args.n, "k": args.k, "d": args.d, "out": args.out}, results)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anomalyid",
        description="Zero-error identification of anomalous unitary devices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("formula", help="exact protocol success probability")
    p.add_argument("--k", type=int, required=True, help="number of anomalies (>= 1)")
    p.add_argument("--d", type=int, required=True, help="local dimension (>= 2)")
    add_format(p)
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("simulate", help="Monte Carlo protocol simulation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="rao-blackwell")
    add_format(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="verify the optimal testers (and the dual at 4,2,2)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--dual", action="store_true", help="dual certificate table (n=4 k=2 d=2)")
    p.add_argument("--nu", type=str, default=None, help="comma-separated multipliers")
    add_format(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("brauer", help="walled Brauer diagram algebra")
    bsub = p.add_subparsers(dest="brauer_command", required=True)
    pc = bsub.add_parser("compose", help="compose two diagram JSON files")
    pc.add_argument("--a", required=True, help="top diagram (JSON file)")
    pc.add_argument("--b", required=True, help="bottom diagram (JSON file)")
    add_format(pc)
    pc.set_defaults(func=cmd_brauer)
    pr = bsub.add_parser("relations", help="check the generator relations")
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--m", type=int, required=True)
    pr.add_argument("--d", type=int, required=True)
    add_format(pr)
    pr.set_defaults(func=cmd_brauer)
    pb = bsub.add_parser("bratteli", help="mixed irrep lattice with path counts")
    pb.add_argument("--n", type=int, required=True)
    pb.add_argument("--m", type=int, required=True)
    pb.add_argument("--d", type=int, required=True)
    add_format(pb)
    pb.set_defaults(func=cmd_brauer)

    p = sub.add_parser("export-sdp", help="write the parallel tester SDP in SDPA sparse format")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", required=True, help="output .dat-s path")
    add_format(p)
    p.set_defaults(func=cmd_export_sdp)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record = args.func(args)
    except DimensionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit(record, args.format)
    return 0 if record["results"].get("pass", False) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
