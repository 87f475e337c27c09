"""Command line entry point: ``rbsd <subcommand> ...``.

Exit codes: 0 success, 1 bad data (or a failed validation), 2 usage error.
Every subcommand prints a JSON report on stdout unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .breakpoints import BreakpointProblem, optimize
from .design import (
    DesignKind,
    DesignSpec,
    InvalidDesignError,
    balance_violations,
    regularity_violations,
    sample,
)
from .estimation import ht_tau, ht_tau_lag
from .exposure import UnsupportedWindowError, window_probs
from .simulation import CarryoverModel, monte_carlo
from .synthetic import empirical_skew, gen_lognormal_items, gen_powerlaw_users

DESIGN_CHOICES = [k.value for k in DesignKind]


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _add_design_args(p: argparse.ArgumentParser, need_units: bool = True) -> None:
    p.add_argument("--design", required=True, choices=DESIGN_CHOICES)
    p.add_argument("--units", type=int, required=need_units, default=2)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--breakpoints", type=_int_list, default=None, help="e.g. 1,4,8")
    p.add_argument("--weights", type=_float_list, default=None, help="e.g. 0.5,0.5,0.5")


def _spec_from_args(args: argparse.Namespace) -> DesignSpec:
    return DesignSpec(
        kind=args.design,
        n_units=args.units,
        n_steps=args.steps,
        p=args.p,
        breakpoints=args.breakpoints,
        weights=args.weights,
    )


def _emit(payload: dict, out: Optional[str]) -> None:
    text = io.dumps(payload)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _threads(args: argparse.Namespace) -> int:
    return args.threads or os.cpu_count() or 1


def cmd_generate(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    W = sample(spec, args.seed)
    payload = {
        "schema": "generate",
        "schema_version": io.SCHEMA_VERSION,
        "spec": spec.to_dict(),
        "seed": args.seed,
    }
    if args.out:
        io.write_assignment_csv(W, args.out)
        io.write_sidecar(W, args.out)
        payload["csv"] = str(args.out)
        payload["sidecar"] = str(io.sidecar_path(args.out))
        sys.stdout.write(io.dumps(payload))
    else:
        payload["assignments"] = W.values.tolist()
        sys.stdout.write(io.dumps(payload))
    return 0


def _load_spec(args: argparse.Namespace, shape: tuple[int, int]) -> DesignSpec:
    sidecar = Path(args.design_json) if args.design_json else io.sidecar_path(args.input)
    spec = None
    if sidecar.exists():
        spec, _ = io.read_sidecar(sidecar)
    if getattr(args, "design", None):
        spec = DesignSpec(
            kind=args.design,
            n_units=shape[0],
            n_steps=shape[1],
            p=args.p if args.p is not None else (spec.p if spec else 0.5),
            breakpoints=args.breakpoints if args.breakpoints else None,
            weights=args.weights if args.weights else None,
        )
    if spec is None:
        raise io.DataError("no design given: pass --design or provide a sidecar JSON")
    if spec.shape != shape:
        raise io.DataError(f"design shape {spec.shape} does not match data shape {shape}")
    return spec


def cmd_validate(args: argparse.Namespace) -> int:
    W = io.read_assignment_csv(args.input)
    spec = _load_spec(args, W.shape)
    v = W.values
    problems: list[str] = []
    kind = spec.kind
    if kind is DesignKind.ITEM_RANDOMIZED:
        for n, row in enumerate(v, start=1):
            if (row != row[0]).any():
                problems.append(f"row {n} is not constant")
        treated = int(v[:, 0].sum())
        target = round(spec.p * spec.n_units)
        if treated != target:
            problems.append(f"column 1 sums to {treated}, expected {target} treated units")
    elif kind is DesignKind.SWITCHBACK:
        for s in range(v.shape[1]):
            if (v[:, s] != v[0, s]).any():
                problems.append(f"column {s + 1} is not constant")
        treated = int(v[0].sum())
        target = round(spec.p * spec.n_steps)
        if treated != target:
            problems.append(f"row 1 sums to {treated}, expected {target} treated timesteps")
    elif kind is DesignKind.REGULAR_SWITCHBACK:
        problems += regularity_violations(v, spec.breakpoints)
    elif kind is DesignKind.RBSD:
        problems += balance_violations(v, spec.p)
        problems += regularity_violations(v, spec.breakpoints)
    payload = {
        "schema": "validate",
        "schema_version": io.SCHEMA_VERSION,
        "spec": spec.to_dict(),
        "valid": not problems,
        "violations": problems,
    }
    _emit(payload, args.out)
    for line in problems:
        print(f"invalid: {line}", file=sys.stderr)
    return 0 if not problems else 1


def cmd_estimate(args: argparse.Namespace) -> int:
    W = io.read_assignment_csv(args.assignments)
    Y = io.read_outcome_csv(args.outcomes)
    if W.shape != Y.shape:
        raise io.DataError(f"assignment shape {W.shape} differs from outcome shape {Y.shape}")
    args.input = args.assignments
    args.design = None
    spec = _load_spec(args, W.shape)
    if args.lag is None:
        report = ht_tau(W, Y, spec, alpha=args.alpha)
    else:
        report = ht_tau_lag(W, Y, args.lag, spec, alpha=args.alpha)
    payload = {"schema": "estimate_report", "schema_version": io.SCHEMA_VERSION}
    payload.update(report.to_dict())
    payload["design"] = spec.to_dict()
    _emit(payload, args.out)
    return 0


def _load_scenario(path: str) -> dict:
    try:
        scenario = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise io.DataError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(scenario, dict):
        raise io.DataError(f"{path}: scenario must be a JSON object")
    return scenario


def _scenario_base(scenario: dict, root: Path):
    if "base_csv" in scenario:
        base_path = Path(scenario["base_csv"])
        if not base_path.is_absolute():
            base_path = root / base_path
        if not base_path.exists():
            raise io.DataError(f"base data file {base_path} does not exist")
        return io.read_outcome_csv(base_path)
    gen = dict(scenario.get("generator", {}))
    kind = gen.pop("kind", "lognormal")
    if kind != "lognormal":
        raise io.DataError(f"unsupported base generator {kind!r}")
    try:
        return gen_lognormal_items(
            n_units=gen.pop("units"), n_steps=gen.pop("steps"), seed=gen.pop("seed", 0), **gen
        )
    except (KeyError, TypeError) as exc:
        raise io.DataError(f"bad generator parameters: {exc}") from None


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.scenario)
    base = _scenario_base(scenario, Path(args.scenario).resolve().parent)
    n, s = base.shape
    specs = []
    for entry in scenario.get("designs", []):
        entry = dict(entry)
        entry.setdefault("n_units", n)
        entry.setdefault("n_steps", s)
        specs.append(DesignSpec.from_dict(entry))
    if not specs:
        raise io.DataError("scenario lists no designs")
    master_seed = args.seed if args.seed is not None else int(scenario.get("master_seed", 0))
    report = monte_carlo(
        base,
        specs,
        CarryoverModel(tuple(scenario.get("deltas", [0.0]))),
        estimators=tuple(scenario.get("estimators", ["tau", "tau_lag"])),
        reps=int(scenario.get("reps", 100)),
        alpha=float(scenario.get("alpha", 0.05)),
        master_seed=master_seed,
        lag=int(scenario.get("lag", 1)),
        threads=_threads(args),
    )
    payload = {"schema": "simulation_report", "schema_version": io.SCHEMA_VERSION}
    payload.update(report.to_dict())
    payload["designs"] = [spec.to_dict() for spec in specs]
    payload["base_shape"] = [n, s]
    _emit(payload, args.out or scenario.get("report_path"))
    rep_path = args.replicates_csv or scenario.get("replicates_path")
    if rep_path:
        with open(rep_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["design", "replicate", "estimator", "estimate", "std_error", "p_value"])
            for r in report.replicates:
                writer.writerow(
                    [r.design, r.replicate, r.estimator, repr(r.estimate), repr(r.std_error), repr(r.p_value)]
                )
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    problem = BreakpointProblem(args.steps, args.breakpoints, args.carryover)
    solution = optimize(problem, mode=args.mode, threads=_threads(args))
    payload = {"schema": "breakpoint_solution", "schema_version": io.SCHEMA_VERSION}
    payload.update(solution.to_dict())
    payload.update(n_steps=args.steps, n_breakpoints=args.breakpoints, carryover=args.carryover)
    _emit(payload, args.out)
    return 0


def cmd_probability(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    result = window_probs(spec, args.lag, step=args.step)
    payload = {"schema": "window_probability", "schema_version": io.SCHEMA_VERSION}
    payload.update(result.to_dict())
    _emit(payload, args.out)
    return 0


def cmd_gen_data(args: argparse.Namespace) -> int:
    payload = {"schema": "gen_data", "schema_version": io.SCHEMA_VERSION, "kind": args.kind, "seed": args.seed}
    if args.kind == "lognormal":
        Y = gen_lognormal_items(
            args.units,
            args.steps,
            seed=args.seed,
            mean_log=args.mean_log,
            sd_log=args.sd_log,
            zero_frac=args.zero_frac,
            winsor_pct=args.winsor_pct,
            jitter_sd=args.jitter_sd,
        )
        v = Y.values
        positive = v[v > 0]
        payload.update(
            n_units=args.units,
            n_steps=args.steps,
            mean=float(v.mean()),
            positive_fraction=float((v > 0).mean()),
            positive_skewness=empirical_skew(positive) if positive.size > 2 else None,
        )
        if args.out:
            io.write_outcome_csv(Y, args.out)
            payload["csv"] = str(args.out)
        else:
            payload["outcomes"] = v.tolist()
    else:
        table = gen_powerlaw_users(args.units, seed=args.seed)
        payload.update(table.to_dict())
        payload["skewness"] = table.skewness(args.winsor_pct)
        payload["winsor_pct"] = args.winsor_pct
        if args.out:
            Path(args.out).write_text(io.dumps(payload))
            return 0
    sys.stdout.write(io.dumps(payload))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbsd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
        return p

    p = add("generate", "sample an assignment matrix")
    _add_design_args(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_generate)

    p = add("validate", "check an assignment CSV against its design")
    p.add_argument("--input", required=True)
    p.add_argument("--design", choices=DESIGN_CHOICES, default=None)
    p.add_argument("--design-json", default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--breakpoints", type=_int_list, default=None)
    p.add_argument("--weights", type=_float_list, default=None)
    p.set_defaults(func=cmd_validate)

    p = add("estimate", "Horvitz-Thompson estimate from assignment and outcome CSVs")
    p.add_argument("--assignments", required=True)
    p.add_argument("--outcomes", required=True)
    p.add_argument("--design-json", default=None, help="defaults to <assignments>.json")
    p.add_argument("--lag", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_estimate)

    p = add("simulate", "Monte-Carlo evaluation from a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--replicates-csv", default=None)
    p.add_argument("--seed", type=_seed, default=None, help="overrides the scenario master_seed")
    p.set_defaults(func=cmd_simulate)

    p = add("optimize-breakpoints", "minimax breakpoint placement")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--breakpoints", type=int, required=True)
    p.add_argument("--carryover", type=int, required=True)
    p.add_argument("--mode", choices=["auto", "exhaustive", "dp"], default="auto")
    p.set_defaults(func=cmd_optimize)

    p = add("probability", "window exposure probabilities")
    _add_design_args(p, need_units=False)
    p.add_argument("--lag", type=int, default=0)
    p.add_argument("--step", type=int, default=None, help="window end, for uneven breakpoints")
    p.set_defaults(func=cmd_probability)

    p = add("gen-data", "synthetic skewed data")
    p.add_argument("--kind", choices=["lognormal", "powerlaw"], default="lognormal")
    p.add_argument("--units", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=14)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--mean-log", type=float, default=2.4507)
    p.add_argument("--sd-log", type=float, default=1.4764)
    p.add_argument("--zero-frac", type=float, default=0.7)
    p.add_argument("--winsor-pct", type=float, default=99.0)
    p.add_argument("--jitter-sd", type=float, default=0.1)
    p.set_defaults(func=cmd_gen_data)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (io.DataError, InvalidDesignError, UnsupportedWindowError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
