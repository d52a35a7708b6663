"""Command-line front end.

Subcommands: run, verify, gen, experiment, table2. Exit codes: 0 ok,
1 a requested property failed to hold, 2 a brute-force budget was exceeded,
3 input error. The NETMATCH_OUT environment variable overrides the default
output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .core import InstanceFormatError, load_instance
from .experiments import (
    ExperimentSpec,
    PRESETS,
    run_experiment,
    write_table2_csv,
)
from .fixtures import FIXTURE_NAMES, fixture_path
from .generators import (
    GenSpec,
    edge_count,
    graph_from_spec,
    instance_from_spec,
    leaf_count,
)
from .core import save_instance
from .mechanisms import Mechanism, MechanismError, run_mechanism, run_to_json
from .verifier import (
    Budget,
    BudgetExceededError,
    CoalitionFamily,
    check_ic,
    check_ir,
    find_blocking_coalition,
    is_pareto_optimal,
    truthful_reports,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_BUDGET = 2
EXIT_INPUT = 3

PROPERTY_CHOICES = ("ir", "ic", "po", "stable", "stable-wcc", "stable-cc")


class CliInputError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 3
        raise CliInputError(message)


def default_out_dir() -> Path:
    return Path(os.environ.get("NETMATCH_OUT", "netmatch-out"))


def _resolve_instance(arg: str) -> Path:
    path = Path(arg)
    if path.exists():
        return path
    stem = arg[:-5] if arg.endswith(".json") else arg
    if "/" not in arg and stem in FIXTURE_NAMES:
        return fixture_path(stem)
    raise CliInputError(f"instance file not found: {arg}")


def _load(arg: str):
    path = _resolve_instance(arg)
    try:
        return load_instance(path)
    except json.JSONDecodeError as exc:
        raise CliInputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    except InstanceFormatError as exc:
        raise CliInputError(f"{path}: {exc}")


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    inst = _load(args.instance)
    try:
        run = run_mechanism(args.mechanism, inst, seed=args.seed)
    except MechanismError as exc:
        raise CliInputError(str(exc))
    _emit(run_to_json(run), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    mech = Mechanism(args.mechanism)
    wanted = [p.strip() for p in args.properties.split(",") if p.strip()]
    for p in wanted:
        if p not in PROPERTY_CHOICES:
            raise CliInputError(f"unknown property {p!r} (choose from {PROPERTY_CHOICES})")
    budget = Budget(max_evals=args.budget, deadline_ms=args.budget_ms)
    reports = []
    try:
        for prop in wanted:
            if prop == "ir":
                reports.append(check_ir(mech, inst, seed=args.seed))
            elif prop == "ic":
                seeds = tuple(range(args.ic_seeds)) if mech.seeded else (args.seed,)
                reports.append(
                    check_ic(
                        mech,
                        inst,
                        seeds=seeds,
                        budget=budget,
                        others_samples=args.others_samples,
                        sample_seed=args.seed,
                        sample=args.ic_sample,
                    )
                )
            elif prop == "po":
                alloc = run_mechanism(mech, inst, seed=args.seed).allocation
                reports.append(is_pareto_optimal(inst, alloc))
            else:
                family = {
                    "stable": CoalitionFamily.CONNECTED,
                    "stable-wcc": CoalitionFamily.WEAKLY_COMPLETE,
                    "stable-cc": CoalitionFamily.COMPLETE,
                }[prop]
                alloc = run_mechanism(mech, inst, seed=args.seed).allocation
                reports.append(find_blocking_coalition(inst, alloc, family))
    except MechanismError as exc:
        raise CliInputError(str(exc))
    payload = {
        "instance": str(_resolve_instance(args.instance)),
        "mechanism": mech.value,
        "seed": args.seed,
        "reports": [r.to_json() for r in reports],
        "all_hold": all(r.holds for r in reports),
    }
    _emit(payload, args.out)
    return EXIT_OK if payload["all_hold"] else EXIT_VIOLATED


def cmd_gen(args) -> int:
    params = []
    for name in ("p", "ub", "tau", "alpha", "k", "beta"):
        value = getattr(args, name)
        if value is not None:
            params.append((name, float(value)))
    spec = GenSpec(family=args.family, n=args.n, seed=args.seed, params=tuple(params))
    try:
        inst = instance_from_spec(spec)
    except ValueError as exc:
        raise CliInputError(str(exc))
    out = Path(args.out) if args.out else Path(f"{args.family}-{args.n}-{args.seed}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_instance(inst, out)
    graph = graph_from_spec(spec)
    summary = f"wrote {out}: n={args.n} edges={edge_count(graph)}"
    if args.family == "tree":
        summary += f" n_leaf={leaf_count(graph)}"
    print(summary)
    return EXIT_OK


def cmd_experiment(args) -> int:
    out_dir = Path(args.out) if args.out else default_out_dir()
    if args.preset == "table2":
        path = write_table2_csv(out_dir / "table2.csv")
        print(f"wrote {path}")
        return EXIT_OK
    grid = None
    if args.grid:
        try:
            grid = tuple(float(v) if "." in v else int(v) for v in args.grid.split(","))
        except ValueError:
            raise CliInputError(f"bad grid: {args.grid!r}")
    mechanisms = tuple(args.mechanisms.split(",")) if args.mechanisms else None
    try:
        spec = ExperimentSpec.for_preset(
            args.preset,
            out_dir,
            base_seed=args.seed,
            replicates=args.replicates,
            mechanisms=mechanisms,
            grid=grid,
            jobs=args.jobs,
            n=args.n,
            beta=args.beta,
        )
    except ValueError as exc:
        raise CliInputError(str(exc))
    path = run_experiment(spec)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_table2(args) -> int:
    out_dir = Path(args.out) if args.out else default_out_dir()
    path = write_table2_csv(out_dir / "table2.csv")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> Parser:
    parser = Parser(prog="netmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a mechanism on an instance file")
    run_p.add_argument("instance", help="instance JSON path or bundled fixture name")
    run_p.add_argument("--mechanism", required=True, choices=[m.value for m in Mechanism])
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    run_p.set_defaults(func=cmd_run)

    ver_p = sub.add_parser("verify", help="brute-force property checks")
    ver_p.add_argument("instance")
    ver_p.add_argument("--mechanism", required=True, choices=[m.value for m in Mechanism])
    ver_p.add_argument("--properties", default=",".join(PROPERTY_CHOICES))
    ver_p.add_argument("--seed", type=int, default=0)
    ver_p.add_argument("--ic-seeds", type=int, default=16, help="tie-breaking seeds for seeded mechanisms")
    ver_p.add_argument("--ic-sample", type=int, default=0, help="sample this many misreports per agent instead of exhausting (absence of a violation is then not a proof)")
    ver_p.add_argument("--others-samples", type=int, default=0, help="also test against sampled misreports of the other agents")
    ver_p.add_argument("--budget", type=int, default=2_000_000, help="max mechanism evaluations")
    ver_p.add_argument("--budget-ms", type=float, default=None, help="wall-clock limit")
    ver_p.add_argument("--out", default=None)
    ver_p.set_defaults(func=cmd_verify)

    gen_p = sub.add_parser("gen", help="generate a random instance file")
    gen_p.add_argument("--family", required=True, choices=("er", "tree", "girg", "smallworld"))
    gen_p.add_argument("--n", type=int, required=True)
    gen_p.add_argument("--p", type=float, default=None, help="edge probability (er)")
    gen_p.add_argument("--ub", type=int, default=None, help="max children per node (tree)")
    gen_p.add_argument("--tau", type=float, default=None, help="weight exponent (girg)")
    gen_p.add_argument("--alpha", type=float, default=None, help="distance decay (girg)")
    gen_p.add_argument("--k", type=int, default=None, help="lattice neighbors (smallworld)")
    gen_p.add_argument("--beta", type=float, default=None, help="rewiring probability (smallworld)")
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--out", default=None)
    gen_p.set_defaults(func=cmd_gen)

    exp_p = sub.add_parser("experiment", help="run a preset sweep, writing CSV and SVG")
    exp_p.add_argument("--preset", required=True, choices=sorted(PRESETS) + ["table2"])
    exp_p.add_argument("--replicates", type=int, default=None)
    exp_p.add_argument("--seed", type=int, default=0)
    exp_p.add_argument("--grid", default=None, help="comma-separated sweep values")
    exp_p.add_argument("--mechanisms", default=None, help="comma-separated subset of ttc,swn,swc,ls")
    exp_p.add_argument("--jobs", type=int, default=1)
    exp_p.add_argument("--n", type=int, default=50)
    exp_p.add_argument("--beta", type=float, default=0.3)
    exp_p.add_argument("--out", default=None)
    exp_p.set_defaults(func=cmd_experiment)

    tab_p = sub.add_parser("table2", help="write the fig1 classification table CSV")
    tab_p.add_argument("--out", default=None)
    tab_p.set_defaults(func=cmd_table2)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
