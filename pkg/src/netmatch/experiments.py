"""Experiment presets: parameter sweeps over random instances, CSV + SVG out.

Seed scheme (documented contract, stable across runs and platforms): every
stream derives from the base seed via ``derive_seed``:

- graph of replicate r at sweep value v:   derive(base, "graph", preset, v, r)
- preferences of replicate r:              derive(base, "prefs", preset, r)
- LS tie-breaking of replicate r at v:     derive(base, "mech",  preset, v, r)

Preferences deliberately ignore the sweep value, so a replicate keeps the
same preference profile while the graph parameter varies. The ``seed``
column of a result row records the graph seed.

Interrupted runs resume: rows already present in the output CSV are kept and
only missing (mechanism, sweep, replicate) cells are computed. A finished
file is byte-identical to a fresh run except for the runtime_ms column.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import AgentType, Instance, load_instance, with_preference
from .generators import (
    connectivity,
    gen_er,
    gen_girg,
    gen_prefs,
    gen_smallworld,
    gen_tree,
    leaf_count,
)
from .fixtures import fixture_path
from .mechanisms import Mechanism, allocate
from .metrics import avg_ascension
from .plotting import Series, write_line_svg
from .seeds import derive_seed
from .verifier import classify_allocations

CSV_COLUMNS = (
    "preset",
    "mechanism",
    "sweep_value",
    "replicate",
    "seed",
    "n",
    "D",
    "extra",
    "runtime_ms",
)

GIRG_TAU_DEFAULT = 2.9
GIRG_ALPHA_DEFAULT = 6.0


@dataclass(frozen=True)
class PresetInfo:
    family: str
    kind: str  # "matching" or "connectivity"
    sweep_name: str
    default_grid: tuple
    default_mechanisms: tuple[str, ...]
    default_replicates: int
    notes: tuple[str, ...] = ()


PRESETS: dict[str, PresetInfo] = {
    "p-sweep": PresetInfo(
        family="er",
        kind="matching",
        sweep_name="p",
        default_grid=tuple(round(0.02 * i, 2) for i in range(1, 51)),
        default_mechanisms=("ttc", "swn", "ls"),
        default_replicates=100,
        notes=(
            "preferences are drawn once per replicate and reused across the "
            "whole p grid, so curves vary only through graph density",
        ),
    ),
    "tree-size": PresetInfo(
        family="tree",
        kind="matching",
        sweep_name="n",
        default_grid=tuple(range(10, 101, 10)),
        default_mechanisms=("swn", "swc", "ls"),
        default_replicates=100,
        notes=("child counts drawn uniformly from [1, n-1] at every node",),
    ),
    "tree-leaf": PresetInfo(
        family="tree",
        kind="matching",
        sweep_name="ub",
        default_grid=tuple(range(1, 50)),
        default_mechanisms=("swn", "swc", "ls"),
        default_replicates=100,
        notes=("extra column records the rooted tree's leaf count",),
    ),
    "girg-n": PresetInfo(
        family="girg",
        kind="matching",
        sweep_name="n",
        default_grid=tuple(range(5, 51, 5)),
        default_mechanisms=("ttc", "swn", "ls"),
        default_replicates=100,
    ),
    "girg-tau": PresetInfo(
        family="girg",
        kind="connectivity",
        sweep_name="tau",
        default_grid=tuple(round(2.2 + 0.1 * i, 1) for i in range(9)),
        default_mechanisms=(),
        default_replicates=5000,
        notes=("graph size defaults to n=50; the source experiments do not pin it",),
    ),
    "girg-alpha": PresetInfo(
        family="girg",
        kind="connectivity",
        sweep_name="alpha",
        default_grid=(2.0, 4.0, 6.0, 8.0),
        default_mechanisms=(),
        default_replicates=5000,
        notes=("graph size defaults to n=50; the source experiments do not pin it",),
    ),
    "smallworld-k": PresetInfo(
        family="smallworld",
        kind="matching",
        sweep_name="k",
        default_grid=(6, 10, 14, 18, 22, 26, 30, 34, 38, 42, 46, 48),
        default_mechanisms=("ttc", "swn", "ls"),
        default_replicates=100,
        notes=(
            "ring-lattice neighbor counts must be even and below n, so the "
            "grid uses even k up to n-2",
        ),
    ),
}


@dataclass(frozen=True)
class ExperimentSpec:
    preset: str
    replicates: int
    base_seed: int
    mechanisms: tuple[str, ...]
    grid: tuple
    out_dir: Path
    jobs: int = 1
    n: int = 50
    beta: float = 0.3

    @staticmethod
    def for_preset(
        preset: str,
        out_dir: str | Path,
        base_seed: int = 0,
        replicates: int | None = None,
        mechanisms: Sequence[str] | None = None,
        grid: Sequence | None = None,
        jobs: int = 1,
        n: int = 50,
        beta: float = 0.3,
    ) -> "ExperimentSpec":
        info = PRESETS.get(preset)
        if info is None:
            raise ValueError(f"unknown preset {preset!r} (expected one of {sorted(PRESETS)} or 'table2')")
        mechs = tuple(mechanisms) if mechanisms is not None else info.default_mechanisms
        if "swc" in mechs and info.family != "tree":
            raise ValueError("swc only runs in tree presets")
        reps = replicates if replicates is not None else info.default_replicates
        if reps < 1:
            raise ValueError("replicates must be at least 1")
        return ExperimentSpec(
            preset=preset,
            replicates=reps,
            base_seed=base_seed,
            mechanisms=mechs,
            grid=tuple(grid) if grid is not None else info.default_grid,
            out_dir=Path(out_dir),
            jobs=jobs,
            n=n,
            beta=beta,
        )


def _sweep_str(value) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _build_graph(spec: ExperimentSpec, sweep, graph_seed: int):
    family = PRESETS[spec.preset].family
    name = PRESETS[spec.preset].sweep_name
    if family == "er":
        return gen_er(spec.n, float(sweep), graph_seed), spec.n
    if family == "tree":
        if name == "n":
            size = int(sweep)
            return gen_tree(size, max(size - 1, 1), graph_seed), size
        return gen_tree(spec.n, int(sweep), graph_seed), spec.n
    if family == "girg":
        if name == "n":
            size = int(sweep)
            return gen_girg(size, GIRG_TAU_DEFAULT, GIRG_ALPHA_DEFAULT, graph_seed), size
        if name == "tau":
            return gen_girg(spec.n, float(sweep), GIRG_ALPHA_DEFAULT, graph_seed), spec.n
        return gen_girg(spec.n, GIRG_TAU_DEFAULT, float(sweep), graph_seed), spec.n
    return gen_smallworld(spec.n, int(sweep), spec.beta, graph_seed), spec.n


def _point_rows(args: tuple) -> list[dict[str, str]]:
    """All CSV rows for one (sweep value, replicate) grid point."""
    spec: ExperimentSpec
    spec, sweep, rep = args
    info = PRESETS[spec.preset]
    sweep_s = _sweep_str(sweep)
    graph_seed = derive_seed(spec.base_seed, "graph", spec.preset, sweep_s, rep)

    if info.kind == "connectivity":
        t0 = time.perf_counter()
        graph, size = _build_graph(spec, sweep, graph_seed)
        ms = (time.perf_counter() - t0) * 1000.0
        return [
            {
                "preset": spec.preset,
                "mechanism": "-",
                "sweep_value": sweep_s,
                "replicate": str(rep),
                "seed": str(graph_seed),
                "n": str(size),
                "D": "",
                "extra": f"{connectivity(graph):.6f}",
                "runtime_ms": f"{ms:.3f}",
            }
        ]

    graph, size = _build_graph(spec, sweep, graph_seed)
    prefs = gen_prefs(size, derive_seed(spec.base_seed, "prefs", spec.preset, rep))
    inst = Instance(
        n=size,
        types=tuple(AgentType(prefs[i], graph[i]) for i in range(size)),
        initial_set=frozenset({0}),
    )
    if info.family == "tree":
        extra = str(leaf_count(graph))
    else:
        extra = f"{connectivity(graph):.6f}"
    mech_seed = derive_seed(spec.base_seed, "mech", spec.preset, sweep_s, rep)
    rows = []
    for mech in spec.mechanisms:
        t0 = time.perf_counter()
        alloc = allocate(Mechanism(mech), inst, seed=mech_seed)
        ms = (time.perf_counter() - t0) * 1000.0
        d = avg_ascension(inst, alloc)
        rows.append(
            {
                "preset": spec.preset,
                "mechanism": mech,
                "sweep_value": sweep_s,
                "replicate": str(rep),
                "seed": str(graph_seed),
                "n": str(size),
                "D": f"{d.numerator / d.denominator:.6f}",
                "extra": extra,
                "runtime_ms": f"{ms:.3f}",
            }
        )
    return rows


def _row_key(row: dict[str, str]) -> tuple[str, str, str, str]:
    return (row["preset"], row["mechanism"], row["sweep_value"], row["replicate"])


def read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_experiment(spec: ExperimentSpec) -> Path:
    """Execute the preset grid, write CSV + manifest + SVG, return CSV path."""
    info = PRESETS[spec.preset]
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = spec.out_dir / f"{spec.preset}.csv"

    done: dict[tuple, dict[str, str]] = {}
    if csv_path.exists():
        for row in read_rows(csv_path):
            done[_row_key(row)] = row

    points = [(sweep, rep) for sweep in spec.grid for rep in range(spec.replicates)]
    wanted_mechs = spec.mechanisms if info.kind == "matching" else ("-",)

    def missing(point: tuple) -> bool:
        sweep_s = _sweep_str(point[0])
        return any(
            (spec.preset, m, sweep_s, str(point[1])) not in done for m in wanted_mechs
        )

    todo = [(spec, sweep, rep) for sweep, rep in points if missing((sweep, rep))]
    if spec.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = pool.map(
                _point_rows, todo, chunksize=max(1, len(todo) // (spec.jobs * 8))
            )
            for rows in chunks:
                for row in rows:
                    done[_row_key(row)] = row
    else:
        for task in todo:
            for row in _point_rows(task):
                done[_row_key(row)] = row

    ordered = []
    for sweep, rep in points:
        sweep_s = _sweep_str(sweep)
        for mech in wanted_mechs:
            key = (spec.preset, mech, sweep_s, str(rep))
            if key in done:
                ordered.append(done[key])
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(ordered)

    manifest = {
        "csv_schema": 1,
        "csv_columns": list(CSV_COLUMNS),
        "preset": spec.preset,
        "base_seed": spec.base_seed,
        "replicates": spec.replicates,
        "grid": list(spec.grid),
        "mechanisms": list(spec.mechanisms),
        "n": spec.n,
        "beta": spec.beta if info.family == "smallworld" else None,
        "seed_scheme": "sha256(base:tag:preset:sweep:replicate), see experiments module",
        "notes": list(info.notes),
    }
    (spec.out_dir / f"{spec.preset}.manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n"
    )
    write_plot(spec.preset, ordered, spec.out_dir / f"{spec.preset}.svg")
    return csv_path


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    m = sum(values) / len(values)
    if len(values) < 2:
        return m, 0.0
    var = sum((v - m) ** 2 for v in values) / (len(values) - 1)
    return m, math.sqrt(var / len(values))


def aggregate(
    rows: Iterable[dict[str, str]], value_column: str
) -> dict[str, list[tuple[float, float, float]]]:
    """Per-mechanism (sweep, mean, stderr) triples from raw rows."""
    buckets: dict[tuple[str, float], list[float]] = {}
    for row in rows:
        if not row[value_column]:
            continue
        key = (row["mechanism"], float(row["sweep_value"]))
        buckets.setdefault(key, []).append(float(row[value_column]))
    series: dict[str, list[tuple[float, float, float]]] = {}
    for (mech, sweep), values in sorted(buckets.items()):
        m, se = mean_stderr(values)
        series.setdefault(mech, []).append((sweep, m, se))
    return series


def write_plot(preset: str, rows: list[dict[str, str]], path: Path) -> None:
    info = PRESETS[preset]
    if info.kind == "connectivity":
        agg = aggregate(rows, "extra")
        series = [Series("connectivity", tuple(agg.get("-", ())))]
        ylabel = "mean connectivity"
    else:
        agg = aggregate(rows, "D")
        series = [
            Series(mech.upper(), tuple(agg[mech])) for mech in sorted(agg)
        ]
        ylabel = "mean D"
    write_line_svg(
        path,
        series,
        title=preset,
        xlabel=info.sweep_name,
        ylabel=ylabel,
    )


# ---------------------------------------------------------------------------
# Classification table for the fig1 fixture (both profiles)
# ---------------------------------------------------------------------------

TABLE2_COLUMNS = (
    "profile",
    "allocation",
    "assignment",
    "po_ir",
    "ttc",
    "stable",
    "stable_cc",
    "stable_wcc",
)

# Agent 1's strategic preference report on the fig1 instance: 3, 1, 2.
FIG1_MISREPORT_PREF = (2, 0, 1)


def table2_rows() -> list[dict[str, str]]:
    inst = load_instance(fixture_path("fig1"))
    misreported = with_preference(inst, 0, FIG1_MISREPORT_PREF)
    out = []
    for profile_name, profile in (("true", inst), ("misreport", misreported)):
        for row in classify_allocations(profile):
            items = ",".join(f"h{owner + 1}" for owner in row.allocation)
            out.append(
                {
                    "profile": profile_name,
                    "allocation": row.label,
                    "assignment": f"({items})",
                    "po_ir": str(int(row.po_ir)),
                    "ttc": str(int(row.matches_ttc)),
                    "stable": str(int(row.stable)),
                    "stable_cc": str(int(row.stable_cc)),
                    "stable_wcc": str(int(row.stable_wcc)),
                }
            )
    return out


def write_table2_csv(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE2_COLUMNS)
        writer.writeheader()
        writer.writerows(table2_rows())
    return path
