"""Brute-force property verification for matching mechanisms.

Everything here checks finite, exhaustively enumerable statements: individual
rationality of one run, incentive compatibility against every feasible
unilateral misreport, Pareto optimality against every allocation, and
stability against every blocking coalition of a given family. Failures carry
a witness that can be replayed independently.

These searches are factorial; explicit bounds and budgets keep them at desk
scale, and exceeding one raises ``BudgetExceededError`` instead of silently
truncating the search.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Sequence

from .core import (
    Instance,
    Preference,
    ReportProfile,
    position_table,
    rank,
    truthful_reports,
    with_report,
)
from .mechanisms import Mechanism, allocate, ls

DEFAULT_IC_SEEDS: tuple[int, ...] = tuple(range(16))
DEFAULT_MAX_EVALS = 2_000_000
DEFAULT_SEARCH_BOUND = 8
DEFAULT_CLASSIFY_BOUND = 6

AllocateFn = Callable[[Instance, ReportProfile, int], tuple[int, ...]]


class BudgetExceededError(RuntimeError):
    """A brute-force search would exceed its configured bound."""


class CoalitionFamily(str, Enum):
    CONNECTED = "connected"
    WEAKLY_COMPLETE = "weakly-complete"
    COMPLETE = "complete"


@dataclass
class PropertyReport:
    """Outcome of one property check; a failed check carries a witness."""

    name: str
    holds: bool
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"property": self.name, "holds": self.holds}
        if self.witness is not None:
            out["witness"] = _witness_to_json(self.witness)
        if self.details:
            out["details"] = self.details
        return out


def _witness_to_json(witness: dict) -> dict:
    """Shift 0-based agent/item ids in a witness to the 1-based file labels."""
    out: dict = {}
    for key, value in witness.items():
        if key in ("agent", "assigned", "truthful_item", "misreport_item"):
            out[key] = value + 1
        elif key in ("coalition", "preference", "neighbors", "dominating", "allocation"):
            out[key] = [v + 1 for v in value]
        elif key == "reallocation":
            out[key] = {str(a + 1): h + 1 for a, h in value.items()}
        elif key == "misreport":
            out[key] = _witness_to_json(value)
        else:
            out[key] = value
    return out


@dataclass
class Budget:
    """Evaluation-count and wall-clock limits for a brute-force search."""

    max_evals: int = DEFAULT_MAX_EVALS
    deadline_ms: float | None = None
    _start: float = field(default_factory=time.monotonic)
    _spent: int = 0

    def preflight(self, needed: int, what: str) -> None:
        if needed > self.max_evals:
            raise BudgetExceededError(
                f"{what} needs {needed} mechanism runs, over the budget of {self.max_evals}"
            )

    def spend(self, amount: int = 1) -> None:
        self._spent += amount
        if self._spent > self.max_evals:
            raise BudgetExceededError(
                f"evaluation budget of {self.max_evals} runs exceeded"
            )
        if self.deadline_ms is not None and self._spent % 256 == 0:
            if (time.monotonic() - self._start) * 1000.0 > self.deadline_ms:
                raise BudgetExceededError(
                    f"time budget of {self.deadline_ms:.0f} ms exceeded"
                )


def _resolve(mechanism: Mechanism | str | AllocateFn) -> tuple[AllocateFn, bool]:
    """Return (allocator, seeded). Callables are treated as seed-sensitive."""
    if callable(mechanism) and not isinstance(mechanism, (Mechanism, str)):
        return mechanism, True
    mech = Mechanism(mechanism)
    return (lambda inst, reports, seed: allocate(mech, inst, reports, seed)), mech.seeded


# ---------------------------------------------------------------------------
# Individual rationality
# ---------------------------------------------------------------------------


def check_ir(
    mechanism: Mechanism | str | AllocateFn, inst: Instance, seed: int = 0
) -> PropertyReport:
    """Run on truthful reports; everyone must weakly prefer her item kept."""
    fn, _ = _resolve(mechanism)
    alloc = fn(inst, truthful_reports(inst), seed)
    for i in range(inst.n):
        pref = inst.types[i].pref
        own, got = rank(pref, i), rank(pref, alloc[i])
        if got > own:
            return PropertyReport(
                "ir",
                False,
                witness={
                    "agent": i,
                    "assigned": alloc[i],
                    "own_rank": own,
                    "assigned_rank": got,
                },
            )
    return PropertyReport("ir", True, details={"agents": inst.n})


# ---------------------------------------------------------------------------
# Incentive compatibility
# ---------------------------------------------------------------------------


def misreport_count(inst: Instance, i: int) -> int:
    fact = 1
    for k in range(2, inst.n + 1):
        fact *= k
    return fact * (1 << len(inst.types[i].neighbors))


def enumerate_misreports(
    inst: Instance, i: int
) -> Iterator[tuple[Preference, frozenset[int]]]:
    """All n! * 2^deg feasible reports of agent i, the truthful one included.

    Preferences run in lexicographic order; neighbor subsets shrink from the
    full true set downward, so reports closest to the truth come first.
    """
    base = sorted(inst.types[i].neighbors)
    subsets: list[frozenset[int]] = []
    for size in range(len(base), -1, -1):
        for combo in itertools.combinations(base, size):
            subsets.append(frozenset(combo))
    for pref in itertools.permutations(range(inst.n)):
        for nbrs in subsets:
            yield pref, nbrs


def check_ic(
    mechanism: Mechanism | str | AllocateFn,
    inst: Instance,
    seeds: Sequence[int] | None = None,
    budget: Budget | None = None,
    others_samples: int = 0,
    sample_seed: int = 0,
    sample: int = 0,
) -> PropertyReport:
    """Unilateral-misreport search for a beneficial deviation.

    For each agent, every feasible report (any preference, any subset of her
    true neighbors) is played against the baseline profile with all other
    agents unchanged; items are compared by her true preference. For a
    seeded mechanism a deviation counts as a violation only when it is a
    strict improvement under every seed in ``seeds``, which approximates
    dominance over tie-breakings (16 seeds by default).

    The search is exhaustive by default, which is guarded by ``budget`` and
    only feasible at desk scale. ``sample`` > 0 instead draws that many
    random feasible misreports per agent; a clean sampled run only means no
    violation was found within the budget, never that none exists, and the
    report's details say so.

    The baseline is the truthful profile. ``others_samples`` > 0 additionally
    repeats the search against that many random feasible profiles of the
    other agents, probing the stronger everyone-may-deviate quantifier by
    sampling rather than exhaustion.
    """
    fn, seeded = _resolve(mechanism)
    if seeds is None:
        seeds = DEFAULT_IC_SEEDS if seeded else (0,)
    seeds = tuple(seeds)
    budget = budget or Budget()
    truth = truthful_reports(inst)

    contexts = 1 + others_samples
    if sample:
        budget.preflight(sample * inst.n * len(seeds) * contexts, "sampled misreport search")
    else:
        total = sum(misreport_count(inst, i) for i in range(inst.n))
        budget.preflight(total * len(seeds) * contexts, "exhaustive misreport search")

    is_ls = not callable(mechanism) and Mechanism(mechanism) is Mechanism.LS
    if is_ls:
        # LS recomputes its BFS ordering from the report graph every run;
        # inside this search the graph repeats across every preference-only
        # misreport, so orderings are memoized on (neighbor structure, seed).
        ordering_cache: dict[tuple, tuple[int, ...]] = {}

        def run(reports: ReportProfile, seed: int) -> tuple[int, ...]:
            budget.spend()
            key = (tuple(tuple(sorted(r.neighbors)) for r in reports), seed)
            ordering = ordering_cache.get(key)
            if ordering is None:
                result = ls(inst, reports, seed)
                ordering_cache[key] = result.ordering
                return result.allocation
            return ls(inst, reports, seed, ordering=ordering).allocation

    else:

        def run(reports: ReportProfile, seed: int) -> tuple[int, ...]:
            budget.spend()
            return fn(inst, reports, seed)

    rng = random.Random(sample_seed)
    profiles = [truth]
    for _ in range(others_samples):
        profiles.append(_random_feasible_profile(inst, rng))

    def reports_of(i: int):
        if not sample:
            yield from enumerate_misreports(inst, i)
            return
        base = sorted(inst.types[i].neighbors)
        for _ in range(sample):
            pref = list(range(inst.n))
            rng.shuffle(pref)
            yield tuple(pref), frozenset(j for j in base if rng.random() < 0.5)

    checked = 0
    for context in profiles:
        for i in range(inst.n):
            true_pref = inst.types[i].pref
            pos_i = position_table(true_pref, inst.n)
            truthful_entry = (true_pref, inst.types[i].neighbors)
            base_context = with_report(context, i, *truthful_entry)
            baseline = {s: run(base_context, s) for s in seeds}
            for pref, nbrs in reports_of(i):
                if (pref, nbrs) == truthful_entry:
                    continue
                checked += 1
                deviated = with_report(context, i, pref, nbrs)
                improved_everywhere = True
                for s in seeds:
                    got = run(deviated, s)[i]
                    if pos_i[got] >= pos_i[baseline[s][i]]:
                        improved_everywhere = False
                        break
                if improved_everywhere:
                    return PropertyReport(
                        "ic",
                        False,
                        witness={
                            "agent": i,
                            "misreport": {
                                "preference": list(pref),
                                "neighbors": sorted(nbrs),
                            },
                            "truthful_item": baseline[seeds[0]][i],
                            "misreport_item": run(deviated, seeds[0])[i],
                            "seeds": list(seeds),
                        },
                        details={"misreports_checked": checked},
                    )
    details = {
        "misreports_checked": checked,
        "seeds": list(seeds),
        "others_samples": others_samples,
        "exhaustive": not sample,
    }
    if sample:
        details["note"] = "sampled search: no violation found within budget, not a proof"
    return PropertyReport("ic", True, details=details)


def _random_feasible_profile(inst: Instance, rng: random.Random) -> ReportProfile:
    out = []
    for t in inst.types:
        pref = list(range(inst.n))
        rng.shuffle(pref)
        nbrs = frozenset(j for j in t.neighbors if rng.random() < 0.5)
        out.append(type(t)(tuple(pref), nbrs))
    return tuple(out)


# ---------------------------------------------------------------------------
# Pareto optimality
# ---------------------------------------------------------------------------


def is_pareto_optimal(
    inst: Instance, alloc: Sequence[int], bound: int = DEFAULT_SEARCH_BOUND
) -> PropertyReport:
    """Search all n! allocations for one that Pareto-dominates ``alloc``."""
    if inst.n > bound:
        raise BudgetExceededError(
            f"Pareto brute force is limited to n <= {bound}, got n = {inst.n}"
        )
    pos = [position_table(t.pref, inst.n) for t in inst.types]
    base = [pos[i][alloc[i]] for i in range(inst.n)]
    agents = range(inst.n)
    for perm in itertools.permutations(agents):
        better = False
        for i in agents:
            d = pos[i][perm[i]] - base[i]
            if d > 0:
                break
            if d < 0:
                better = True
        else:
            if better:
                return PropertyReport(
                    "po", False, witness={"dominating": list(perm)}
                )
    return PropertyReport("po", True)


# ---------------------------------------------------------------------------
# Blocking coalitions and stability
# ---------------------------------------------------------------------------


def _undirected_graph(inst: Instance) -> list[frozenset[int]]:
    return [t.neighbors for t in inst.types]


def _induced_edges(graph: Sequence[frozenset[int]], members: Sequence[int]) -> int:
    inside = set(members)
    return sum(1 for i in members for j in graph[i] if j > i and j in inside)


def _induced_connected(graph: Sequence[frozenset[int]], members: Sequence[int]) -> bool:
    inside = set(members)
    seen = {members[0]}
    frontier = [members[0]]
    while frontier:
        i = frontier.pop()
        for j in graph[i]:
            if j in inside and j not in seen:
                seen.add(j)
                frontier.append(j)
    return len(seen) == len(inside)


def _in_family(
    graph: Sequence[frozenset[int]], members: Sequence[int], family: CoalitionFamily
) -> bool:
    s = len(members)
    edges = _induced_edges(graph, members)
    full = s * (s - 1) // 2
    if family is CoalitionFamily.COMPLETE:
        return edges == full
    if family is CoalitionFamily.WEAKLY_COMPLETE:
        # A complete set, or one exactly one edge short of complete that is
        # still connected. The edge-count form makes 2-sets without an edge
        # ineligible (they would need -1 edges).
        if edges == full:
            return True
        return edges == full - 1 and _induced_connected(graph, members)
    return _induced_connected(graph, members)


def enumerate_coalitions(
    graph: Sequence[frozenset[int]],
    family: CoalitionFamily | str,
    min_size: int = 2,
) -> Iterator[tuple[int, ...]]:
    """All agent sets of size >= min_size whose induced subgraph is in family."""
    family = CoalitionFamily(family)
    n = len(graph)
    for size in range(max(min_size, 1), n + 1):
        for combo in itertools.combinations(range(n), size):
            if _in_family(graph, combo, family):
                yield combo


def _blocking_reallocation(
    inst: Instance,
    alloc: Sequence[int],
    members: tuple[int, ...],
    pos: Sequence[Sequence[int]],
) -> dict[int, int] | None:
    """An internal reallocation of the members' items that weakly improves
    everyone and strictly improves someone, or None."""
    items = set(members)
    candidates: list[tuple[int, list[int]]] = []
    for i in members:
        ok = [h for h in members if pos[i][h] <= pos[i][alloc[i]]]
        if not ok:
            return None
        candidates.append((i, ok))
    candidates.sort(key=lambda pair: len(pair[1]))

    assignment: dict[int, int] = {}
    used: set[int] = set()

    def extend(idx: int, any_strict: bool) -> bool:
        if idx == len(candidates):
            return any_strict
        agent, ok = candidates[idx]
        for h in ok:
            if h in used:
                continue
            assignment[agent] = h
            used.add(h)
            if extend(idx + 1, any_strict or h != alloc[agent]):
                return True
            used.discard(h)
            del assignment[agent]
        return False

    if extend(0, False):
        return dict(assignment)
    return None


def find_blocking_coalition(
    inst: Instance,
    alloc: Sequence[int],
    family: CoalitionFamily | str,
    max_size: int = DEFAULT_SEARCH_BOUND,
    include_singletons: bool = True,
) -> PropertyReport:
    """Stability of ``alloc`` against the given coalition family.

    A singleton blocks exactly when the agent strictly prefers her own item
    to the assigned one (she deviates by keeping it); that case is what makes
    non-IR allocations unstable, and a one-agent set is trivially complete,
    nearly complete by convention, and connected.
    """
    family = CoalitionFamily(family)
    if inst.n > max_size:
        raise BudgetExceededError(
            f"blocking-coalition search is limited to n <= {max_size}, got n = {inst.n}"
        )
    name = {
        CoalitionFamily.CONNECTED: "stable",
        CoalitionFamily.WEAKLY_COMPLETE: "stable-wcc",
        CoalitionFamily.COMPLETE: "stable-cc",
    }[family]
    pos = [position_table(t.pref, inst.n) for t in inst.types]
    if include_singletons:
        for i in range(inst.n):
            if pos[i][i] < pos[i][alloc[i]]:
                return PropertyReport(
                    name,
                    False,
                    witness={"coalition": [i], "reallocation": {i: i}},
                )
    graph = _undirected_graph(inst)
    for members in enumerate_coalitions(graph, family, min_size=2):
        z = _blocking_reallocation(inst, alloc, members, pos)
        if z is not None:
            return PropertyReport(
                name,
                False,
                witness={"coalition": list(members), "reallocation": z},
            )
    return PropertyReport(name, True)


# ---------------------------------------------------------------------------
# Full classification of every allocation (small n)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassificationRow:
    label: str
    allocation: tuple[int, ...]
    po_ir: bool
    matches_ttc: bool
    stable: bool
    stable_cc: bool
    stable_wcc: bool


def classify_allocations(
    inst: Instance, bound: int = DEFAULT_CLASSIFY_BOUND
) -> list[ClassificationRow]:
    """For every one of the n! allocations: PO+IR, TTC match, and stability
    under the connected, complete, and weakly-complete coalition families."""
    from .mechanisms import ttc  # local import to avoid cycle at module load

    if inst.n > bound:
        raise BudgetExceededError(
            f"classification is limited to n <= {bound}, got n = {inst.n}"
        )
    ttc_alloc = ttc(inst, truthful_reports(inst))
    rows = []
    for idx, perm in enumerate(itertools.permutations(range(inst.n)), start=1):
        alloc = tuple(perm)
        ir = all(
            rank(inst.types[i].pref, alloc[i]) <= rank(inst.types[i].pref, i)
            for i in range(inst.n)
        )
        po = is_pareto_optimal(inst, alloc, bound=bound).holds
        rows.append(
            ClassificationRow(
                label=f"a{idx}",
                allocation=alloc,
                po_ir=po and ir,
                matches_ttc=alloc == ttc_alloc,
                stable=find_blocking_coalition(
                    inst, alloc, CoalitionFamily.CONNECTED, max_size=bound
                ).holds,
                stable_cc=find_blocking_coalition(
                    inst, alloc, CoalitionFamily.COMPLETE, max_size=bound
                ).holds,
                stable_wcc=find_blocking_coalition(
                    inst, alloc, CoalitionFamily.WEAKLY_COMPLETE, max_size=bound
                ).holds,
            )
        )
    return rows
