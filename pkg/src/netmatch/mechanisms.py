"""The four allocation rules: TTC, SWN, SWC, and Leave-and-Share.

All mechanisms allocate over the qualified agents only; everyone outside the
qualified set keeps her own item. TTC, SWN and SWC are deterministic. LS
breaks ordering ties with a seeded shuffle and is deterministic given the
seed.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

from .core import (
    Instance,
    ReportProfile,
    bfs_distances,
    position_table,
    qualified_set,
    report_graph,
    truthful_reports,
)


class MechanismError(ValueError):
    """A mechanism was applied to an instance it does not support."""


class Mechanism(str, Enum):
    TTC = "ttc"
    SWN = "swn"
    SWC = "swc"
    LS = "ls"

    @property
    def seeded(self) -> bool:
        return self is Mechanism.LS


def shortest_path_ordering(
    inst: Instance, reports: ReportProfile, rng_seed: int = 0
) -> tuple[int, ...]:
    """Qualified agents sorted by shortest-path distance from the initial set.

    Distances are taken in the directed report graph; initial agents have
    distance 0. Agents at equal distance are shuffled with a generator
    seeded by ``rng_seed``, so the result is deterministic per seed.
    """
    graph = report_graph(reports)
    dist = bfs_distances(graph, inst.initial_set, inst.n)
    layers: dict[int, list[int]] = {}
    for agent in sorted(dist):
        layers.setdefault(dist[agent], []).append(agent)
    rng = random.Random(rng_seed)
    order: list[int] = []
    for d in sorted(layers):
        layer = layers[d]
        rng.shuffle(layer)
        order.extend(layer)
    return tuple(order)


# ---------------------------------------------------------------------------
# Pointing-and-cycling engine shared by TTC / SWN / SWC
# ---------------------------------------------------------------------------


def _peel_cycles(
    qualified: Iterable[int],
    n: int,
    pos: Sequence[Sequence[int]],
    candidates_of: Callable[[int, set[int]], Iterable[int]],
) -> tuple[int, ...]:
    """Run rounds of point-at-favorite / remove-all-cycles until nobody is left.

    ``candidates_of(i, remaining)`` must always contain at least one member of
    ``remaining`` (conventionally agent i herself), which guarantees the
    pointing map is total and at least one cycle exists each round.
    """
    assign = list(range(n))
    remaining = set(qualified)
    while remaining:
        target = {}
        for i in remaining:
            pos_i = pos[i]
            best = -1
            best_pos = n
            for j in candidates_of(i, remaining):
                if pos_i[j] < best_pos:
                    best, best_pos = j, pos_i[j]
            target[i] = best
        # Peel every cycle of the functional graph this round; cycles are
        # disjoint so removal order does not matter.
        state = dict.fromkeys(remaining, 0)  # 0 fresh, 1 on path, 2 done
        matched: list[int] = []
        for start in sorted(remaining):
            if state[start]:
                continue
            path = []
            node = start
            while state[node] == 0:
                state[node] = 1
                path.append(node)
                node = target[node]
            if state[node] == 1:  # walked into our own path: found a new cycle
                for member in path[path.index(node):]:
                    assign[member] = target[member]
                    matched.append(member)
            for visited in path:
                state[visited] = 2
        remaining.difference_update(matched)
    return tuple(assign)


def ttc(inst: Instance, reports: ReportProfile) -> tuple[int, ...]:
    """Top Trading Cycle over the qualified set, ignoring network edges.

    Every remaining qualified agent points at the owner of her reported
    favorite among all remaining items; cycles trade and leave.
    """
    q = qualified_set(inst, reports)
    pos = [position_table(r.pref, inst.n) for r in reports]
    return _peel_cycles(q, inst.n, pos, lambda i, remaining: remaining)


def swn(inst: Instance, reports: ReportProfile) -> tuple[int, ...]:
    """Swap With Neighbors: TTC with pointing restricted to self and neighbors."""
    q = qualified_set(inst, reports)
    pos = [position_table(r.pref, inst.n) for r in reports]
    base = {i: ({i} | set(reports[i].neighbors)) & q for i in q}
    return _peel_cycles(q, inst.n, pos, lambda i, remaining: base[i] & remaining)


def swc(inst: Instance, reports: ReportProfile) -> tuple[int, ...]:
    """Swap With Children: pointing restricted to self, neighbors, descendants.

    Requires the report graph restricted to the qualified set to be a tree
    rooted at the unique initial agent; descendant sets are computed once
    from that rooted tree.
    """
    q = qualified_set(inst, reports)
    allowed = _swc_pointing_sets(inst, reports, q)
    pos = [position_table(r.pref, inst.n) for r in reports]
    return _peel_cycles(q, inst.n, pos, lambda i, remaining: allowed[i] & remaining)


def _swc_pointing_sets(
    inst: Instance, reports: ReportProfile, q: frozenset[int]
) -> dict[int, set[int]]:
    if len(inst.initial_set) != 1:
        raise MechanismError("SWC requires a rooted tree")
    root = next(iter(inst.initial_set))
    adj: dict[int, set[int]] = {i: set() for i in q}
    edge_count = 0
    for i in q:
        for j in reports[i].neighbors:
            if j in q and j != i and j not in adj[i]:
                adj[i].add(j)
                adj[j].add(i)
                edge_count += 1
    if edge_count != len(q) - 1:
        raise MechanismError("SWC requires a rooted tree")
    order = [root]
    parent: dict[int, int | None] = {root: None}
    head = 0
    while head < len(order):
        node = order[head]
        head += 1
        for child in adj[node]:
            if child not in parent:
                parent[child] = node
                order.append(child)
    if len(order) != len(q):
        raise MechanismError("SWC requires a rooted tree")
    descendants: dict[int, set[int]] = {i: set() for i in q}
    for node in reversed(order[1:]):
        up = parent[node]
        descendants[up].add(node)  # type: ignore[index]
        descendants[up].update(descendants[node])  # type: ignore[index]
    return {i: {i} | adj[i] | descendants[i] for i in q}


# ---------------------------------------------------------------------------
# Leave and Share
# ---------------------------------------------------------------------------


@dataclass
class RoundTrace:
    """What happened during one leave/share round."""

    cycles: list[tuple[int, ...]]
    shared: tuple[int, ...]
    neighbors_after_share: dict[int, tuple[int, ...]] = field(default_factory=dict)


@dataclass
class LsResult:
    allocation: tuple[int, ...]
    rounds: list[RoundTrace]
    ordering: tuple[int, ...]
    seed: int


def ls(
    inst: Instance,
    reports: ReportProfile,
    rng_seed: int = 0,
    *,
    ordering: Sequence[int] | None = None,
) -> LsResult:
    """Leave-and-Share allocation.

    The mechanism fixes a distance ordering over the qualified agents once,
    then repeats rounds until everyone qualified is matched:

    - the lowest-ordered unmatched agent opens a stack;
    - while the stack is nonempty, the top agent's favorite over her current
      neighbors plus the stack bottom plus herself is either pushed (if new)
      or closes a trading cycle (if already stacked), which is popped and
      allocated, with the departed agents erased from all remaining
      neighbor sets;
    - when the stack empties, the departed round's remaining neighbors are
      connected pairwise, enlarging choices for later rounds.

    Unqualified agents keep their own items. Passing a precomputed
    ``ordering`` (which must match this report profile and seed) skips the
    BFS-and-shuffle step; verifier loops use that to avoid recomputing it.
    """
    q = qualified_set(inst, reports)
    if ordering is None:
        ordering = shortest_path_ordering(inst, reports, rng_seed)
    pos = [position_table(r.pref, inst.n) for r in reports]
    # dyn[i] is agent i's current neighbor set, restricted to qualified
    # agents; sets of agents already matched are frozen at departure time.
    dyn: dict[int, set[int]] = {
        i: {j for j in reports[i].neighbors if j in q and j != i} for i in q
    }
    assign = list(range(inst.n))
    matched: set[int] = set()
    rounds: list[RoundTrace] = []
    cursor = 0
    while len(matched) < len(q):
        while ordering[cursor] in matched:
            cursor += 1
        opener = ordering[cursor]
        stack = [opener]
        index_of = {opener: 0}
        round_out: set[int] = set()
        cycles: list[tuple[int, ...]] = []
        while stack:
            top = stack[-1]
            choices = dyn[top] | {stack[0], top}
            pos_top = pos[top]
            fav = -1
            fav_pos = inst.n
            for j in choices:
                if pos_top[j] < fav_pos:
                    fav, fav_pos = j, pos_top[j]
            at = index_of.get(fav)
            if at is None:
                index_of[fav] = len(stack)
                stack.append(fav)
                continue
            # The favorite is already stacked: everyone from it to the top
            # forms a trading cycle, each member taking the item of the
            # agent above (the top takes the favorite's item).
            cycle = stack[at:]
            del stack[at:]
            for member in cycle:
                del index_of[member]
            for k in range(len(cycle) - 1):
                assign[cycle[k]] = cycle[k + 1]
            assign[cycle[-1]] = fav
            round_out.update(cycle)
            cycles.append(tuple(cycle))
            for agent in q:
                if agent not in matched and agent not in round_out:
                    dyn[agent].difference_update(cycle)
        shared: set[int] = set()
        for agent in round_out:
            shared.update(dyn[agent])
        shared -= round_out
        for j in shared:
            dyn[j].update(shared - {j})
        matched |= round_out
        rounds.append(
            RoundTrace(
                cycles=cycles,
                shared=tuple(sorted(shared)),
                neighbors_after_share={
                    j: tuple(sorted(dyn[j])) for j in sorted(shared)
                },
            )
        )
    return LsResult(
        allocation=tuple(assign),
        rounds=rounds,
        ordering=tuple(ordering),
        seed=rng_seed,
    )


# ---------------------------------------------------------------------------
# Uniform front end
# ---------------------------------------------------------------------------


@dataclass
class MechanismRun:
    mechanism: str
    seed: int
    allocation: tuple[int, ...]
    rounds: list[RoundTrace] | None = None


def run_mechanism(
    mechanism: Mechanism | str,
    inst: Instance,
    reports: ReportProfile | None = None,
    seed: int = 0,
) -> MechanismRun:
    mech = Mechanism(mechanism)
    if reports is None:
        reports = truthful_reports(inst)
    if mech is Mechanism.TTC:
        return MechanismRun(mech.value, seed, ttc(inst, reports))
    if mech is Mechanism.SWN:
        return MechanismRun(mech.value, seed, swn(inst, reports))
    if mech is Mechanism.SWC:
        return MechanismRun(mech.value, seed, swc(inst, reports))
    result = ls(inst, reports, seed)
    return MechanismRun(mech.value, seed, result.allocation, result.rounds)


def allocate(
    mechanism: Mechanism | str,
    inst: Instance,
    reports: ReportProfile | None = None,
    seed: int = 0,
) -> tuple[int, ...]:
    """Just the allocation vector of ``run_mechanism``."""
    return run_mechanism(mechanism, inst, reports, seed).allocation


def run_to_json(run: MechanismRun) -> dict:
    """1-based JSON form of a mechanism run (round trace only for LS)."""
    out: dict = {
        "mechanism": run.mechanism,
        "seed": run.seed,
        "allocation": {str(i + 1): run.allocation[i] + 1 for i in range(len(run.allocation))},
    }
    if run.rounds is not None:
        out["rounds"] = [
            {
                "cycles": [[a + 1 for a in cyc] for cyc in rt.cycles],
                "shared": [a + 1 for a in rt.shared],
                "neighbors_after_share": {
                    str(a + 1): [b + 1 for b in nbrs]
                    for a, nbrs in rt.neighbors_after_share.items()
                },
            }
            for rt in run.rounds
        ]
    return out
