"""Domain model for one-sided matching on social networks.

Each agent owns exactly one item (item ``i`` belongs to agent ``i``), holds a
strict preference over all items, and sits in an undirected acquaintance
graph. A nonempty subset of agents starts the game; everyone else takes part
only if reachable from that set through reported neighbor links.

Agent ids are 0-based in memory. JSON instance files use 1-based labels,
with preferences listed most-preferred first.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

Preference = tuple[int, ...]
"""A strict preference: permutation of all agent ids, best item's owner first."""


class InstanceFormatError(ValueError):
    """Raised when an instance file or payload is structurally invalid."""


@dataclass(frozen=True)
class AgentType:
    """A (preference, neighbor set) pair.

    Used both for an agent's true type and for a reported type; a feasible
    report may only drop neighbors, never invent them.
    """

    pref: Preference
    neighbors: frozenset[int]


ReportProfile = tuple[AgentType, ...]


@dataclass(frozen=True)
class Instance:
    """A matching instance: agents, their true types, and the starting set."""

    n: int
    types: tuple[AgentType, ...]
    initial_set: frozenset[int]


@dataclass(frozen=True)
class Violation:
    """One instance-invariant violation, with the agent ids involved."""

    kind: str
    subjects: tuple[int, ...]

    def describe(self, base: int = 0) -> str:
        ids = ", ".join(str(s + base) for s in self.subjects)
        return f"{self.kind} ({ids})" if ids else self.kind


def make_instance(
    prefs: Sequence[Sequence[int]],
    neighbors: Sequence[Iterable[int]],
    initial_set: Iterable[int],
) -> Instance:
    types = tuple(
        AgentType(tuple(p), frozenset(nb)) for p, nb in zip(prefs, neighbors)
    )
    return Instance(n=len(types), types=types, initial_set=frozenset(initial_set))


def truthful_reports(inst: Instance) -> ReportProfile:
    """The report profile in which every agent reveals her full true type."""
    return inst.types


def validate_instance(inst: Instance) -> list[Violation]:
    """Return every invariant violation of ``inst`` (empty list means ok).

    Checks: preference must be a permutation of all ids, no self-loops,
    neighbor ids in range, symmetric edges, nonempty in-range initial set,
    and a consistent agent count.
    """
    out: list[Violation] = []
    n = inst.n
    if len(inst.types) != n:
        out.append(Violation("agent count mismatch", ()))
        return out
    full = frozenset(range(n))
    for i, t in enumerate(inst.types):
        if len(t.pref) != n or set(t.pref) != full:
            out.append(Violation("preference not a permutation", (i,)))
        if i in t.neighbors:
            out.append(Violation("self-loop", (i,)))
        for j in t.neighbors:
            if not 0 <= j < n:
                out.append(Violation("neighbor out of range", (i, j)))
            elif j != i and i not in inst.types[j].neighbors and i < j:
                out.append(Violation("asymmetric edge", (i, j)))
            elif j != i and i not in inst.types[j].neighbors and i > j:
                out.append(Violation("asymmetric edge", (j, i)))
    if not inst.initial_set:
        out.append(Violation("empty initial set", ()))
    for s in inst.initial_set:
        if not 0 <= s < n:
            out.append(Violation("initial agent out of range", (s,)))
    return out


def report_graph(reports: ReportProfile) -> tuple[frozenset[int], ...]:
    """Directed report graph: edge i->j present iff j is in i's reported set."""
    return tuple(r.neighbors for r in reports)


def qualified_set(inst: Instance, reports: ReportProfile) -> frozenset[int]:
    """Agents reachable from the initial set in the directed report graph.

    Members of the initial set are always qualified (path of length 0).
    """
    graph = report_graph(reports)
    seen = set(inst.initial_set)
    queue = deque(seen)
    while queue:
        i = queue.popleft()
        for j in graph[i]:
            if 0 <= j < inst.n and j not in seen:
                seen.add(j)
                queue.append(j)
    return frozenset(seen)


def bfs_distances(
    graph: Sequence[Iterable[int]], sources: Iterable[int], n: int
) -> dict[int, int]:
    """Shortest directed path length from any source, for reachable nodes."""
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        i = queue.popleft()
        for j in graph[i]:
            if 0 <= j < n and j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def rank(pref: Preference, j: int) -> int:
    """1-based position of agent j's item in the preference (1 = favorite)."""
    return pref.index(j) + 1


def position_table(pref: Preference, n: int) -> list[int]:
    """pos[j] = 0-based rank of item j; the inverse permutation of ``pref``."""
    pos = [0] * n
    for idx, j in enumerate(pref):
        pos[j] = idx
    return pos


def favorite(candidates: Iterable[int], pref: Preference) -> int:
    """The unique candidate whose item ranks best in ``pref``.

    Strict preferences make the minimizer unique, so the result does not
    depend on iteration order of ``candidates``.
    """
    best = -1
    best_pos = len(pref)
    for j in candidates:
        p = pref.index(j)
        if p < best_pos:
            best, best_pos = j, p
    if best < 0:
        raise ValueError("no candidates")
    return best


def with_report(
    reports: ReportProfile, i: int, pref: Preference, neighbors: Iterable[int]
) -> ReportProfile:
    """Copy of ``reports`` with agent i's entry replaced."""
    out = list(reports)
    out[i] = AgentType(tuple(pref), frozenset(neighbors))
    return tuple(out)


def with_preference(inst: Instance, i: int, pref: Sequence[int]) -> Instance:
    """Copy of ``inst`` with agent i's preference replaced (graph unchanged)."""
    types = list(inst.types)
    types[i] = AgentType(tuple(pref), types[i].neighbors)
    return Instance(inst.n, tuple(types), inst.initial_set)


# ---------------------------------------------------------------------------
# JSON instance files (1-based labels on disk)
# ---------------------------------------------------------------------------


def instance_to_json(inst: Instance) -> dict:
    return {
        "n": inst.n,
        "initial_set": sorted(s + 1 for s in inst.initial_set),
        "agents": [
            {
                "id": i + 1,
                "neighbors": sorted(j + 1 for j in t.neighbors),
                "preference": [j + 1 for j in t.pref],
            }
            for i, t in enumerate(inst.types)
        ],
    }


def instance_from_json(data: dict, strict: bool = True) -> Instance:
    """Build an Instance from the JSON dict form, converting to 0-based ids.

    Structural problems raise InstanceFormatError with the offending agent
    named by its file label. With ``strict`` the instance invariants are
    checked too (symmetry, permutations, nonempty initial set).
    """
    try:
        n = int(data["n"])
        raw_initial = data["initial_set"]
        raw_agents = data["agents"]
    except (KeyError, TypeError) as exc:
        raise InstanceFormatError(f"missing or malformed field: {exc}") from None
    if not isinstance(raw_agents, list) or len(raw_agents) != n:
        raise InstanceFormatError(f"expected {n} agents, found {len(raw_agents)}")

    types: list[AgentType | None] = [None] * n
    for entry in raw_agents:
        try:
            label = int(entry["id"])
            nbrs = [int(x) for x in entry["neighbors"]]
            pref = [int(x) for x in entry["preference"]]
        except (KeyError, TypeError, ValueError):
            raise InstanceFormatError(f"malformed agent entry: {entry!r}") from None
        if not 1 <= label <= n:
            raise InstanceFormatError(f"agent id {label} out of range 1..{n}")
        if types[label - 1] is not None:
            raise InstanceFormatError(f"duplicate agent id {label}")
        for x in nbrs + pref:
            if not 1 <= x <= n:
                raise InstanceFormatError(f"agent {label}: id {x} out of range 1..{n}")
        types[label - 1] = AgentType(
            tuple(x - 1 for x in pref), frozenset(x - 1 for x in nbrs)
        )
    initial = frozenset(int(x) - 1 for x in raw_initial)
    inst = Instance(n=n, types=tuple(types), initial_set=initial)  # type: ignore[arg-type]
    if strict:
        problems = validate_instance(inst)
        if problems:
            msg = "; ".join(v.describe(base=1) for v in problems)
            raise InstanceFormatError(f"invalid instance: {msg}")
    return inst


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=2) + "\n")


def load_instance(path: str | Path, strict: bool = True) -> Instance:
    text = Path(path).read_text()
    data = json.loads(text)
    return instance_from_json(data, strict=strict)


def instance_digest(inst: Instance) -> str:
    """Short stable hash of the canonical JSON form, for result provenance."""
    blob = json.dumps(instance_to_json(inst), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def edges_of(inst: Instance) -> set[tuple[int, int]]:
    """Undirected true edges as (low, high) pairs."""
    out = set()
    for i, t in enumerate(inst.types):
        for j in t.neighbors:
            out.add((min(i, j), max(i, j)))
    return out
