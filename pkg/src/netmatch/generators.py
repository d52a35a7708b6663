"""Random instance generation: four graph families plus uniform preferences.

All generators consume an explicit integer seed and are deterministic given
it. Graphs are returned as a tuple of per-node neighbor sets (undirected:
j in graph[i] iff i in graph[j], never i in graph[i]).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .core import AgentType, Instance, Preference
from .seeds import derive_seed

Graph = tuple[frozenset[int], ...]

FAMILIES = ("er", "tree", "girg", "smallworld")


@dataclass(frozen=True)
class GenSpec:
    """A fully parameterized generation request (JSON-friendly)."""

    family: str
    n: int
    seed: int
    params: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def param(self, name: str, default: float | None = None) -> float:
        for key, value in self.params:
            if key == name:
                return value
        if default is None:
            raise ValueError(f"missing parameter {name!r} for family {self.family!r}")
        return default

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "seed": self.seed,
            "params": dict(self.params),
        }

    @staticmethod
    def from_json(data: dict) -> "GenSpec":
        return GenSpec(
            family=data["family"],
            n=int(data["n"]),
            seed=int(data["seed"]),
            params=tuple(sorted((str(k), float(v)) for k, v in data["params"].items())),
        )


def _empty(n: int) -> list[set[int]]:
    return [set() for _ in range(n)]


def _freeze(nb: list[set[int]]) -> Graph:
    return tuple(frozenset(s) for s in nb)


def gen_er(n: int, p: float, seed: int) -> Graph:
    """Independent edge on every unordered pair with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    rng = random.Random(seed)
    nb = _empty(n)
    for i in range(n - 1):
        for j in range(i + 1, n):
            if rng.random() < p:
                nb[i].add(j)
                nb[j].add(i)
    return _freeze(nb)


def gen_tree(n: int, ub: int, seed: int) -> Graph:
    """Random tree rooted at node 0, built breadth-first.

    Each node draws its child count uniformly from [1, ub]; generation stops
    (truncating the last draw) once n nodes exist. ub=1 forces a path.
    """
    if n < 1:
        raise ValueError("tree needs at least one node")
    if n > 1 and not 1 <= ub <= n - 1:
        raise ValueError(f"child bound must be in [1, {n - 1}], got {ub}")
    rng = random.Random(seed)
    nb = _empty(n)
    queue = deque([0])
    next_id = 1
    while next_id < n:
        parent = queue.popleft()
        for _ in range(rng.randint(1, ub)):
            if next_id == n:
                break
            nb[parent].add(next_id)
            nb[next_id].add(parent)
            queue.append(next_id)
            next_id += 1
    return _freeze(nb)


def gen_girg(n: int, tau: float, alpha: float, seed: int) -> Graph:
    """Geometric inhomogeneous random graph on the 1-d unit torus.

    Node weights follow a power law with tail exponent tau - 1 (minimum 1,
    so the mean weight is bounded for tau > 2); positions are uniform on the
    torus. A pair connects with probability min(1, (w_i w_j / n / d)^alpha)
    where d is the torus distance. Smaller tau means heavier weight tails
    and denser graphs; larger alpha sharpens the distance cutoff and thins
    the graph.
    """
    if tau <= 2.0:
        raise ValueError(f"weight exponent must exceed 2, got {tau}")
    if alpha <= 1.0:
        raise ValueError(f"decay exponent must exceed 1, got {alpha}")
    rng = random.Random(seed)
    weights = [(1.0 - rng.random()) ** (-1.0 / (tau - 1.0)) for _ in range(n)]
    coords = [rng.random() for _ in range(n)]
    nb = _empty(n)
    for i in range(n - 1):
        w_i = weights[i]
        x_i = coords[i]
        for j in range(i + 1, n):
            d = abs(x_i - coords[j])
            if d > 0.5:
                d = 1.0 - d
            if d <= 0.0:
                p = 1.0
            else:
                base = w_i * weights[j] / (n * d)
                p = 1.0 if base >= 1.0 else base**alpha
            if rng.random() < p:
                nb[i].add(j)
                nb[j].add(i)
    return _freeze(nb)


def gen_smallworld(n: int, k: int, beta: float, seed: int) -> Graph:
    """Watts-Strogatz ring lattice with rewiring probability beta.

    Rewiring keeps the edge count at exactly n*k/2 and never creates
    self-loops or duplicate edges.
    """
    if k % 2 != 0 or not 0 < k < n:
        raise ValueError(f"neighbor count must be even and in (0, n), got k={k}, n={n}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"rewiring probability must be in [0, 1], got {beta}")
    rng = random.Random(seed)
    nb = _empty(n)
    for i in range(n):
        for off in range(1, k // 2 + 1):
            j = (i + off) % n
            nb[i].add(j)
            nb[j].add(i)
    for off in range(1, k // 2 + 1):
        for i in range(n):
            j = (i + off) % n
            if rng.random() >= beta:
                continue
            if len(nb[i]) >= n - 1:
                continue  # node already saturated, nothing to rewire to
            m = rng.randrange(n)
            while m == i or m in nb[i]:
                m = rng.randrange(n)
            nb[i].discard(j)
            nb[j].discard(i)
            nb[i].add(m)
            nb[m].add(i)
    return _freeze(nb)


def gen_prefs(n: int, seed: int) -> tuple[Preference, ...]:
    """One independent uniform permutation per agent."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        perm = list(range(n))
        rng.shuffle(perm)
        out.append(tuple(perm))
    return tuple(out)


def edge_count(graph: Sequence[frozenset[int]] | Graph) -> int:
    return sum(len(s) for s in graph) // 2


def connectivity(graph: Sequence[frozenset[int]] | Graph) -> float:
    """Edge density: |E| / C(n, 2)."""
    n = len(graph)
    if n < 2:
        raise ValueError("connectivity needs at least 2 nodes")
    return edge_count(graph) / (n * (n - 1) / 2)


def leaf_count(graph: Sequence[frozenset[int]] | Graph, root: int = 0) -> int:
    """Number of childless nodes of a tree rooted at ``root``."""
    if len(graph) == 1:
        return 1
    return sum(1 for i, s in enumerate(graph) if i != root and len(s) == 1)


def graph_from_spec(spec: GenSpec) -> Graph:
    if spec.family == "er":
        return gen_er(spec.n, spec.param("p"), spec.seed)
    if spec.family == "tree":
        return gen_tree(spec.n, int(spec.param("ub")), spec.seed)
    if spec.family == "girg":
        return gen_girg(spec.n, spec.param("tau", 2.9), spec.param("alpha", 6.0), spec.seed)
    if spec.family == "smallworld":
        return gen_smallworld(spec.n, int(spec.param("k")), spec.param("beta", 0.3), spec.seed)
    raise ValueError(f"unknown family {spec.family!r} (expected one of {FAMILIES})")


def instance_from_spec(spec: GenSpec, prefs_seed: int | None = None) -> Instance:
    """Full instance: generated graph, uniform preferences, initial agent 0.

    The graph stream uses the spec seed directly; preferences come from a
    derived sub-seed unless one is supplied (experiments pass their own so
    preferences can be held fixed across a graph-parameter sweep).
    """
    graph = graph_from_spec(spec)
    if prefs_seed is None:
        prefs_seed = derive_seed(spec.seed, "prefs")
    prefs = gen_prefs(spec.n, prefs_seed)
    types = tuple(AgentType(prefs[i], graph[i]) for i in range(spec.n))
    return Instance(n=spec.n, types=types, initial_set=frozenset({0}))
