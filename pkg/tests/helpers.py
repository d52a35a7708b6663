"""Shared test utilities: random instance sampling and small graph oracles."""

from __future__ import annotations

import random

from netmatch.core import AgentType, Instance
from netmatch.generators import (
    gen_er,
    gen_girg,
    gen_prefs,
    gen_smallworld,
    gen_tree,
)
from netmatch.seeds import derive_seed

ALL_FAMILIES = ("er", "tree", "girg", "smallworld")


def assemble(graph, prefs, initial=(0,)) -> Instance:
    n = len(graph)
    types = tuple(AgentType(prefs[i], graph[i]) for i in range(n))
    return Instance(n=n, types=types, initial_set=frozenset(initial))


def random_instance(
    trial_seed: int,
    n_max: int = 50,
    n_min: int = 1,
    families: tuple[str, ...] = ALL_FAMILIES,
) -> tuple[Instance, str]:
    """One random instance drawn from a mixed pool of graph families."""
    rng = random.Random(derive_seed(trial_seed, "pick"))
    family = families[rng.randrange(len(families))]
    gseed = derive_seed(trial_seed, "graph")
    if family == "er":
        n = rng.randint(max(n_min, 1), n_max)
        graph = gen_er(n, rng.random(), gseed)
    elif family == "tree":
        n = rng.randint(max(n_min, 1), n_max)
        graph = gen_tree(n, rng.randint(1, max(n - 1, 1)), gseed)
    elif family == "girg":
        n = rng.randint(max(n_min, 2), max(n_max, 2))
        graph = gen_girg(n, 2.2 + 0.8 * rng.random(), 2.0 + 6.0 * rng.random(), gseed)
    else:
        n = rng.randint(max(n_min, 4), max(n_max, 4))
        k = 2 * rng.randint(1, (n - 1) // 2)
        graph = gen_smallworld(n, k, rng.random(), gseed)
    prefs = gen_prefs(n, derive_seed(trial_seed, "prefs"))
    return assemble(graph, prefs), family


def random_er_instance(trial_seed: int, n: int, p: float) -> Instance:
    graph = gen_er(n, p, derive_seed(trial_seed, "graph"))
    prefs = gen_prefs(n, derive_seed(trial_seed, "prefs"))
    return assemble(graph, prefs)


def complete_instance(trial_seed: int, n: int) -> Instance:
    return random_er_instance(trial_seed, n, 1.0)


def is_connected(graph) -> bool:
    n = len(graph)
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in graph[i]:
            if j not in seen:
                seen.add(j)
                frontier.append(j)
    return len(seen) == n


def random_connected_instance(
    trial_seed: int,
    n_max: int = 8,
    n_min: int = 2,
    families: tuple[str, ...] = ALL_FAMILIES,
) -> tuple[Instance, str]:
    """Random instance whose true graph is connected (everyone qualified)."""
    bump = 0
    while True:
        inst, family = random_instance(
            derive_seed(trial_seed, "try", bump), n_max=n_max, n_min=n_min, families=families
        )
        if is_connected([t.neighbors for t in inst.types]):
            return inst, family
        bump += 1


def is_tree(graph) -> bool:
    n = len(graph)
    edges = sum(len(s) for s in graph) // 2
    if edges != n - 1:
        return False
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in graph[i]:
            if j not in seen:
                seen.add(j)
                frontier.append(j)
    return len(seen) == n
