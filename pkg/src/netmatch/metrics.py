"""Rank-ascension metric: how far each agent's assigned item climbed.

An agent whose own item sits at rank j in her true preference and who
receives the item at rank k improves by j - k positions. The population
mean of that improvement (over all n agents, unqualified ones counting 0)
is the cardinal index used throughout the experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Instance, instance_digest, rank


def ascension(inst: Instance, alloc: Sequence[int], i: int) -> int:
    pref = inst.types[i].pref
    return rank(pref, i) - rank(pref, alloc[i])


def avg_ascension(inst: Instance, alloc: Sequence[int]) -> Fraction:
    """Exact mean ascension over all n agents."""
    total = sum(ascension(inst, alloc, i) for i in range(inst.n))
    return Fraction(total, inst.n)


@dataclass(frozen=True)
class AscensionResult:
    per_agent: tuple[int, ...]
    mean: Fraction
    mechanism: str
    instance_digest: str


def ascension_result(
    inst: Instance, alloc: Sequence[int], mechanism: str
) -> AscensionResult:
    per_agent = tuple(ascension(inst, alloc, i) for i in range(inst.n))
    return AscensionResult(
        per_agent=per_agent,
        mean=Fraction(sum(per_agent), inst.n),
        mechanism=mechanism,
        instance_digest=instance_digest(inst),
    )
