"""Deterministic seed derivation.

Every random draw in the package comes from a ``random.Random`` seeded with
an explicit integer. Sub-streams (graph vs. preferences vs. tie-breaking,
replicate k of a sweep, ...) derive their seeds from a base seed plus string
tags through SHA-256, so runs are reproducible across platforms and no
global RNG state exists anywhere.
"""

from __future__ import annotations

import hashlib


def derive_seed(base: int, *parts: object) -> int:
    """A 63-bit seed for the sub-stream named by ``parts`` under ``base``."""
    material = ":".join([str(int(base))] + [str(p) for p in parts])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
