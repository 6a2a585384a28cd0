"""Seeded random test corpora.

The seed comes from the ``HSC_SEED`` environment variable when set.
"""

from __future__ import annotations

import os

import numpy as np

DEFAULT_SEED = 20240611


def seed() -> int:
    return int(os.environ.get("HSC_SEED", DEFAULT_SEED))


def rng(offset: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed() + offset)


def random_bump(gen: np.random.Generator, amp=(-0.3, 0.3), center=(-1.5, 1.5), width=(0.8, 1.5)) -> dict:
    return {
        "kind": "compact_bump",
        "amp": float(gen.uniform(*amp)),
        "center": float(gen.uniform(*center)),
        "width": float(gen.uniform(*width)),
    }


def bump_triples(count: int, gen: np.random.Generator | None = None) -> list[tuple[dict, dict, dict]]:
    gen = gen or rng()
    return [tuple(random_bump(gen) for _ in range(3)) for _ in range(count)]


def bump_corpus(count: int, gen: np.random.Generator | None = None, **ranges) -> list[dict]:
    gen = gen or rng()
    return [random_bump(gen, **ranges) for _ in range(count)]
