"""Shared samplers and fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from orbispec import GeneratorSet, GroupElement, GroupSpec, enumerate_ball

SQRT2 = np.sqrt(2.0)


def sl3_generators() -> np.ndarray:
    """Elementary generators of SL(3,Z) with their inverses, as int64 stack."""
    mats = []
    for (i, j) in ((0, 1), (1, 2), (0, 2)):
        for sign in (1, -1):
            m = np.eye(3, dtype=np.int64)
            m[i, j] = sign
            mats.append(m)
    return np.stack(mats)


def random_sl3_words(rng: np.random.Generator, count: int, length: int = 8) -> np.ndarray:
    """Batch of products of `length` random elementary generators, (count, 3, 3)."""
    gens = sl3_generators()
    out = np.broadcast_to(np.eye(3, dtype=np.int64), (count, 3, 3)).copy()
    for _ in range(length):
        pick = gens[rng.integers(0, len(gens), size=count)]
        out = np.einsum("nij,njk->nik", out, pick)
    return out


def sanov_generators(spec: GroupSpec | None = None):
    """Free generating pair of the level-2 congruence subgroup of SL(2,Z)."""
    spec = spec or GroupSpec.sl(2)
    a = GroupElement(spec, (((1, 2), (0, 1)),))
    b = GroupElement(spec, (((1, 0), (2, 1)),))
    return GeneratorSet.from_elements([a, b])


def cyclic_hyperbolic_generator():
    """diag(e, 1/e) in float mode; word n sits at Riemannian distance n*sqrt(2)."""
    spec = GroupSpec.sl(2, "float")
    e = float(np.e)
    return GeneratorSet.from_elements([GroupElement(spec, (((e, 0.0), (0.0, 1.0 / e)),))])


@pytest.fixture(scope="session")
def sanov_ball_8():
    return enumerate_ball(sanov_generators(), 8)


@pytest.fixture(scope="session")
def cyclic_ball_20():
    return enumerate_ball(cyclic_hyperbolic_generator(), 20)
