"""Breadth-first enumeration of orbit balls in finitely generated subgroups.

Elements are gathered level by level in word length with exact
deduplication.  With a symmetric generating set the word length of a product
gamma*g differs from that of gamma by at most one, so a candidate produced
from the frontier is new precisely when it avoids the previous two levels;
the exact-integer path exploits this to run fully vectorized on int64 rows.
Float mode quantizes entries to a 1e-9 grid for deduplication (documented
risk: distinct elements closer than the quantum collapse) and keeps the full
key history, since rounding noise does not respect word-length metrics.
Rational and oversized-integer inputs fall back to a dictionary-based walk
on exact flat tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cartan import GroupElement, log_singular_values, MAX_FLOAT_ENTRY
from .errors import NumericalError, ResourceLimitError
from .liecore import GroupSpec

DEFAULT_MAX_ELEMENTS = 10_000_000

# keep n * max|frontier| * max|generator| clear of int64 overflow
_INT64_SAFE = 2**62

_FLOAT_QUANTUM = 1e-9


def _flat_mul_factory(spec: GroupSpec):
    """Multiplier for block-diagonal matrices stored as flat entry tuples."""
    index_pairs = []
    off = 0
    for n in spec.sizes:
        for i in range(n):
            for j in range(n):
                index_pairs.append(tuple((off + i * n + k, off + k * n + j)
                                         for k in range(n)))
        off += n * n
    def mul(a, b):
        return tuple(sum(a[p] * b[q] for p, q in pairs) for pairs in index_pairs)
    return mul


def _element_from_flat(spec: GroupSpec, flat, word_length=None) -> GroupElement:
    blocks = []
    off = 0
    for n in spec.sizes:
        rows = tuple(tuple(flat[off + i * n + j] for j in range(n)) for i in range(n))
        blocks.append(rows)
        off += n * n
    return GroupElement(spec, tuple(blocks), word_length)


def _quantized_keys(rows: np.ndarray) -> np.ndarray:
    """Exact int64 pair encoding of round(x / quantum) for |x| <= 1e15."""
    if rows.size and np.abs(rows).max() > MAX_FLOAT_ENTRY:
        raise NumericalError(
            f"entry-overflow in float mode: entries exceed {MAX_FLOAT_ENTRY:g}"
        )
    whole = np.floor(rows)
    frac_key = np.rint((rows - whole) / _FLOAT_QUANTUM)
    carry = frac_key >= round(1.0 / _FLOAT_QUANTUM)
    whole = whole + carry
    frac_key = np.where(carry, 0.0, frac_key)
    keys = np.empty(rows.shape[:-1] + (2 * rows.shape[-1],), dtype=np.int64)
    keys[..., 0::2] = whole.astype(np.int64)
    keys[..., 1::2] = frac_key.astype(np.int64)
    return keys


@dataclass(frozen=True)
class GeneratorSet:
    """Symmetric, deduplicated generating set of a discrete subgroup.

    Discreteness and torsion-freeness are the caller's responsibility; the
    engine itself tolerates torsion and merely collapses repeated elements.
    """

    spec: GroupSpec
    elements: tuple[GroupElement, ...]
    symmetric: bool = True

    @classmethod
    def from_elements(cls, gens, symmetric: bool = False) -> "GeneratorSet":
        gens = list(gens)
        if gens:
            spec = gens[0].spec
        else:
            raise ValueError("use GeneratorSet.trivial(spec) for an empty generating set")
        closed = list(gens)
        if not symmetric:
            closed += [g.inverse() for g in gens]
        seen, unique = set(), []
        for g in closed:
            if g.spec != spec:
                raise ValueError("generators live in different groups")
            if g.is_identity:
                raise ValueError("generator equals the identity")
            if spec.arithmetic == "float":
                key = tuple(_quantized_keys(np.asarray(g.flat_entries(), dtype=float)[None])[0])
            else:
                key = g.flat_entries()
            if key not in seen:
                seen.add(key)
                unique.append(g)
        return cls(spec, tuple(unique), True)

    @classmethod
    def trivial(cls, spec: GroupSpec) -> "GeneratorSet":
        return cls(spec, (), True)


class OrbitBall:
    """Deduplicated orbit ball up to a word length, with per-level counts.

    Storage is one of: an (N, m) int64 entry matrix, an (N, m) float64
    matrix, or a list of exact flat tuples (rationals / oversized integers).
    Cartan data for the whole ball is computed lazily and cached.
    """

    def __init__(self, spec: GroupSpec, max_word_length: int, levels, mode: str,
                 exhausted: bool):
        self.spec = spec
        self.max_word_length = max_word_length
        self.growth_per_level = [len(lvl) for lvl in levels]
        self.exhausted = exhausted
        self._mode = mode
        if mode == "int":
            self._entries = np.vstack(levels).astype(np.int64)
        elif mode == "float":
            self._entries = np.vstack(levels).astype(float)
        else:
            self._entries = [t for lvl in levels for t in lvl]
        self.word_lengths = np.repeat(
            np.arange(len(levels), dtype=np.int32), self.growth_per_level
        )
        self._float_matrix = None
        self._chamber = None
        self._distances = None

    def __len__(self) -> int:
        return int(self.word_lengths.size)

    def element(self, i: int) -> GroupElement:
        if self._mode == "obj":
            flat = self._entries[i]
        else:
            row = self._entries[i]
            flat = tuple(row.tolist()) if self._mode == "int" else tuple(float(x) for x in row)
        return _element_from_flat(self.spec, flat, int(self.word_lengths[i]))

    def iter_elements(self):
        for i in range(len(self)):
            yield self.element(i)

    def float_entry_matrix(self) -> np.ndarray:
        if self._float_matrix is None:
            if self._mode == "float":
                self._float_matrix = self._entries
            elif self._mode == "int":
                self._float_matrix = self._entries.astype(float)
            else:
                try:
                    self._float_matrix = np.array(
                        [[float(x) for x in t] for t in self._entries], dtype=float
                    )
                except OverflowError as exc:
                    raise NumericalError("entries too large for a float image") from exc
        return self._float_matrix

    def block_stacks(self) -> list[np.ndarray]:
        mat = self.float_entry_matrix()
        out, off = [], 0
        for n in self.spec.sizes:
            out.append(mat[:, off:off + n * n].reshape(-1, n, n))
            off += n * n
        return out

    def chamber_matrix(self) -> np.ndarray:
        """Cartan projections of all elements, as an (N, ambient_dim) array."""
        if self._chamber is None:
            self._chamber = np.concatenate(
                [log_singular_values(stack) for stack in self.block_stacks()], axis=1
            )
        return self._chamber

    def distances(self) -> np.ndarray:
        """Riemannian distances d(gamma K, eK) for all elements."""
        if self._distances is None:
            self._distances = np.linalg.norm(self.chamber_matrix(), axis=1)
        return self._distances

    @property
    def frontier_min_d(self) -> float:
        if self.exhausted:
            return math.inf
        mask = self.word_lengths == self.max_word_length
        if not mask.any():
            raise ValueError("empty frontier")
        return float(self.distances()[mask].min())


def trust_radius(ball: OrbitBall) -> float:
    """Largest radius at which metric counting over the ball is heuristically
    complete: the minimum frontier distance (infinite for a fully enumerated
    group).  Elements of longer word length may in principle lie closer, so
    downstream fits treat this as a diagnostic, not a guarantee."""
    if ball.max_word_length < 1:
        raise ValueError("empty frontier: enumerate with max_word_length >= 1")
    return ball.frontier_min_d


def enumerate_ball(gens: GeneratorSet, max_word_length: int,
                   max_elements: int = DEFAULT_MAX_ELEMENTS) -> OrbitBall:
    """Enumerate {gamma : word length <= max_word_length} by levelled BFS.

    Deduplication is exact matrix equality in the exact modes and quantized
    (1e-9) key equality in float mode.  Every element records the minimal
    word length at which it was reached.  Raises ResourceLimitError when the
    ball would exceed max_elements.
    """
    if max_word_length < 0:
        raise ValueError("max_word_length must be >= 0")
    spec = gens.spec
    if spec.arithmetic == "float":
        return _enumerate_float(gens, max_word_length, max_elements)
    if spec.arithmetic == "exact-int":
        gen_max = max((max(abs(x) for x in g.flat_entries()) for g in gens.elements),
                      default=0)
        if max(spec.sizes) * max(gen_max, 1) * gen_max < _INT64_SAFE:
            return _enumerate_int(gens, max_word_length, max_elements)
    return _enumerate_generic(gens, max_word_length, max_elements)


def _block_products(spec: GroupSpec, frontier: np.ndarray, gen_rows: np.ndarray) -> np.ndarray:
    """All frontier x generator products as flat rows, frontier-major."""
    nf, ng = len(frontier), len(gen_rows)
    pieces, off = [], 0
    for n in spec.sizes:
        fb = frontier[:, off:off + n * n].reshape(nf, n, n)
        gb = gen_rows[:, off:off + n * n].reshape(ng, n, n)
        prod = np.einsum("fij,gjk->fgik", fb, gb)
        pieces.append(prod.reshape(nf * ng, n * n))
        off += n * n
    return np.concatenate(pieces, axis=1)


def _enumerate_int(gens: GeneratorSet, L: int, cap: int) -> OrbitBall:
    spec = gens.spec
    gen_rows = np.array([g.flat_entries() for g in gens.elements], dtype=np.int64)
    gen_rows = gen_rows.reshape(len(gens.elements), spec.entry_count)
    gen_max = int(np.abs(gen_rows).max()) if gen_rows.size else 0
    n_max = max(spec.sizes)

    identity = np.array([GroupElement.identity(spec).flat_entries()], dtype=np.int64)
    levels = [identity]
    total = 1
    exhausted = False
    for w in range(1, L + 1):
        frontier = levels[-1]
        if gen_rows.size == 0:
            exhausted = True
            break
        frontier_max = int(np.abs(frontier).max())
        if n_max * max(frontier_max, 1) * max(gen_max, 1) >= _INT64_SAFE:
            # entries outgrow the int64 fast path; continue on exact big ints
            return _enumerate_generic(gens, L, cap,
                                      seed_levels=[lvl.tolist() for lvl in levels])
        cand = _block_products(spec, frontier, gen_rows)
        prev = [levels[-1]] + ([levels[-2]] if len(levels) >= 2 else [])
        stacked = np.vstack(prev + [cand])
        offset = sum(len(p) for p in prev)
        uniq, first = np.unique(stacked, axis=0, return_index=True)
        new = uniq[first >= offset]
        if len(new) == 0:
            exhausted = True
            break
        total += len(new)
        if total > cap:
            raise ResourceLimitError(
                f"orbit ball exceeds {cap} elements at word length {w}"
            )
        levels.append(new)
    return OrbitBall(spec, L, levels, "int", exhausted)


def _enumerate_float(gens: GeneratorSet, L: int, cap: int) -> OrbitBall:
    spec = gens.spec
    gen_rows = np.array([g.flat_entries() for g in gens.elements], dtype=float)
    gen_rows = gen_rows.reshape(len(gens.elements), spec.entry_count)

    identity = np.array([GroupElement.identity(spec).flat_entries()], dtype=float)
    levels = [identity]
    seen_keys = _quantized_keys(identity)
    total = 1
    exhausted = False
    for w in range(1, L + 1):
        if gen_rows.size == 0:
            exhausted = True
            break
        cand = _block_products(spec, levels[-1], gen_rows)
        cand_keys = _quantized_keys(cand)
        stacked = np.vstack([seen_keys, cand_keys])
        uniq, first = np.unique(stacked, axis=0, return_index=True)
        new_idx = np.sort(first[first >= len(seen_keys)] - len(seen_keys))
        if len(new_idx) == 0:
            exhausted = True
            break
        total += len(new_idx)
        if total > cap:
            raise ResourceLimitError(
                f"orbit ball exceeds {cap} elements at word length {w}"
            )
        levels.append(cand[new_idx])
        seen_keys = np.vstack([seen_keys, cand_keys[new_idx]])
    return OrbitBall(spec, L, levels, "float", exhausted)


def _enumerate_generic(gens: GeneratorSet, L: int, cap: int,
                       seed_levels: list | None = None) -> OrbitBall:
    spec = gens.spec
    mul = _flat_mul_factory(spec)
    gen_tuples = [g.flat_entries() for g in gens.elements]

    if seed_levels is None:
        levels = [[GroupElement.identity(spec).flat_entries()]]
    else:
        levels = [[tuple(row) for row in lvl] for lvl in seed_levels]
    seen = {t for lvl in levels for t in lvl}
    total = len(seen)
    exhausted = False
    for w in range(len(levels), L + 1):
        new = []
        for a in levels[-1]:
            for g in gen_tuples:
                prod = mul(a, g)
                if prod not in seen:
                    seen.add(prod)
                    new.append(prod)
                    total += 1
                    if total > cap:
                        raise ResourceLimitError(
                            f"orbit ball exceeds {cap} elements at word length {w}"
                        )
        if not new:
            exhausted = True
            break
        levels.append(new)
    return OrbitBall(spec, L, levels, "obj", exhausted)
