"""Cartan projection and the three invariant distances on the symmetric space.

An element acts through its block-diagonal matrix; its Cartan projection is
the per-block vector of log singular values sorted non-increasingly.  On top
of the Riemannian distance d (norm of the projection) the package uses the
polyhedral distance (pairing of the projection with rho/||rho||) and, for
s > 0, the mixed distance

    min(s, ||rho||) * d_polyhedral + max(s - ||rho||, 0) * d_riemannian,

which interpolates between the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import NumericalError
from .liecore import ChamberVector, GroupSpec, RootSystemData

# SVD conditioning guard: reject float images with larger entries
MAX_FLOAT_ENTRY = 1e15

_DET_FLOAT_TOL = 1e-9

_DEFAULT_THREADS = 1
_THREAD_CHUNK = 65536


def set_default_threads(n: int) -> None:
    """Cap worker threads for batched decompositions (>= 1)."""
    global _DEFAULT_THREADS
    _DEFAULT_THREADS = max(1, int(n))


def _coerce_entry(x, arithmetic: str):
    if arithmetic == "exact-int":
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
            raise ValueError(f"exact-int mode requires integer entries, got {x!r}")
        return int(x)
    if arithmetic == "exact-rational":
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        if isinstance(x, (Fraction, Rational)):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        raise ValueError(f"exact-rational mode requires integer/rational entries, got {x!r}")
    x = float(x)
    if not np.isfinite(x):
        raise ValueError("non-finite matrix entry")
    return x


def _det_exact(rows: tuple[tuple, ...]) -> Fraction:
    # fraction-based Gaussian elimination; exact for int and Fraction entries
    n = len(rows)
    m = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


def _inverse_exact(rows: tuple[tuple, ...]) -> list[list[Fraction]]:
    n = len(rows)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise NumericalError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [a * inv for a in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return [row[n:] for row in m]


def _mat_mul(a: tuple[tuple, ...], b: tuple[tuple, ...]) -> tuple[tuple, ...]:
    n = len(a)
    cols = list(zip(*b))
    return tuple(
        tuple(sum(a[i][k] * cols[j][k] for k in range(n)) for j in range(n))
        for i in range(n)
    )


@dataclass(frozen=True)
class GroupElement:
    """Block-diagonal determinant-one matrix, one block per spec factor."""

    spec: GroupSpec
    blocks: tuple[tuple[tuple, ...], ...]
    word_length: int | None = None

    def __post_init__(self):
        if len(self.blocks) != len(self.spec.factors):
            raise ValueError(
                f"expected {len(self.spec.factors)} blocks, got {len(self.blocks)}"
            )
        mode = self.spec.arithmetic
        coerced = []
        for n, block in zip(self.spec.sizes, self.blocks):
            rows = tuple(tuple(_coerce_entry(x, mode) for x in row) for row in block)
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ValueError(f"block must be {n}x{n}, got {rows!r}")
            if mode == "float":
                det = float(np.linalg.det(np.asarray(rows, dtype=float)))
                if abs(det - 1.0) > _DET_FLOAT_TOL:
                    raise ValueError(f"block determinant {det:.12g} != 1")
            else:
                det = _det_exact(rows)
                if det != 1:
                    raise ValueError(f"block determinant {det} != 1")
            coerced.append(rows)
        object.__setattr__(self, "blocks", tuple(coerced))

    @classmethod
    def identity(cls, spec: GroupSpec, word_length: int | None = 0) -> "GroupElement":
        blocks = []
        for n in spec.sizes:
            one = 1 if spec.arithmetic != "float" else 1.0
            zero = 0 if spec.arithmetic != "float" else 0.0
            blocks.append(tuple(tuple(one if i == j else zero for j in range(n))
                                for i in range(n)))
        return cls(spec, tuple(blocks), word_length)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if self.spec != other.spec:
            raise ValueError("elements live in different groups")
        blocks = tuple(_mat_mul(a, b) for a, b in zip(self.blocks, other.blocks))
        return GroupElement(self.spec, blocks)

    def inverse(self) -> "GroupElement":
        mode = self.spec.arithmetic
        blocks = []
        for rows in self.blocks:
            if mode == "float":
                inv = np.linalg.inv(np.asarray(rows, dtype=float))
                blocks.append(tuple(tuple(float(x) for x in row) for row in inv))
            else:
                inv = _inverse_exact(rows)
                if mode == "exact-int":
                    blocks.append(tuple(
                        tuple(int(x) for x in row) for row in inv
                    ))
                else:
                    blocks.append(tuple(tuple(x for x in row) for row in inv))
        return GroupElement(self.spec, tuple(blocks))

    def float_blocks(self) -> list[np.ndarray]:
        return [np.asarray([[float(x) for x in row] for row in rows])
                for rows in self.blocks]

    def flat_entries(self) -> tuple:
        return tuple(x for rows in self.blocks for row in rows for x in row)

    @property
    def is_identity(self) -> bool:
        for n, rows in zip(self.spec.sizes, self.blocks):
            for i in range(n):
                for j in range(n):
                    want = 1 if i == j else 0
                    if rows[i][j] != want:
                        return False
        return True


def log_singular_values(stack: np.ndarray) -> np.ndarray:
    """Per-matrix log singular values, sorted non-increasingly and recentred
    to sum zero, for a (..., n, n) float stack.

    For 2x2 matrices the Frobenius norm q and determinant give the exact
    closed form arccosh(q / (2|det|)) / 2, avoiding millions of LAPACK calls
    in orbit-scale batches.
    """
    stack = np.asarray(stack, dtype=float)
    if not np.all(np.isfinite(stack)):
        raise NumericalError("non-finite matrix entries")
    if np.abs(stack).max(initial=0.0) > MAX_FLOAT_ENTRY:
        raise NumericalError(
            f"matrix entries exceed {MAX_FLOAT_ENTRY:g}; reduce the word length"
        )
    n = stack.shape[-1]
    if n == 2:
        a, b = stack[..., 0, 0], stack[..., 0, 1]
        c, d = stack[..., 1, 0], stack[..., 1, 1]
        det = np.abs(a * d - b * c)
        if np.any(det <= 0):
            raise NumericalError("singular 2x2 block")
        q = (a * a + b * b + c * c + d * d) / (2.0 * det)
        h = 0.5 * np.arccosh(np.maximum(q, 1.0))
        return np.stack([h, -h], axis=-1)
    if (stack.ndim == 3 and _DEFAULT_THREADS > 1
            and len(stack) >= 2 * _THREAD_CHUNK):
        sv = _chunked_svdvals(stack)
    else:
        sv = np.linalg.svd(stack, compute_uv=False)
    if np.any(sv[..., -1] <= 0):
        raise NumericalError("singular block")
    logs = np.log(sv)
    return logs - logs.mean(axis=-1, keepdims=True)


def _chunked_svdvals(stack: np.ndarray) -> np.ndarray:
    # chunk results land by index, so the merge is order-independent
    from concurrent.futures import ThreadPoolExecutor

    out = np.empty(stack.shape[:2], dtype=float)
    chunks = range(0, len(stack), _THREAD_CHUNK)
    def work(lo):
        out[lo:lo + _THREAD_CHUNK] = np.linalg.svd(
            stack[lo:lo + _THREAD_CHUNK], compute_uv=False)
    with ThreadPoolExecutor(max_workers=_DEFAULT_THREADS) as pool:
        list(pool.map(work, chunks))
    return out


def cartan_projection(g: GroupElement) -> ChamberVector:
    """Chamber component of g in the K exp(a+) K decomposition."""
    coords = np.concatenate([log_singular_values(block[None])[0]
                             for block in g.float_blocks()])
    return ChamberVector(g.spec, coords)


def relative_position(x: GroupElement, y: GroupElement) -> ChamberVector:
    """Cartan projection of y^-1 x, the chamber-valued distance of xK from yK."""
    if x.spec != y.spec:
        raise ValueError("elements live in different groups")
    if x.spec.arithmetic == "float":
        coords = []
        for bx, by in zip(x.float_blocks(), y.float_blocks()):
            m = np.linalg.solve(by, bx)
            coords.append(log_singular_values(m[None])[0])
        return ChamberVector(x.spec, np.concatenate(coords))
    return cartan_projection(y.inverse() @ x)


def distance_riemannian(x: GroupElement, y: GroupElement | None = None) -> float:
    """Riemannian distance between xK and yK (trace-form norm of the
    relative Cartan projection)."""
    h = relative_position(x, y) if y is not None else cartan_projection(x)
    return h.norm


def distance_polyhedral(rs: RootSystemData, x: GroupElement,
                        y: GroupElement | None = None) -> float:
    """Polyhedral distance <rho/||rho||, (y^-1 x)^+>; its balls are sublevel
    sets of <rho, .> and reflect the volume growth at infinity."""
    h = relative_position(x, y) if y is not None else cartan_projection(x)
    return float(rs.rho @ h.coords) / rs.rho_norm


def distance_mixed(rs: RootSystemData, s: float, x: GroupElement,
                   y: GroupElement | None = None) -> float:
    """One-parameter blend of the polyhedral and Riemannian distances."""
    if s <= 0:
        raise ValueError(f"mixing parameter must be positive, got {s}")
    h = relative_position(x, y) if y is not None else cartan_projection(x)
    dp = float(rs.rho @ h.coords) / rs.rho_norm
    dd = h.norm
    return min(s, rs.rho_norm) * dp + max(s - rs.rho_norm, 0.0) * dd


def mixed_from_parts(rho_norm: float, s: float, d_poly, d_riem):
    """Mixed distance from precomputed polyhedral/Riemannian values."""
    if s <= 0:
        raise ValueError(f"mixing parameter must be positive, got {s}")
    return np.minimum(s, rho_norm) * d_poly + np.maximum(s - rho_norm, 0.0) * d_riem
