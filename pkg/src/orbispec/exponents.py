"""Orbital counting, partial Poincare sums, and critical-exponent fits.

The counting function N_R for a distance kind is evaluated exactly over an
enumerated orbit ball; its log-slope over the trusted radius window
estimates the critical exponent of the matching Poincare series.  Exponents
for the three distance kinds are reported together: the Riemannian and
polyhedral ones come from plain counting slopes, the mixed one from the
slope of the e^{-||rho|| d_polyhedral}-weighted counting sum (the two agree
for series convergence by summation by parts, and the weighted slope stays
stable at truncated range where tail-convergence heuristics do not).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cartan import log_singular_values, mixed_from_parts
from .liecore import RootSystemData
from .orbit import OrbitBall, trust_radius

KIND_RIEMANNIAN = "riemannian"
KIND_POLYHEDRAL = "polyhedral"
KIND_MIXED = "mixed"
KINDS = (KIND_RIEMANNIAN, KIND_POLYHEDRAL, KIND_MIXED)

DEFAULT_RADII_STEP = 0.25
DEFAULT_WINDOW_FRACTION = 0.5
MIN_WINDOW_POINTS = 6

# slack applied on top of the 2*||rho|| range bound when flagging estimates
EXPONENT_RANGE_SLACK = 0.2

_ZERO_DISTANCE = 1e-12


@dataclass(frozen=True)
class CountingCurve:
    """Sampled orbital counting function for one distance kind."""

    kind: str
    s: float | None
    radii: np.ndarray
    counts: np.ndarray
    completeness_radius: float
    complete: bool
    base_x: object = None
    base_y: object = None


@dataclass(frozen=True)
class ExponentEstimate:
    """Fitted critical exponent with its window and fit diagnostics."""

    value: float
    window: tuple[float, float]
    residual: float
    complete: bool
    in_range: bool = True


@dataclass(frozen=True)
class ExponentTriple:
    delta: ExponentEstimate
    delta_second: ExponentEstimate
    delta_prime: ExponentEstimate

    @property
    def values(self) -> tuple[float, float, float]:
        return (self.delta.value, self.delta_second.value, self.delta_prime.value)

    def ordered(self, tol: float = 0.05) -> bool:
        d, ds, dp = self.values
        return d <= ds + tol and ds <= dp + tol


def relative_chamber_matrix(ball: OrbitBall, x=None, y=None) -> np.ndarray:
    """Cartan projections of x^-1 gamma y over the ball (equivalently of
    y^-1 gamma^-1 x up to -w0, under which both distances are invariant)."""
    if x is None and y is None:
        return ball.chamber_matrix()
    pieces = []
    xb = x.float_blocks() if x is not None else None
    yb = y.float_blocks() if y is not None else None
    for k, stack in enumerate(ball.block_stacks()):
        m = stack
        if xb is not None:
            m = np.einsum("ij,njk->nik", np.linalg.inv(xb[k]), m)
        if yb is not None:
            m = np.einsum("nij,jk->nik", m, yb[k])
        pieces.append(log_singular_values(m))
    return np.concatenate(pieces, axis=1)


def _base_shift(ball: OrbitBall, rs: RootSystemData, x, y) -> float:
    shift = 0.0
    for g in (x, y):
        if g is not None:
            h = np.concatenate([log_singular_values(b[None])[0] for b in g.float_blocks()])
            shift += float(np.linalg.norm(h))
    return shift


def _distance_arrays(ball: OrbitBall, rs: RootSystemData, x=None, y=None):
    chamber = relative_chamber_matrix(ball, x, y)
    d = np.linalg.norm(chamber, axis=1)
    dprime = chamber @ rs.rho / rs.rho_norm
    return chamber, d, dprime


def completeness_radius(ball: OrbitBall, rs: RootSystemData, kind: str,
                        s: float | None = None, x=None, y=None) -> float:
    """Radius up to which counting in the given kind is heuristically
    complete.  Elements beyond word length L satisfy d > trust_radius, hence
    d_polyhedral > (rho_min/||rho||) * trust_radius, with base points
    shifting the guarantee by d(x,e) + d(y,e)."""
    t = trust_radius(ball)
    if math.isinf(t):
        return math.inf
    t = max(t - _base_shift(ball, rs, x, y), 0.0)
    ratio = rs.rho_min / rs.rho_norm
    if kind == KIND_RIEMANNIAN:
        return t
    if kind == KIND_POLYHEDRAL:
        return ratio * t
    if kind == KIND_MIXED:
        if s is None or s <= 0:
            raise ValueError("mixed kind needs a positive parameter s")
        return (min(s, rs.rho_norm) * ratio + max(s - rs.rho_norm, 0.0)) * t
    raise ValueError(f"unknown distance kind {kind!r}")


def _kind_distances(ball, rs, kind, s, x, y):
    _, d, dprime = _distance_arrays(ball, rs, x, y)
    if kind == KIND_RIEMANNIAN:
        return d
    if kind == KIND_POLYHEDRAL:
        return dprime
    if kind == KIND_MIXED:
        if s is None or s <= 0:
            raise ValueError("mixed kind needs a positive parameter s")
        return mixed_from_parts(rs.rho_norm, s, dprime, d)
    raise ValueError(f"unknown distance kind {kind!r}")


def _torsion_mask(ball: OrbitBall, include_torsion: bool) -> np.ndarray | None:
    """Mask selecting elements kept for counting; drops non-identity
    elements whose own Cartan projection vanishes (the stabilizer of the
    base point) when include_torsion is False."""
    if include_torsion:
        return None
    drop = (ball.distances() < _ZERO_DISTANCE) & (ball.word_lengths > 0)
    return ~drop if drop.any() else None


def counting_curve(ball: OrbitBall, rs: RootSystemData, kind: str,
                   s: float | None = None, x=None, y=None,
                   radii: np.ndarray | None = None,
                   radii_step: float = DEFAULT_RADII_STEP,
                   include_torsion: bool = True) -> CountingCurve:
    """Exact counts N_R = |{gamma : dist(xK, gamma yK) <= R}| over the ball."""
    dist = _kind_distances(ball, rs, kind, s, x, y)
    mask = _torsion_mask(ball, include_torsion)
    if mask is not None:
        dist = dist[mask]
    comp = completeness_radius(ball, rs, kind, s, x, y)
    if radii is None:
        top = comp if math.isfinite(comp) else float(dist.max(initial=0.0)) + radii_step
        radii = np.arange(radii_step, top + 1e-12, radii_step)
        if radii.size == 0:
            radii = np.array([radii_step])
    else:
        radii = np.asarray(radii, dtype=float)
        if np.any(np.diff(radii) < 0):
            raise ValueError("radii must be sorted ascending")
    counts = np.searchsorted(np.sort(dist), radii, side="right")
    complete = bool(radii.size == 0 or radii[-1] <= comp)
    return CountingCurve(kind, s, radii, counts.astype(np.int64), comp, complete,
                         base_x=x, base_y=y)


def poincare_partial_sum(ball: OrbitBall, rs: RootSystemData, kind: str,
                         s: float, x=None, y=None) -> float:
    """Partial Poincare sum over the ball.

    For the Riemannian and polyhedral kinds this is sum exp(-s * dist); for
    the mixed kind the parameter enters through the distance itself, so the
    sum is sum exp(-dist_mixed_s) with no outer factor.
    """
    if s <= 0:
        raise ValueError(f"series parameter must be positive, got {s}")
    dist = _kind_distances(ball, rs, kind, s, x, y)
    rate = 1.0 if kind == KIND_MIXED else s
    return float(np.exp(-rate * dist).sum())


def level_partial_sums(ball: OrbitBall, rs: RootSystemData, kind: str,
                       s: float, x=None, y=None) -> np.ndarray:
    """Cumulative partial sums of the Poincare series by word-length level."""
    if s <= 0:
        raise ValueError(f"series parameter must be positive, got {s}")
    dist = _kind_distances(ball, rs, kind, s, x, y)
    rate = 1.0 if kind == KIND_MIXED else s
    terms = np.exp(-rate * dist)
    per_level = np.bincount(ball.word_lengths, weights=terms,
                            minlength=len(ball.growth_per_level))
    return np.cumsum(per_level)


def estimate_exponent(curve: CountingCurve,
                      window_fraction: float = DEFAULT_WINDOW_FRACTION,
                      rho_norm: float | None = None) -> ExponentEstimate:
    """Least-squares slope of log N_R against R over the upper window
    [window_fraction * R_max, R_max] of the trusted radius range."""
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    r_max = float(curve.radii.max(initial=0.0))
    if math.isfinite(curve.completeness_radius):
        r_max = min(r_max, curve.completeness_radius)
    lo = window_fraction * r_max
    sel = (curve.radii >= lo - 1e-12) & (curve.radii <= r_max + 1e-12)
    if sel.sum() < MIN_WINDOW_POINTS:
        raise ValueError(
            f"need at least {MIN_WINDOW_POINTS} samples in the fit window, got {int(sel.sum())}"
        )
    counts = curve.counts[sel]
    if np.any(counts <= 0):
        raise ValueError("zero counts inside the fit window")
    r = curve.radii[sel]
    logn = np.log(counts.astype(float))
    design = np.vstack([np.ones_like(r), r]).T
    coef, *_ = np.linalg.lstsq(design, logn, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - logn) ** 2)))
    value = float(coef[1])
    in_range = True
    if rho_norm is not None:
        in_range = -EXPONENT_RANGE_SLACK <= value <= 2 * rho_norm + EXPONENT_RANGE_SLACK
    return ExponentEstimate(value, (float(lo), float(r_max)), resid,
                            complete=curve.complete, in_range=in_range)


def _weighted_slope(radii, weighted_sums, window_fraction):
    r_max = float(radii.max())
    lo = window_fraction * r_max
    sel = (radii >= lo - 1e-12) & (weighted_sums > 0)
    if sel.sum() < MIN_WINDOW_POINTS:
        raise ValueError(
            f"need at least {MIN_WINDOW_POINTS} samples in the fit window, got {int(sel.sum())}"
        )
    r = radii[sel]
    logm = np.log(weighted_sums[sel])
    design = np.vstack([np.ones_like(r), r]).T
    coef, *_ = np.linalg.lstsq(design, logm, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - logm) ** 2)))
    return float(coef[1]), resid, (float(lo), r_max)


def exponent_triple(ball: OrbitBall, rs: RootSystemData, x=None, y=None,
                    radii_step: float = DEFAULT_RADII_STEP,
                    window_fraction: float = DEFAULT_WINDOW_FRACTION,
                    include_torsion: bool = True) -> ExponentTriple:
    """Estimate the Riemannian, mixed, and polyhedral critical exponents.

    A fully enumerated (finite) group has bounded counting functions, so all
    three exponents vanish identically and no fit is attempted.  Otherwise
    the Riemannian and polyhedral exponents are counting slopes, and the
    mixed exponent is delta_prime when the polyhedral estimate is at most
    ||rho||, else ||rho|| plus the slope of

        M_R = sum_{d(gamma) <= R} exp(-||rho|| d_polyhedral(gamma)),

    clipped into the bracket of the other two fits.
    """
    if ball.exhausted:
        zero = ExponentEstimate(0.0, (0.0, 0.0), 0.0, complete=True)
        return ExponentTriple(zero, zero, zero)

    curve_d = counting_curve(ball, rs, KIND_RIEMANNIAN, x=x, y=y,
                             radii_step=radii_step, include_torsion=include_torsion)
    curve_p = counting_curve(ball, rs, KIND_POLYHEDRAL, x=x, y=y,
                             radii_step=radii_step, include_torsion=include_torsion)
    delta = estimate_exponent(curve_d, window_fraction, rs.rho_norm)
    delta_prime = estimate_exponent(curve_p, window_fraction, rs.rho_norm)

    if delta_prime.value <= rs.rho_norm:
        delta_second = replace(delta_prime)
    else:
        _, d, dprime = _distance_arrays(ball, rs, x, y)
        mask = _torsion_mask(ball, include_torsion)
        if mask is not None:
            d, dprime = d[mask], dprime[mask]
        order = np.argsort(d, kind="stable")
        cum = np.cumsum(np.exp(-rs.rho_norm * dprime[order]))
        sums = cum[np.searchsorted(d[order], curve_d.radii, side="right") - 1]
        slope, resid, window = _weighted_slope(curve_d.radii, sums, window_fraction)
        raw = rs.rho_norm + slope
        lo, hi = sorted((delta.value, delta_prime.value))
        value = min(max(raw, lo), hi)
        in_range = -EXPONENT_RANGE_SLACK <= value <= 2 * rs.rho_norm + EXPONENT_RANGE_SLACK
        delta_second = ExponentEstimate(value, window, resid,
                                        complete=curve_d.complete, in_range=in_range)
    return ExponentTriple(delta, delta_second, delta_prime)


def delta_second_bisection(ball: OrbitBall, rs: RootSystemData, x=None, y=None,
                           rel_tol: float = 1e-3, iterations: int = 50) -> float:
    """Series-convergence bisection for the mixed exponent (diagnostic).

    Declares the mixed partial sum convergent at s when the relative tail
    increments of the last two word-length levels fall below rel_tol, and
    returns the infimum of apparent convergence.  At truncated range this
    systematically overshoots near the critical parameter, so callers should
    prefer the slope-based estimate and clip this value to its bracket.
    """
    if ball.exhausted:
        return 0.0

    def apparently_convergent(s: float) -> bool:
        sums = level_partial_sums(ball, rs, KIND_MIXED, s, x, y)
        if len(sums) < 3:
            return True
        inc = np.diff(sums)
        rel = inc[-2:] / sums[-2:].clip(min=np.finfo(float).tiny)
        return bool(np.all(rel < rel_tol))

    lo, hi = 1e-9, 2 * rs.rho_norm + 1.0
    if not apparently_convergent(hi):
        return hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if apparently_convergent(mid):
            hi = mid
        else:
            lo = mid
    return hi
