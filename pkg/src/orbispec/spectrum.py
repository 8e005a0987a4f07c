"""Bottom of the L2 spectrum of the Laplacian from critical exponents.

All three relations share the quadratic shape ||rho||^2 - (exponent -
offset)^2 and differ in which exponent and offset enter:

* exact value   lambda0 = ||rho||^2 - (max(delta_mixed - ||rho||, 0))^2,
* two-sided bounds from the Riemannian exponent with offsets rho_min
  (lower) and ||rho|| (upper),
* an improved lower bound with the polyhedral exponent and offset ||rho||.

The functions evaluate those closed forms; no PDE is solved anywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectrumReport:
    """Combined spectral-bottom report with the inputs that produced it."""

    lambda0_exact: float | None
    lambda0_interval: tuple[float, float]
    inputs: dict
    theorem_tags: tuple[str, ...]
    consistent: bool
    notes: tuple[str, ...]


def clip_exponent(value: float, rho_norm: float, name: str = "exponent") -> float:
    """Clip a fitted exponent into [0, 2*||rho||], warning when it falls
    outside.  Endpoints are meaningful (trivial group, lattice), so slightly
    out-of-range fits are snapped rather than rejected."""
    hi = 2.0 * rho_norm
    if value < 0.0 or value > hi:
        warnings.warn(
            f"{name} estimate {value:.6g} outside [0, {hi:.6g}]; clipping",
            stacklevel=2,
        )
        return min(max(value, 0.0), hi)
    return float(value)


def lambda0_characterization(rho_norm: float, delta_second: float) -> float:
    """Exact spectral bottom from the mixed exponent.

    Continuous at delta_second = ||rho||, equal to ||rho||^2 below it and to
    0 at the lattice endpoint 2*||rho||.  In rank one the mixed exponent
    coincides with the Riemannian one, recovering the classical rank-one
    formula.
    """
    ds = clip_exponent(delta_second, rho_norm, "delta_second")
    if ds <= rho_norm:
        return rho_norm**2
    return rho_norm**2 - (ds - rho_norm) ** 2


def lambda0_two_sided_bounds(rho_norm: float, rho_min: float, delta: float) -> tuple[float, float]:
    """Two-sided bounds from the Riemannian exponent.

    Lower bound max(0, ||rho||^2 - (delta - rho_min)^2) once delta exceeds
    rho_min, upper bound ||rho||^2 - (delta - ||rho||)^2 once delta exceeds
    ||rho||; the four-case interval follows.
    """
    if not 0 < rho_min <= rho_norm + 1e-12:
        raise ValueError(f"rho_min must lie in (0, ||rho||], got {rho_min}")
    d = clip_exponent(delta, rho_norm, "delta")
    upper = rho_norm**2 if d <= rho_norm else rho_norm**2 - (d - rho_norm) ** 2
    lower = rho_norm**2 if d <= rho_min else max(0.0, rho_norm**2 - (d - rho_min) ** 2)
    return (float(lower), float(upper))


def lambda0_lower_polyhedral(rho_norm: float, delta_prime: float) -> float:
    """Improved lower bound from the polyhedral exponent."""
    dp = clip_exponent(delta_prime, rho_norm, "delta_prime")
    if dp <= rho_norm:
        return rho_norm**2
    return rho_norm**2 - (dp - rho_norm) ** 2


def consistency_check(rho_norm: float, rho_min: float, delta: float,
                      delta_prime: float, delta_second: float,
                      est_tol: float = 0.05) -> SpectrumReport:
    """Cross-check the three spectral statements on one exponent triple.

    The exact value must land in the intersection of the two-sided interval
    with the polyhedral lower half-line; the bounds are not mutually nested
    (the polyhedral lower bound can be weaker than the Riemannian one when
    delta_prime far exceeds delta), hence intersection rather than nesting.
    Estimate noise of est_tol per exponent is propagated exactly through the
    monotone closed forms by loosening each bound at a shifted exponent.
    """
    notes = []
    lam_exact = lambda0_characterization(rho_norm, delta_second)
    lower2, upper2 = lambda0_two_sided_bounds(rho_norm, rho_min, delta)
    lower3 = lambda0_lower_polyhedral(rho_norm, delta_prime)

    tight_lo = max(lower2, lower3)
    tight_hi = min(upper2, rho_norm**2)

    # every exponent is an estimate; loosen each formula at a shifted input
    # (all are non-increasing in their exponent, so shifting is exact)
    loose_lo = max(
        lambda0_two_sided_bounds(rho_norm, rho_min, min(delta + est_tol, 2 * rho_norm))[0],
        lambda0_lower_polyhedral(rho_norm, min(delta_prime + est_tol, 2 * rho_norm)),
    )
    loose_hi = lambda0_two_sided_bounds(rho_norm, rho_min, max(delta - est_tol, 0.0))[1]
    lam_lo = lambda0_characterization(rho_norm, min(delta_second + est_tol, 2 * rho_norm))
    lam_hi = lambda0_characterization(rho_norm, max(delta_second - est_tol, 0.0))

    consistent = lam_hi >= loose_lo - 1e-12 and lam_lo <= loose_hi + 1e-12
    if not consistent:
        notes.append(
            f"characterization range [{lam_lo:.6g}, {lam_hi:.6g}] misses the "
            f"loosened interval [{loose_lo:.6g}, {loose_hi:.6g}]"
        )

    if consistent:
        interval = (min(tight_lo, lam_exact), max(tight_hi, lam_exact))
        exact: float | None = lam_exact
    else:
        interval = (tight_lo, max(tight_hi, tight_lo))
        exact = None
        notes.append("exact value withheld; bounds interval reported alone")

    return SpectrumReport(
        lambda0_exact=exact,
        lambda0_interval=(float(interval[0]), float(interval[1])),
        inputs={
            "rho_norm": float(rho_norm),
            "rho_min": float(rho_min),
            "delta": float(delta),
            "delta_prime": float(delta_prime),
            "delta_second": float(delta_second),
        },
        theorem_tags=(
            "characterization-from-mixed-exponent",
            "two-sided-bounds-from-riemannian-exponent",
            "lower-bound-from-polyhedral-exponent",
        ),
        consistent=consistent,
        notes=tuple(notes),
    )


def lambda0_profile(rho_norm: float, samples: int = 512) -> np.ndarray:
    """Dense sampling of the characterization over [0, 2*||rho||]; useful
    for monotonicity and continuity checks."""
    grid = np.linspace(0.0, 2.0 * rho_norm, samples)
    return np.array([lambda0_characterization(rho_norm, t) for t in grid])
