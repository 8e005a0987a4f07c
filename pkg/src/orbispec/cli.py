"""Batch command-line interface.

A single JSON config describes the group, its generators, and the requested
analyses; the run writes a machine-readable `report.json` plus one CSV per
requested table into the output directory.  Identical configs reproduce the
output files byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cartan
from .asymptotics import (fit_ball_volume, green_series_diagnostic, heat_bound,
                          classical_ball_volume, polyhedral_ball_volume,
                          LARGE_RADII_DEFAULT, SMALL_RADII_DEFAULT)
from .cartan import GroupElement, cartan_projection, distance_polyhedral, distance_riemannian
from .errors import ConfigError, NumericalError, ResourceLimitError, UnsupportedGroupError
from .exponents import (KIND_MIXED, KIND_POLYHEDRAL, KIND_RIEMANNIAN,
                        counting_curve, delta_second_bisection, exponent_triple,
                        level_partial_sums, poincare_partial_sum)
from .liecore import GroupSpec, build_root_system
from .orbit import DEFAULT_MAX_ELEMENTS, GeneratorSet, OrbitBall, enumerate_ball, trust_radius
from .spectrum import (consistency_check, lambda0_characterization,
                       lambda0_lower_polyhedral, lambda0_two_sided_bounds)

ANALYSES = ("project", "orbit", "count", "exponent", "lambda0",
            "volume", "green", "heatbound")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNSUPPORTED_GROUP = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4

_FLOAT_FMT = "%.12g"

_HELP_EPILOG = """\
config schema (JSON):
  group            {"factors": [{"type": "sl", "n": 2}, ...],
                    "arithmetic": "exact-int" | "exact-rational" | "float"}
  generators       list of elements; an element is a list of per-factor
                   square matrices (row-major nested arrays); entries are
                   integers, floats, or rationals written as "p/q"
  max_word_length  orbit ball depth (>= 1 for orbit-dependent analyses)
  analyses         subset of: project orbit count exponent lambda0 volume
                   green heatbound (exponent/lambda0 dependencies are pulled
                   in automatically; the report always carries them)
  optional keys    radii_step (0.25), window_fraction (0.5), base_points
                   {"x": element, "y": element}, max_elements (1e7),
                   mixed_s, green_zetas, heat_times, volume_radii_small,
                   volume_radii_large

output files (all floats printed with 12 significant digits):
  report.json               group, exponent triple, spectral report, fits
  projections.csv           generator_index, coordinates..., d_riemannian,
                            d_polyhedral
  orbit_levels.csv          word_length, count
  counting_<kind>.csv       radius, count, complete        (kind: riemannian,
                            polyhedral, mixed)
  partial_sums.csv          kind, s, level, partial_sum
  volumes.csv               family, regime, radius, volume
  green_series.csv          zeta, level, partial_sum, verdict
  heat_bounds.csv           case, t, s, s1, s2, eps, pseudo_dim, value

exit codes: 0 success, 1 config error, 2 unsupported group,
            3 resource cap exceeded, 4 numerical failure
"""


@dataclass
class JobConfig:
    """Validated batch-job description."""

    spec: GroupSpec
    generators: list[GroupElement]
    max_word_length: int
    analyses: tuple[str, ...]
    radii_step: float = 0.25
    window_fraction: float = 0.5
    base_x: GroupElement | None = None
    base_y: GroupElement | None = None
    max_elements: int = DEFAULT_MAX_ELEMENTS
    mixed_s: float | None = None
    green_zetas: list[float] | None = None
    heat_times: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0, 8.0])
    volume_radii_small: list[float] | None = None
    volume_radii_large: list[float] | None = None
    include_torsion: bool = False
    threads: int = 1
    seed: int = 0

    @property
    def orbit_needed(self) -> bool:
        return True  # the report always carries the exponent triple


_KNOWN_KEYS = {
    "group", "generators", "max_word_length", "analyses", "radii_step",
    "window_fraction", "base_points", "max_elements", "mixed_s",
    "green_zetas", "heat_times", "volume_radii_small", "volume_radii_large",
}


def _parse_element(spec: GroupSpec, blocks, what: str) -> GroupElement:
    if not isinstance(blocks, list) or len(blocks) != len(spec.factors):
        raise ConfigError(
            f"{what}: expected {len(spec.factors)} per-factor matrices"
        )
    try:
        return GroupElement(spec, tuple(tuple(tuple(row) for row in b) for b in blocks))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def load_config(path: str | Path, include_torsion: bool = False,
                threads: int = 1, seed: int = 0) -> JobConfig:
    """Parse and validate a JSON job config."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    group = raw.get("group")
    if not isinstance(group, dict) or "factors" not in group:
        raise ConfigError("config needs group.factors")
    factors = group["factors"]
    if not isinstance(factors, list):
        raise ConfigError("group.factors must be a list")
    ns = []
    for f in factors:
        if not isinstance(f, dict) or f.get("type") != "sl" \
                or not isinstance(f.get("n"), int):
            raise UnsupportedGroupError(f"unsupported factor {f!r}")
        ns.append(f["n"])
    arithmetic = group.get("arithmetic", "exact-int")
    spec = GroupSpec.product(ns, arithmetic)

    gens_raw = raw.get("generators", [])
    if not isinstance(gens_raw, list):
        raise ConfigError("generators must be a list")
    generators = [_parse_element(spec, g, f"generator {i}") for i, g in enumerate(gens_raw)]

    analyses = tuple(raw.get("analyses", ["orbit", "count", "exponent", "lambda0"]))
    for a in analyses:
        if a not in ANALYSES:
            raise ConfigError(f"unknown analysis {a!r}; choose from {ANALYSES}")

    max_word_length = raw.get("max_word_length", 0)
    if not isinstance(max_word_length, int) or max_word_length < 0:
        raise ConfigError("max_word_length must be a non-negative integer")
    if generators and max_word_length < 1:
        raise ConfigError("max_word_length must be >= 1 for orbit-dependent analyses")

    base_x = base_y = None
    base = raw.get("base_points")
    if base is not None:
        if not isinstance(base, dict) or set(base) - {"x", "y"}:
            raise ConfigError("base_points must be an object with keys x and/or y")
        if "x" in base:
            base_x = _parse_element(spec, base["x"], "base point x")
        if "y" in base:
            base_y = _parse_element(spec, base["y"], "base point y")

    def _float_list(key):
        val = raw.get(key)
        if val is None:
            return None
        if not isinstance(val, list) or not all(isinstance(v, (int, float)) for v in val):
            raise ConfigError(f"{key} must be a list of numbers")
        return [float(v) for v in val]

    cfg = JobConfig(
        spec=spec,
        generators=generators,
        max_word_length=max_word_length,
        analyses=analyses,
        radii_step=float(raw.get("radii_step", 0.25)),
        window_fraction=float(raw.get("window_fraction", 0.5)),
        base_x=base_x,
        base_y=base_y,
        max_elements=int(raw.get("max_elements", DEFAULT_MAX_ELEMENTS)),
        mixed_s=raw.get("mixed_s"),
        green_zetas=_float_list("green_zetas"),
        heat_times=_float_list("heat_times") or [0.5, 1.0, 2.0, 4.0, 8.0],
        volume_radii_small=_float_list("volume_radii_small"),
        volume_radii_large=_float_list("volume_radii_large"),
        include_torsion=include_torsion,
        threads=threads,
        seed=seed,
    )
    if cfg.radii_step <= 0:
        raise ConfigError("radii_step must be positive")
    if not 0 < cfg.window_fraction <= 1:
        raise ConfigError("window_fraction must lie in (0, 1]")
    return cfg


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return _FLOAT_FMT % x
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _estimate_dict(est) -> dict:
    return {
        "value": est.value,
        "window": list(est.window),
        "residual": est.residual,
        "complete": est.complete,
        "in_range": est.in_range,
    }


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def run(config: JobConfig, out_dir: str | Path = ".") -> int:
    """Execute the configured analyses and write report.json plus CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cartan.set_default_threads(config.threads)

    rs = build_root_system(config.spec)
    report: dict = {
        "group": {
            "factors": [{"type": f.type, "n": f.n} for f in config.spec.factors],
            "arithmetic": config.spec.arithmetic,
        },
        "parameters": {
            "max_word_length": config.max_word_length,
            "radii_step": config.radii_step,
            "window_fraction": config.window_fraction,
            "include_torsion_in_counting": config.include_torsion,
            "threads": config.threads,
            "seed": config.seed,
        },
        "rho_norm": rs.rho_norm,
        "rho_min": rs.rho_min,
        "analyses_run": sorted(set(config.analyses)),
    }

    if config.generators:
        gens = GeneratorSet.from_elements(config.generators)
        depth = config.max_word_length
    else:
        # probing one level proves the trivial group exhausted
        gens = GeneratorSet.trivial(config.spec)
        depth = max(config.max_word_length, 1)
    ball = enumerate_ball(gens, depth, config.max_elements)
    tr = trust_radius(ball)
    report["orbit"] = {
        "size": len(ball),
        "levels": ball.growth_per_level,
        "exhausted": ball.exhausted,
        "trust_radius": _json_safe(tr),
    }

    try:
        triple = exponent_triple(ball, rs, x=config.base_x, y=config.base_y,
                                 radii_step=config.radii_step,
                                 window_fraction=config.window_fraction,
                                 include_torsion=config.include_torsion)
    except ValueError as exc:
        raise ConfigError(
            f"cannot fit exponents over this orbit ball ({exc}); "
            f"increase max_word_length or decrease radii_step"
        ) from exc
    report["exponents"] = {
        "delta": _estimate_dict(triple.delta),
        "delta_second": _estimate_dict(triple.delta_second),
        "delta_prime": _estimate_dict(triple.delta_prime),
        "ordered": triple.ordered(),
        "mixed_bisection_diagnostic": delta_second_bisection(ball, rs),
    }
    spec_report = consistency_check(rs.rho_norm, rs.rho_min, triple.delta.value,
                                    triple.delta_prime.value, triple.delta_second.value)
    report["spectrum"] = {
        "lambda0_exact": spec_report.lambda0_exact,
        "lambda0_interval": list(spec_report.lambda0_interval),
        "statements": {
            "characterization": lambda0_characterization(
                rs.rho_norm, triple.delta_second.value),
            "two_sided_interval": list(lambda0_two_sided_bounds(
                rs.rho_norm, rs.rho_min, triple.delta.value)),
            "polyhedral_lower": lambda0_lower_polyhedral(
                rs.rho_norm, triple.delta_prime.value),
        },
        "inputs": spec_report.inputs,
        "theorem_tags": list(spec_report.theorem_tags),
        "consistent": spec_report.consistent,
        "notes": list(spec_report.notes),
    }

    requested = set(config.analyses)
    if "project" in requested:
        rows = []
        for i, g in enumerate(gens.elements):
            h = cartan_projection(g)
            rows.append([i, *h.coords.tolist(),
                         distance_riemannian(g), distance_polyhedral(rs, g)])
        header = ["generator_index"] + [f"coordinate_{k}" for k in range(rs.ambient_dim)]
        header += ["d_riemannian", "d_polyhedral"]
        _write_csv(out / "projections.csv", header, rows)

    if "orbit" in requested:
        _write_csv(out / "orbit_levels.csv", ["word_length", "count"],
                   list(enumerate(ball.growth_per_level)))

    if "count" in requested:
        mixed_s = config.mixed_s if config.mixed_s is not None else rs.rho_norm
        for kind, fname, s in (
            (KIND_RIEMANNIAN, "counting_riemannian.csv", None),
            (KIND_POLYHEDRAL, "counting_polyhedral.csv", None),
            (KIND_MIXED, "counting_mixed.csv", mixed_s),
        ):
            curve = counting_curve(ball, rs, kind, s=s, x=config.base_x, y=config.base_y,
                                   radii_step=config.radii_step,
                                   include_torsion=config.include_torsion)
            rows = [[r, int(c), curve.complete]
                    for r, c in zip(curve.radii, curve.counts)]
            _write_csv(out / fname, ["radius", "count", "complete"], rows)

    if "exponent" in requested:
        rows = []
        for kind in (KIND_RIEMANNIAN, KIND_POLYHEDRAL, KIND_MIXED):
            for mult in (0.5, 1.0, 1.5, 2.0):
                s = mult * rs.rho_norm
                sums = level_partial_sums(ball, rs, kind, s,
                                          config.base_x, config.base_y)
                rows += [[kind, s, lvl, v] for lvl, v in enumerate(sums)]
        _write_csv(out / "partial_sums.csv", ["kind", "s", "level", "partial_sum"], rows)

    if "volume" in requested:
        if rs.rank > 3:
            raise NumericalError("volume quadrature supports rank <= 3")
        small = config.volume_radii_small or SMALL_RADII_DEFAULT.tolist()
        large = config.volume_radii_large or LARGE_RADII_DEFAULT.tolist()
        rows, fits = [], {}
        for family, fn in (("polyhedral", polyhedral_ball_volume),
                           ("classical", classical_ball_volume)):
            for regime, radii in (("small", small), ("large", large)):
                fit = fit_ball_volume(rs, family, regime, np.asarray(radii))
                fits[f"{family}_{regime}"] = {
                    "exponential_rate": fit.fitted_exponential_rate,
                    "polynomial_degree": fit.fitted_polynomial_degree,
                }
                rows += [[family, regime, r, math.exp(lv)]
                         for r, lv in zip(fit.radii, fit.log_volumes)]
        _write_csv(out / "volumes.csv", ["family", "regime", "radius", "volume"], rows)
        report["volume_fits"] = fits

    if "green" in requested:
        zetas = config.green_zetas
        if zetas is None:
            crit = triple.delta_second.value - rs.rho_norm
            if crit > 0.05:
                zetas = [max(crit + d, 0.01) for d in (-0.2, -0.1, 0.0, 0.1, 0.2)]
            else:
                zetas = [0.1, 0.5, 1.0]
        rows, summary = [], []
        for zeta in zetas:
            diag = green_series_diagnostic(ball, rs, zeta,
                                           x=config.base_x, y=config.base_y)
            rows += [[zeta, lvl, v, diag.verdict]
                     for lvl, v in enumerate(diag.partial_sums)]
            summary.append({"zeta": zeta, "verdict": diag.verdict,
                            "trend_slope": _json_safe(diag.trend_slope)})
        _write_csv(out / "green_series.csv",
                   ["zeta", "level", "partial_sum", "verdict"], rows)
        report["green"] = summary

    if "heatbound" in requested:
        ds = min(max(triple.delta_second.value, 0.0), 2 * rs.rho_norm)
        rows = []
        for t in config.heat_times:
            if ds < rs.rho_norm:
                s = 0.5 * (ds + rs.rho_norm)
                p = poincare_partial_sum(ball, rs, KIND_MIXED, s,
                                         config.base_x, config.base_y)
                val = heat_bound(rs, "i", t=t, delta_second=ds, s=s, psecond=p)
                rows.append(["i", t, s, "", "", "", "", val])
            elif ds < 2 * rs.rho_norm:
                gap = rs.rho_norm - (ds - rs.rho_norm)
                s1 = ds - rs.rho_norm + 0.25 * gap
                s2 = ds - rs.rho_norm + 0.75 * gap
                p = poincare_partial_sum(ball, rs, KIND_MIXED, rs.rho_norm + s1,
                                         config.base_x, config.base_y)
                val = heat_bound(rs, "ii", t=t, delta_second=ds, s1=s1, s2=s2, psecond=p)
                rows.append(["ii", t, "", s1, s2, "", "", val])
            if ds < 2 * rs.rho_norm:
                s = ds + 0.25
                eps = 0.05
                px = poincare_partial_sum(ball, rs, KIND_MIXED, s,
                                          config.base_x, config.base_x)
                py = poincare_partial_sum(ball, rs, KIND_MIXED, s,
                                          config.base_y, config.base_y)
                val = heat_bound(rs, "iii", t=t, delta_second=ds, s=s, eps=eps,
                                 psecond_x=px, psecond_y=py)
                rows.append(["iii", t, s, "", "", eps, "", val])
        _write_csv(out / "heat_bounds.csv",
                   ["case", "t", "s", "s1", "s2", "eps", "pseudo_dim", "value"], rows)
        report["heat_bounds"] = len(rows)

    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="orbispec",
        description="Critical exponents of orbit growth and the bottom of the "
                    "L2 spectrum for discrete subgroups of SL(n,R) products.",
        epilog=_HELP_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", required=True, help="path to the JSON job config")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on internal worker threads")
    parser.add_argument("--include-torsion-in-counting", action="store_true",
                        help="keep base-point stabilizer elements in counting "
                             "curves (default: excluded)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized property sampling (recorded "
                             "in the report; the shipped analyses are "
                             "deterministic)")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config,
                             include_torsion=args.include_torsion_in_counting,
                             threads=args.threads, seed=args.seed)
    except UnsupportedGroupError as exc:
        print(f"unsupported group: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED_GROUP
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return run(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedGroupError as exc:
        print(f"unsupported group: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED_GROUP
    except ResourceLimitError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
