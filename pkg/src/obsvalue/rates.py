"""Sweeps over n, consolidated bound reports, and decay-rate fitting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import EXACT_TOL
from .densities import HypercubeSpec, hypercube_density
from .lower import cube_lower, richness_lower_bound
from .streams import child_seed
from .upper import (certificate_upper_bound, exact_mad, hoeffding_certificate,
                    mad_floor, uniform_ratio)


@dataclass(frozen=True)
class SweepConfig:
    """Fixed Monte Carlo budgets keep CI widths reproducible run to run."""

    mc_samples: int = 100_000
    seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class BoundReport:
    """All bound surrogates for one (r, n) pair.

    ``lower`` is the survival-gap bound (with CI half-width ``lower_ci``),
    ``upper_exact`` the kernel-specific TV surrogate exact_mad/2,
    ``upper_closed``/``lower_closed`` the closed forms they certify.
    """

    r: float
    n: int
    m: int
    lower: float
    lower_ci: float
    l_star: int
    delta_avg: float
    lower_method: str
    lower_closed: float
    upper_exact: float
    upper_closed: float
    floor_half: float

    def __post_init__(self):
        if self.lower_closed > self.lower + self.lower_ci + EXACT_TOL:
            raise AssertionError(
                "closed-form lower bound exceeds the survival gap")
        if self.upper_exact > self.upper_closed + EXACT_TOL:
            raise AssertionError(
                "exact upper surrogate exceeds its closed form")


def bound_sweep(
    r: float, n_values: Sequence[int], config: SweepConfig = SweepConfig()
) -> list[BoundReport]:
    """One :class:`BoundReport` per n; per-n child seeds keep entries
    independent and reproducible for any worker count."""
    ns = list(n_values)
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
        raise ValueError("n_values must be nonempty and increasing, all >= 1")
    ratio = uniform_ratio(hypercube_density(HypercubeSpec(r, 1, [0]))).two_level
    cert = hoeffding_certificate(r)
    reports = []
    for n in ns:
        cube = cube_lower(
            n, r, mc_samples=config.mc_samples,
            seed=child_seed(config.seed, "sweep", n), workers=config.workers,
        )
        reports.append(BoundReport(
            r=r, n=n, m=cube.m,
            lower=cube.delta, lower_ci=cube.ci_at_star, l_star=cube.l_star,
            delta_avg=cube.delta_avg, lower_method=cube.method,
            lower_closed=richness_lower_bound(1.0 - 1.0 / r, 1.0, n),
            upper_exact=exact_mad(ratio, n + 1) / 2.0,
            upper_closed=certificate_upper_bound(cert, n),
            floor_half=mad_floor(ratio, n + 1) / 2.0,
        ))
    return reports


@dataclass(frozen=True)
class RateFit:
    """Power law value ~= amplitude * (n+1)^exponent fitted on log-log scale;
    ``residual`` is the largest absolute log-scale misfit on the range."""

    exponent: float
    amplitude: float
    residual: float
    n_range: tuple[int, int]


def rate_fit(points: Sequence[tuple[int, float]]) -> RateFit:
    """Least-squares line through (log(n+1), log value).

    Regressing against n+1 rather than n matches the closed forms and
    removes small-n curvature.  Requires >= 3 points with positive values.
    """
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    ns = np.array([p[0] for p in pts], dtype=float)
    vals = np.array([p[1] for p in pts], dtype=float)
    if vals.min() <= 0.0:
        raise ValueError("values must be positive")
    x = np.log(ns + 1.0)
    y = np.log(vals)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(design @ [slope, intercept] - y)))
    return RateFit(
        exponent=float(slope), amplitude=float(math.exp(intercept)),
        residual=residual, n_range=(int(ns.min()), int(ns.max())),
    )


_CSV_COLUMNS = (
    "r", "n", "m", "lower", "lower_ci", "l_star", "delta_avg",
    "lower_closed", "upper_exact", "upper_closed", "floor_half",
    "lower_method",
)


def format_number(x) -> str:
    """17-significant-digit decimal rendering (round-trips doubles)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def reports_to_csv(reports: Sequence[BoundReport]) -> str:
    lines = [",".join(_CSV_COLUMNS)]
    for rep in reports:
        row = [getattr(rep, col) for col in _CSV_COLUMNS]
        lines.append(",".join(
            v if isinstance(v, str) else format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def sweep_summary(reports: Sequence[BoundReport]) -> dict:
    """Rate fits of the exact upper and MC/exact lower surrogates, as the
    JSON-ready summary emitted next to the consolidated CSV."""
    fit_upper = rate_fit([(rep.n, rep.upper_exact) for rep in reports])
    fit_lower = rate_fit([(rep.n, rep.lower) for rep in reports])
    return {
        "r": reports[0].r,
        "exponent_upper": fit_upper.exponent,
        "exponent_lower": fit_lower.exponent,
        "amplitudes": {"upper": fit_upper.amplitude,
                       "lower": fit_lower.amplitude},
        "residuals": {"upper": fit_upper.residual,
                      "lower": fit_lower.residual},
        "n_range": list(fit_upper.n_range),
    }


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, indent=2) + "\n"
