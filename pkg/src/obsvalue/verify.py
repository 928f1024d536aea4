"""Self-contained property suite behind the ``verify`` CLI subcommand.

Every identity, oracle equivalence, and simulation contract the library
relies on is re-checked here from scratch (brute-force enumeration, Simpson
quadrature, empirical frequencies) and reported as one PASS/FAIL line per
property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import densities, lower, pbin, rates, upper
from .streams import child_rng


@dataclass(frozen=True)
class Budget:
    pmf_sets: int = 300
    shift_sets: int = 1000
    sample_draws: int = 1_000_000
    mc_draws: int = 200_000
    sim_trials: int = 200_000
    inject_reps: int = 200_000
    curve_n: int = 256
    cube_ns: tuple[int, ...] = (1, 2, 4, 8)
    mc_samples: int = 30_000


QUICK = Budget(pmf_sets=60, shift_sets=200, sample_draws=200_000,
               mc_draws=50_000, sim_trials=50_000, inject_reps=50_000,
               curve_n=64, cube_ns=(1, 2, 4), mc_samples=10_000)
FULL = Budget()


def _enum_pmf(probs: np.ndarray) -> np.ndarray:
    """Brute-force PBin pmf over all 2^m Bernoulli outcomes."""
    m = probs.size
    ids = np.arange(1 << m, dtype=np.uint32)
    bits = (ids[:, None] >> np.arange(m)) & 1
    terms = np.where(bits == 1, probs, 1.0 - probs).prod(axis=1)
    return np.bincount(bits.sum(axis=1), weights=terms, minlength=m + 1)


def _simpson(f: Callable, a: float, b: float, n: int = 40001) -> float:
    x = np.linspace(a, b, n)
    y = f(x)
    h = (b - a) / (n - 1)
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum())


def _random_density(rng: np.random.Generator) -> densities.StepDensity:
    k = int(rng.integers(1, 8))
    cuts = np.sort(rng.random(k))
    bp = np.concatenate(([0.0], cuts, [1.0]))
    heights = rng.uniform(0.1, 2.0, size=k + 1)
    return densities.StepDensity(bp, heights, normalize=True)


def _random_hypercube(rng: np.random.Generator) -> densities.HypercubeSpec:
    r = float(rng.uniform(1.1, 8.0))
    m = int(rng.integers(1, 7))
    return densities.HypercubeSpec(r, m, rng.integers(0, 2, size=m))


def check_spot_values(budget: Budget, rng) -> tuple[bool, str]:
    checks = [
        abs(pbin.pbin_pmf([0.1, 0.2, 0.3])
            - [0.504, 0.398, 0.092, 0.006]).max(),
        abs(pbin.pbin_survival([0.25, 0.5], 1) - 0.625),
        abs(upper.exact_mad(upper.TwoLevelRatio(2.0, 2 / 3, 0.25), 2) - 0.375),
        abs(lower.bayes_risk_curve(2.0, 3).values
            - [0.5, 0.25, 0.25, 0.15625]).max(),
        abs(lower.cube_lower(1, 2.0).delta - 0.09375),
        abs(lower.richness_lower_bound(0.5, 1.0, 1) - 0.5 / 24.0),
        abs(upper.certificate_upper_bound(upper.hoeffding_certificate(2.0), 0)
            - 2.0 * math.sqrt(math.pi / 2.0)),
    ]
    worst = max(checks)
    return worst <= 1e-12, f"max_err={worst:.3e}"


def check_pmf_enumeration(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(budget.pmf_sets):
        p = rng.random(int(rng.integers(0, 11)))
        worst = max(worst, np.abs(pbin.pbin_pmf(p) - _enum_pmf(p)).max())
    return worst <= 1e-12, f"sets={budget.pmf_sets}, max_err={worst:.3e}"


def check_pmf_permutation(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(budget.pmf_sets):
        p = rng.random(int(rng.integers(1, 13)))
        ref = pbin.pbin_pmf(p)
        worst = max(worst, np.abs(pbin.pbin_pmf(rng.permutation(p)) - ref).max())
    return worst <= 1e-12, f"max_err={worst:.3e}"


def check_survival_monotone(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(budget.pmf_sets):
        p = rng.random(int(rng.integers(1, 11)))
        i = int(rng.integers(p.size))
        q = p.copy()
        q[i] = rng.uniform(0.0, p[i])
        for l in range(p.size + 1):
            worst = max(worst, pbin.pbin_survival(q, l) - pbin.pbin_survival(p, l))
    return worst <= 1e-12, f"max_increase={worst:.3e}"


def check_shift_identity(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(budget.shift_sets):
        rest = rng.random(int(rng.integers(0, 10)))
        hi, lo = np.sort(rng.random(2))[::-1]
        if hi == lo:
            continue
        l = int(rng.integers(1, rest.size + 2))
        lhs, rhs = pbin.pbin_shift_difference(rest, hi, lo, l)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-12, f"sets={budget.shift_sets}, max_err={worst:.3e}"


def check_multinomial_enumeration(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 5))
        w = rng.random(m)
        w /= w.sum()
        trials = int(rng.integers(0, 7))
        _, probs = pbin.multinomial_enumerate(trials, w)
        worst = max(worst, abs(probs.sum() - 1.0))
    return worst <= 1e-10, f"max_sum_err={worst:.3e}"


def check_multinomial_frequencies(budget: Budget, rng) -> tuple[bool, str]:
    w = np.array([0.2, 0.3, 0.5])
    trials, draws = 3, budget.sample_draws
    counts, probs = pbin.multinomial_enumerate(trials, w)
    samples = rng.multinomial(trials, w, size=draws)
    key = samples @ np.array([1, 10, 100])
    ref_key = counts @ np.array([1, 10, 100])
    worst = 0.0
    for k, p in zip(ref_key, probs):
        freq = np.count_nonzero(key == k) / draws
        se = math.sqrt(p * (1.0 - p) / draws)
        worst = max(worst, abs(freq - p) / max(se, 1e-300))
    return worst <= 4.0, f"draws={draws}, worst_z={worst:.2f}"


def check_density_construction(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        spec = _random_hypercube(rng)
        f = densities.hypercube_density(spec)
        worst = max(worst, abs(densities.density_integral(f, 0.0, 1.0) - 1.0))
        if f.values.min() < 1.0 / spec.r - 1e-12:
            return False, "height below the 1/r floor"
    return worst <= 1e-12, f"max_integral_err={worst:.3e}"


def check_tv_triangle(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        f, g, h = (_random_density(rng) for _ in range(3))
        worst = max(worst, densities.tv_distance(f, h)
                    - densities.tv_distance(f, g) - densities.tv_distance(g, h))
    return worst <= 1e-12, f"max_violation={worst:.3e}"


def check_tv_bit_flips(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(50):
        spec = _random_hypercube(rng)
        flips = rng.integers(0, 2, size=spec.m)
        other = densities.HypercubeSpec(
            spec.r, spec.m, tuple(int(b ^ fl) for b, fl in zip(spec.bits, flips)))
        k = int(flips.sum())
        got = densities.tv_distance(densities.hypercube_density(spec),
                                    densities.hypercube_density(other))
        worst = max(worst, abs(got - k * (1.0 - 1.0 / spec.r) / spec.m))
    return worst <= 1e-12, f"max_err={worst:.3e}"


def check_sampler_frequencies(budget: Budget, rng) -> tuple[bool, str]:
    n = 100_000
    worst = 0.0
    for _ in range(5):
        f = _random_density(rng)
        x = densities.sample_density(f, n, rng)
        cells = np.linspace(0.0, 1.0, 5)
        for a, b in zip(cells[:-1], cells[1:]):
            p = densities.density_integral(f, float(a), float(b))
            freq = np.count_nonzero((x >= a) & (x < b)) / n
            se = math.sqrt(max(p * (1.0 - p), 1e-12) / n)
            worst = max(worst, abs(freq - p) / se)
    return worst <= 4.0, f"worst_z={worst:.2f}"


def check_witness(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(20):
        spec = _random_hypercube(rng)
        wit = densities.richness_witness(spec.r, spec.m)
        if abs(wit.alpha - (1.0 - 1.0 / spec.r)) > 1e-12:
            return False, "alpha mismatch"
        for q0, q1 in wit.pairs:
            worst = max(worst, abs(densities.tv_distance(q0, q1) - wit.alpha))
        rebuilt = wit.assemble(spec.bits)
        direct = densities.hypercube_density(spec)
        grid = np.linspace(0.0, 1.0, 4 * spec.m + 1)[:-1]
        worst = max(worst, np.abs(rebuilt(grid) - direct(grid)).max())
    return worst <= 1e-12, f"max_err={worst:.3e}"


def check_ratio_mean(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        ratio = upper.uniform_ratio(_random_density(rng))
        worst = max(worst, abs(ratio.mean - 1.0))
    return worst <= 1e-12, f"max_err={worst:.3e}"


def check_mad_mc_agreement(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for r, k, seed in ((2.0, 2, 11), (4.0, 5, 12), (1.5, 3, 13)):
        f = densities.hypercube_density(densities.HypercubeSpec(r, 2, (0, 1)))
        exact = upper.exact_mad(upper.uniform_ratio(f).two_level, k)
        est, hw = upper.mc_mad(f, k, budget.mc_draws, seed=seed)
        worst = max(worst, abs(est - exact) / max(hw, 1e-300))
    return worst <= 1.0, f"worst_dev_over_ci={worst:.2f}"


def check_mad_bounds(budget: Budget, rng) -> tuple[bool, str]:
    ks = [1, 2, 4, 16, 64, 256, 1024, 10_000]
    for r in (1.5, 2.0, 4.0):
        cert = upper.hoeffding_certificate(r)
        ratio = upper.uniform_ratio(
            densities.hypercube_density(densities.HypercubeSpec(r, 1, (0,)))
        ).two_level
        for k in ks:
            mad = upper.exact_mad(ratio, k)
            if mad / 2.0 >= upper.certificate_upper_bound(cert, k - 1):
                return False, f"closed form not dominating at r={r}, k={k}"
            if mad < upper.mad_floor(ratio, k):
                return False, f"floor violated at r={r}, k={k}"
    scaled = [upper.exact_mad(ratio, k) * math.sqrt(k) for k in ks]
    return True, f"r=4 mad*sqrt(k) in [{min(scaled):.3f}, {max(scaled):.3f}]"


def check_chi2_quadrature(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for C, s in ((2.0, 0.5), (1.0, 1.0), (3.0, 0.125), (1.5, 2.0)):
        x0 = math.sqrt(math.log(C) / s)
        quad = _simpson(
            lambda x: x**2 * 2.0 * s * x * C * np.exp(-s * x * x),
            x0, x0 + 40.0 / math.sqrt(s))
        closed = upper.chi2_radius(upper.CsCertificate(C, s))
        worst = max(worst, abs(quad - closed))
    return worst <= 1e-8, f"max_err={worst:.3e}"


def check_inject_positions(budget: Budget, rng) -> tuple[bool, str]:
    base = np.array([0.25, 0.75])
    reps = budget.inject_reps
    hits = np.zeros(3)
    for _ in range(reps):
        out = upper.inject_kernel(base, rng)
        pos = 0 if out[0] != 0.25 else (1 if out[1] != 0.75 else 2)
        hits[pos] += 1
    se = math.sqrt((1 / 3) * (2 / 3) / reps)
    worst = np.abs(hits / reps - 1 / 3).max() / se
    return worst <= 4.0, f"reps={reps}, worst_z={worst:.2f}"


def check_inject_mixture(budget: Budget, rng) -> tuple[bool, str]:
    f = densities.hypercube_density(densities.HypercubeSpec(2.0, 1, (0,)))
    n, reps = 3, budget.inject_reps
    p_cell = densities.density_integral(f, 0.0, 0.5)
    ref = pbin.pbin_pmf([p_cell] * n + [0.5])
    x = densities.sample_density(f, reps * n, rng).reshape(reps, n)
    y = rng.random(reps)
    counts = (x < 0.5).sum(axis=1) + (y < 0.5)
    worst = 0.0
    for k, p in enumerate(ref):
        freq = np.count_nonzero(counts == k) / reps
        se = math.sqrt(max(p * (1.0 - p), 1e-12) / reps)
        worst = max(worst, abs(freq - p) / se)
    return worst <= 4.0, f"worst_z={worst:.2f}"


def check_risk_curve(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    for r in (1.5, 2.0, 4.0):
        curve = lower.bayes_risk_curve(r, budget.curve_n)
        v = curve.values
        if v[0] != 0.5 or np.any(np.diff(v) > 0.0):
            return False, f"curve shape violated at r={r}"
        worst = max(worst, abs(v[1] - 1.0 / (2.0 * r)))
        # one-observation drop equals alpha/2 for this family
        worst = max(worst, abs((v[0] - v[1]) - (1.0 - 1.0 / r) / 2.0))
    return worst <= 1e-12, f"max_err={worst:.3e}"


def check_cube_exact_vs_mc(budget: Budget, rng) -> tuple[bool, str]:
    n, r = 2, 2.0
    exact = lower.cube_lower(n, r)
    risks = lower.bayes_risk_curve(r, n + 1).values
    from .constants import MC_CHUNK
    from .streams import chunk_sizes
    samples = budget.mc_samples
    cache: dict = {}
    parts = [lower._cube_chunk(n, 2 * n, risks, rows, 21, i, cache)
             for i, rows in enumerate(chunk_sizes(samples, MC_CHUNK))]
    per_l = np.sum([p[0] for p in parts], axis=0) / samples
    var = np.maximum(np.sum([p[1] for p in parts], axis=0) / samples - per_l**2, 0.0)
    ci = 3.0 * np.sqrt(var / samples)
    dev = np.abs(per_l - exact.per_l) / np.maximum(ci, 1e-300)
    return float(dev.max()) <= 1.0, f"worst_dev_over_ci={dev.max():.2f}"


def check_cube_bounds(budget: Budget, rng) -> tuple[bool, str]:
    margin = math.inf
    for r in (1.5, 2.0, 4.0):
        for n in budget.cube_ns:
            res = lower.cube_lower(n, r, mc_samples=budget.mc_samples,
                                   seed=31 + n)
            if res.per_l.min() < 0.0:
                return False, f"negative per-l delta at r={r}, n={n}"
            closed = lower.richness_lower_bound(1.0 - 1.0 / r, 1.0, n)
            margin = min(margin, res.delta + res.ci_at_star - closed)
    return margin >= 0.0, f"min_margin={margin:.4f}"


def check_mixedpbin(budget: Budget, rng) -> tuple[bool, str]:
    lines = []
    ok = True
    for m in (1, 2, 4, 9):
        for r in (1.5, 2.0, 4.0):
            for n in (max(1, round(m / 2)), m):
                table = lower.bayes_risk_curve(r, n).values
                res = lower.mixedpbin_mass(n, m, np.full(m, 1.0 / m), table,
                                           mc_samples=budget.mc_samples,
                                           seed=77)
                scaled = res.mass * math.sqrt(m)
                ok = ok and scaled >= 1.0 / 6.0
                lines.append(scaled)
    return ok, (f"min_mass*sqrt(m)={min(lines):.4f}, "
                f"cases_above_1/3={sum(v >= 1/3 for v in lines)}/{len(lines)}")


def check_simulations(budget: Budget, rng) -> tuple[bool, str]:
    worst = 0.0
    trials = max(budget.sim_trials, 10_000)
    for _ in range(5):
        m = int(rng.integers(1, 6))
        risks = rng.random(m)
        l = int(rng.integers(1, m + 1))
        target = pbin.pbin_survival(risks, l)
        est = lower.simulate_multitest_risk(risks, l, trials, rng)
        se = math.sqrt(max(target * (1 - target), 1e-12) / trials)
        worst = max(worst, abs(est - target) / se)

        w = rng.random(m)
        w /= w.sum()
        target = float(risks @ w)
        est = lower.simulate_mixture_risk(risks, w, trials, rng)
        se = math.sqrt(max(target * (1 - target), 1e-12) / trials)
        worst = max(worst, abs(est - target) / se)
    return worst <= 4.0, f"worst_z={worst:.2f}"


def check_rate_fit(budget: Budget, rng) -> tuple[bool, str]:
    fit = rates.rate_fit([(n, 7.0 / math.sqrt(n + 1.0))
                          for n in (1, 3, 7, 15, 31)])
    err = max(abs(fit.exponent + 0.5), abs(fit.amplitude - 7.0))
    flat = rates.rate_fit([(n, 3.0) for n in (1, 2, 3, 4)])
    err = max(err, abs(flat.exponent))
    return err <= 1e-9, f"max_err={err:.3e}"


def check_report_orderings(budget: Budget, rng) -> tuple[bool, str]:
    cfg = rates.SweepConfig(mc_samples=budget.mc_samples, seed=5)
    reports = rates.bound_sweep(2.0, list(budget.cube_ns), cfg)
    # BoundReport validates the orderings on construction; re-check scaling.
    scaled = [rep.upper_closed * math.sqrt(rep.n + 1.0) for rep in reports]
    spread = max(scaled) - min(scaled)
    sandwich = all(rep.lower - rep.lower_ci <= rep.upper_exact
                   for rep in reports)
    return spread <= 1e-12 and sandwich, (
        f"upper_closed*sqrt(n+1) spread={spread:.2e}, sandwich={sandwich}")


def check_sweep_determinism(budget: Budget, rng) -> tuple[bool, str]:
    cfg1 = rates.SweepConfig(mc_samples=budget.mc_samples, seed=9, workers=1)
    cfg3 = rates.SweepConfig(mc_samples=budget.mc_samples, seed=9, workers=3)
    ns = [4, 8]
    csv1 = rates.reports_to_csv(rates.bound_sweep(2.0, ns, cfg1))
    csv3 = rates.reports_to_csv(rates.bound_sweep(2.0, ns, cfg3))
    return csv1 == csv3, f"identical={csv1 == csv3}"


CHECKS: tuple[tuple[str, Callable], ...] = (
    ("spot-values", check_spot_values),
    ("pbin-pmf-vs-enumeration", check_pmf_enumeration),
    ("pbin-pmf-permutation-invariance", check_pmf_permutation),
    ("pbin-survival-stochastic-monotonicity", check_survival_monotone),
    ("pbin-shift-identity", check_shift_identity),
    ("multinomial-enumeration-total-mass", check_multinomial_enumeration),
    ("multinomial-sample-frequencies", check_multinomial_frequencies),
    ("density-construction", check_density_construction),
    ("tv-triangle-inequality", check_tv_triangle),
    ("tv-bit-flip-identity", check_tv_bit_flips),
    ("sampler-cell-frequencies", check_sampler_frequencies),
    ("richness-witness", check_witness),
    ("ratio-unit-mean", check_ratio_mean),
    ("mad-exact-vs-mc", check_mad_mc_agreement),
    ("mad-closed-form-and-floor", check_mad_bounds),
    ("chi2-radius-quadrature", check_chi2_quadrature),
    ("inject-position-law", check_inject_positions),
    ("inject-mixture-law", check_inject_mixture),
    ("bayes-risk-curve", check_risk_curve),
    ("cube-exact-vs-mc", check_cube_exact_vs_mc),
    ("cube-dominates-closed-form", check_cube_bounds),
    ("mixedpbin-mass-floor", check_mixedpbin),
    ("multitest-and-mixture-simulations", check_simulations),
    ("rate-fit-power-law", check_rate_fit),
    ("report-orderings", check_report_orderings),
    ("sweep-worker-determinism", check_sweep_determinism),
)


def run_verify(quick: bool = False, seed: int = 0, out=print) -> int:
    """Run every property check; returns the number of failures."""
    budget = QUICK if quick else FULL
    failures = 0
    for name, fn in CHECKS:
        rng = child_rng(seed, f"verify:{name}", 0)
        try:
            ok, msg = fn(budget, rng)
        except Exception as exc:  # a crashed check is a failed check
            ok, msg = False, f"error={exc!r}"
        failures += not ok
        out(f"{'PASS' if ok else 'FAIL'} {name}: {msg}")
    out(f"done: {len(CHECKS)} properties, {failures} failures")
    return failures
