"""Lower bounds via per-cell testing risks and mixed Poisson-binomial laws.

Splitting the sample space into m cells turns n observations into a
multinomial allocation of per-cell sample sizes; the best joint test of the
per-cell two-point hypotheses errs in >= l cells with probability
P(PBin(r_1(N_1), ..., r_m(N_m)) >= l), where r_j(.) is the per-cell Bayes
risk curve.  The drop of that survival when one more observation arrives is a
valid deficiency lower bound for every threshold l; this module computes it
exactly (under the enumeration guard) or by Monte Carlo over counts with
exact inner Poisson-binomial values, together with the closed-form bound
alpha * beta / (12 sqrt(2) sqrt(n+1)) it certifies.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import CI_SIGMA, ENUM_GUARD, MC_CHUNK
from .pbin import binom_pmf, multinomial_enumerate, n_compositions
from .streams import child_rng, chunk_sizes

_TRIM = 1e-18  # tail mass dropped per side of each cached Binomial window


@dataclass(frozen=True)
class RiskCurve:
    """Per-cell minimum Bayes testing risks n -> r(n), nonincreasing from
    r(0) = 1/2."""

    r: float
    values: np.ndarray

    def __post_init__(self):
        if self.r <= 1.0:
            raise ValueError("requires r > 1")
        v = self.values
        if v[0] != 0.5:
            raise ValueError("r(0) must equal 1/2 exactly")
        if v.min() < 0.0 or v.max() > 0.5:
            raise ValueError("risks must lie in [0, 1/2]")
        if np.any(np.diff(v) > 0.0):
            raise ValueError("risks must be nonincreasing")

    @property
    def n_max(self) -> int:
        return self.values.size - 1


def bayes_risk_curve(r: float, n_max: int) -> RiskCurve:
    """Exact risks r(n) = (1/2) sum_k min(Bin(n, a)(k), Bin(n, 1-a)(k)) with
    a = 1/(2r): the left-half count within a cell is a sufficient statistic
    for the cell's two-level pair, whose left-half masses are a and 1 - a.
    """
    if r <= 1.0:
        raise ValueError("requires r > 1")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    a = 1.0 / (2.0 * r)
    values = np.empty(n_max + 1)
    values[0] = 0.5
    pmf = np.array([1.0])
    for n in range(1, n_max + 1):
        nxt = np.zeros(pmf.size + 1)
        nxt[:-1] = pmf * (1.0 - a)
        nxt[1:] += pmf * a
        pmf = nxt
        values[n] = 0.5 * float(np.minimum(pmf, pmf[::-1]).sum())
    # The curve is nonincreasing with exactly-flat steps; clamp out
    # last-ulp rounding disagreements between neighbouring evaluations.
    values = np.minimum.accumulate(values)
    return RiskCurve(r=r, values=values)


def richness_lower_bound(alpha: float, beta: float, n: int) -> float:
    """Closed-form deficiency lower bound alpha*beta / (12 sqrt(2) sqrt(n+1))
    for a model that is (2n, alpha, beta)-rich."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("requires alpha in (0, 1]")
    if not 0.0 < beta <= 1.0:
        raise ValueError("requires beta in (0, 1]")
    if n < 1:
        raise ValueError("requires n >= 1")
    return alpha * beta / (12.0 * math.sqrt(2.0) * math.sqrt(n + 1.0))


def _pbin_pmf_batch(probs: np.ndarray) -> np.ndarray:
    """Row-wise PBin pmf by convolution DP: (B, m) probs -> (B, m+1) pmfs."""
    rows, m = probs.shape
    pmf = np.ones((rows, 1))
    for j in range(m):
        q = probs[:, j:j + 1]
        nxt = np.zeros((rows, pmf.shape[1] + 1))
        nxt[:, :-1] = pmf * (1.0 - q)
        nxt[:, 1:] += pmf * q
        pmf = nxt
    return pmf


def _binom_window(k: int, q: float, cache: dict) -> tuple[int, np.ndarray]:
    """Bin(k, q) pmf with <= _TRIM tail mass dropped per side, as
    (offset, window)."""
    key = (k, q)
    hit = cache.get(key)
    if hit is not None:
        return hit
    pmf = binom_pmf(k, q)
    c = np.cumsum(pmf)
    lo = int(np.searchsorted(c, _TRIM))
    hi = int(np.searchsorted(c, 1.0 - _TRIM))
    out = (lo, pmf[lo:hi + 1])
    cache[key] = out
    return out


def _grouped_pbin_pmf(
    groups: Sequence[tuple[int, float]], cache: dict
) -> tuple[int, np.ndarray]:
    """PBin pmf for parameters given as (multiplicity, value) groups, via
    convolution of per-group Binomial windows; returns (offset, window)."""
    windows = [_binom_window(k, q, cache) for k, q in groups if k > 0]
    if not windows:
        return 0, np.array([1.0])
    windows.sort(key=lambda w: w[1].size)
    off, acc = windows[0]
    for o, w in windows[1:]:
        acc = np.convolve(acc, w)
        off += o
    return off, acc


@dataclass(frozen=True)
class CubeLowerResult:
    """Survival-gap lower bound over the 2n-cell witness for one n.

    ``per_l[l-1]`` is the gap at threshold l; ``delta`` its maximum (at
    ``l_star``) and ``delta_avg`` the best average of two adjacent
    thresholds.  ``ci`` holds 3-sigma half-widths, all zero on the exact
    path.
    """

    r: float
    n: int
    m: int
    l_star: int
    delta: float
    delta_avg: float
    per_l: np.ndarray
    ci: np.ndarray
    method: str
    samples: int = 0

    @property
    def ci_at_star(self) -> float:
        return float(self.ci[self.l_star - 1])


def _exact_survival_gap(
    n: int, m: int, risks: np.ndarray
) -> np.ndarray:
    """per-l gaps E[P(PBin(r(N)) >= l)] - E[P(PBin(r(N'))) >= l)], exactly."""
    weights = np.full(m, 1.0 / m)
    acc = []
    for trials in (n, n + 1):
        counts, probs = multinomial_enumerate(trials, weights)
        pmfs = _pbin_pmf_batch(risks[counts])
        surv = np.cumsum(pmfs[:, ::-1], axis=1)[:, ::-1]
        acc.append(probs @ surv)
    return (acc[0] - acc[1])[1:]


def _row_histograms(counts: np.ndarray) -> np.ndarray:
    """Row-wise histogram of small nonnegative ints: (B, m) -> (B, max+1)."""
    rows = counts.shape[0]
    top = int(counts.max(initial=0)) + 1
    offsets = np.arange(rows)[:, None] * top
    flat = np.bincount((counts + offsets).ravel(), minlength=rows * top)
    return flat.reshape(rows, top)


def _cube_chunk(
    n: int, m: int, risks: np.ndarray, rows: int, seed: int, index: int,
    cache: dict,
) -> tuple[np.ndarray, np.ndarray]:
    """One MC chunk of the coupled estimator; returns per-l (sum, sumsq).

    Couples N' = N + one extra uniformly-placed count; by the shift identity
    the survival gap at threshold l is then
    (r(c) - r(c+1)) * P(PBin(other cells' risks) = l - 1) with c the tagged
    cell's count, which is evaluated exactly.  Every contribution is >= 0.
    """
    rng = child_rng(seed, "cube_lower", index)
    counts = rng.multinomial(n, np.full(m, 1.0 / m), size=rows)
    tagged = counts[:, -1]
    hists = _row_histograms(counts[:, :-1])
    gaps = risks[tagged] - risks[tagged + 1]
    total = np.zeros(m)
    total_sq = np.zeros(m)
    for i in range(rows):
        w = gaps[i]
        if w == 0.0:
            continue
        groups = [(int(k), float(risks[c]))
                  for c, k in enumerate(hists[i]) if k > 0]
        off, pmf = _grouped_pbin_pmf(groups, cache)
        vals = w * pmf
        total[off:off + vals.size] += vals
        total_sq[off:off + vals.size] += np.square(vals)
    return total, total_sq


def _run_chunks(tasks, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda t: t[0](*t[1]), tasks))
    return [fn(*args) for fn, args in tasks]


def cube_lower(
    n: int,
    r: float,
    mc_samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> CubeLowerResult:
    """Deficiency lower bound from the 2n-cell uniform-weight witness.

    Computes, for every threshold l, the drop in the best multi-test risk
    when the n-observation multinomial allocation gains one extra
    observation, and returns the best threshold.  Exact while both
    enumerations stay under the composition guard, otherwise Monte Carlo
    over counts (``mc_samples`` count vectors, exact inner values).
    """
    if n < 1:
        raise ValueError("requires n >= 1")
    if r <= 1.0:
        raise ValueError("requires r > 1")
    m = 2 * n
    risks = bayes_risk_curve(r, n + 1).values
    exact_ok = (n_compositions(n, m) <= ENUM_GUARD
                and n_compositions(n + 1, m) <= ENUM_GUARD)
    if exact_ok:
        per_l = _exact_survival_gap(n, m, risks)
        ci = np.zeros(m)
        method, samples = "exact", 0
    else:
        if mc_samples < 100:
            raise ValueError("requires mc_samples >= 100 on the Monte Carlo "
                             "path")
        sizes = chunk_sizes(mc_samples, MC_CHUNK)
        cache: dict = {}
        tasks = [(_cube_chunk, (n, m, risks, rows, seed, i, cache))
                 for i, rows in enumerate(sizes)]
        parts = _run_chunks(tasks, workers)
        total = np.sum([p[0] for p in parts], axis=0)
        total_sq = np.sum([p[1] for p in parts], axis=0)
        per_l = total / mc_samples
        var = np.maximum(total_sq / mc_samples - per_l**2, 0.0)
        ci = CI_SIGMA * np.sqrt(var / mc_samples)
        method, samples = "mc", mc_samples
    l_star = int(np.argmax(per_l)) + 1
    pair_avg = 0.5 * (per_l[:-1] + per_l[1:])
    delta_avg = float(pair_avg.max()) if m >= 2 else float(per_l[0])
    return CubeLowerResult(
        r=r, n=n, m=m, l_star=l_star, delta=float(per_l[l_star - 1]),
        delta_avg=delta_avg, per_l=per_l, ci=ci, method=method,
        samples=samples,
    )


@dataclass(frozen=True)
class MixedPbinResult:
    """Largest point mass of a multinomially mixed Poisson-binomial law."""

    k_star: int
    mass: float
    masses: np.ndarray
    ci: np.ndarray
    method: str
    samples: int = 0

    @property
    def ci_at_star(self) -> float:
        return float(self.ci[self.k_star])


def _mixed_chunk(
    n: int, m: int, weights: np.ndarray, table: np.ndarray, rows: int,
    seed: int, index: int, cache: dict,
) -> tuple[np.ndarray, np.ndarray]:
    rng = child_rng(seed, "mixedpbin", index)
    counts = rng.multinomial(n, weights, size=rows)
    hists = _row_histograms(counts)
    total = np.zeros(m + 1)
    total_sq = np.zeros(m + 1)
    for i in range(rows):
        groups = [(int(k), float(table[c]))
                  for c, k in enumerate(hists[i]) if k > 0]
        off, pmf = _grouped_pbin_pmf(groups, cache)
        total[off:off + pmf.size] += pmf
        total_sq[off:off + pmf.size] += np.square(pmf)
    return total, total_sq


def mixedpbin_mass(
    n: int,
    m: int,
    weights: Sequence[float],
    f: Sequence[float],
    mc_samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> MixedPbinResult:
    """Best outcome mass max_k E[P(PBin(f(N_1), ..., f(N_m)) = k)] with
    N ~ Mult(n, weights) and ``f`` a monotone table on {0, ..., n}.

    Exact under the enumeration guard, else Monte Carlo with a 3-sigma CI.
    """
    if n < 1:
        raise ValueError("requires n >= 1")
    table = np.asarray(f, dtype=float)
    if table.ndim != 1 or table.size != n + 1:
        raise ValueError("f must tabulate {0, ..., n}")
    if table.min() < 0.0 or table.max() > 1.0:
        raise ValueError("f values must lie in [0, 1]")
    d = np.diff(table)
    if table.size > 1 and not (np.all(d >= 0.0) or np.all(d <= 0.0)):
        raise ValueError("f must be monotone (nonincreasing or nondecreasing)")
    w = np.asarray(weights, dtype=float)
    if w.size != m:
        raise ValueError("need exactly m weights")
    if n_compositions(n, m) <= ENUM_GUARD:
        counts, probs = multinomial_enumerate(n, w)
        masses = probs @ _pbin_pmf_batch(table[counts])
        ci = np.zeros(m + 1)
        method, samples = "exact", 0
    else:
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        if mc_samples < 100:
            raise ValueError("requires mc_samples >= 100 on the Monte Carlo "
                             "path")
        sizes = chunk_sizes(mc_samples, MC_CHUNK)
        cache: dict = {}
        tasks = [(_mixed_chunk, (n, m, w / w.sum(), table, rows, seed, i, cache))
                 for i, rows in enumerate(sizes)]
        parts = _run_chunks(tasks, workers)
        total = np.sum([p[0] for p in parts], axis=0)
        total_sq = np.sum([p[1] for p in parts], axis=0)
        masses = total / mc_samples
        var = np.maximum(total_sq / mc_samples - masses**2, 0.0)
        ci = CI_SIGMA * np.sqrt(var / mc_samples)
        method, samples = "mc", mc_samples
    k_star = int(np.argmax(masses))
    return MixedPbinResult(
        k_star=k_star, mass=float(masses[k_star]), masses=masses, ci=ci,
        method=method, samples=samples,
    )


def simulate_multitest_risk(
    risks: Sequence[float], l: int, trials: int, rng: np.random.Generator
) -> float:
    """Empirical probability that independent per-cell tests with error
    probabilities ``risks`` err in at least ``l`` cells; converges to
    P(PBin(risks) >= l)."""
    p = np.asarray(risks, dtype=float)
    if p.ndim != 1 or p.size < 1 or p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("risks must be probabilities")
    if not 1 <= l <= p.size:
        raise ValueError("requires 1 <= l <= len(risks)")
    if trials < 10_000:
        raise ValueError("requires trials >= 10000")
    hits = 0
    batch = max(1, (1 << 22) // p.size)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        errors = rng.random((b, p.size)) < p
        hits += int(np.count_nonzero(errors.sum(axis=1) >= l))
        done += b
    return hits / trials


def simulate_mixture_risk(
    component_risks: Sequence[float],
    weights: Sequence[float],
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Empirical risk of deciding in a randomly selected component
    experiment; converges to the weighted average of component risks."""
    p = np.asarray(component_risks, dtype=float)
    w = np.asarray(weights, dtype=float)
    if p.shape != w.shape or p.ndim != 1 or p.size < 1:
        raise ValueError("risks and weights must be equal-length sequences")
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("risks must be probabilities")
    if trials < 10_000:
        raise ValueError("requires trials >= 10000")
    component = rng.choice(p.size, size=trials, p=w / w.sum())
    errors = rng.random(trials) < p[component]
    return float(np.count_nonzero(errors)) / trials
