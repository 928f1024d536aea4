"""Exact Poisson-binomial, Binomial, and Multinomial computations.

The Poisson-binomial distribution PBin(p_1, ..., p_m) is the law of a sum of
independent Bernoulli variables with success probabilities p_1, ..., p_m.
Everything here is computed by exact convolution or exact enumeration; the
only randomness is an explicit generator passed by the caller.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .constants import ENUM_GUARD


class EnumerationGuardError(ValueError):
    """Raised when an exact enumeration would exceed the composition guard.

    Callers should fall back to the Monte Carlo path.
    """


def _as_probs(probs: Iterable[float]) -> np.ndarray:
    p = np.asarray(list(probs) if not isinstance(probs, np.ndarray) else probs,
                   dtype=float)
    if p.ndim != 1:
        raise ValueError("success probabilities must form a 1-D sequence")
    if p.size and (not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("success probabilities must lie in [0, 1]")
    return p


def pbin_pmf(probs: Sequence[float]) -> np.ndarray:
    """Probability mass function of PBin(probs), length ``len(probs) + 1``.

    Iterative convolution (dynamic programming), exact up to floating-point
    rounding and invariant under permutation of ``probs``.  The empty
    parameter list yields the point mass at zero.
    """
    p = _as_probs(probs)
    mass = np.array([1.0])
    for q in p:
        nxt = np.zeros(mass.size + 1)
        nxt[:-1] = mass * (1.0 - q)
        nxt[1:] += mass * q
        mass = nxt
    return mass


def pbin_survival(probs: Sequence[float], l: int) -> float:
    """P(PBin(probs) >= l).  Returns 1 for l <= 0 and 0 for l > len(probs)."""
    p = _as_probs(probs)
    m = p.size
    if l <= 0:
        return 1.0
    if l > m:
        return 0.0
    mass = pbin_pmf(p)
    # Sum the smaller tail to limit cancellation.
    if m + 1 - l <= l:
        return float(np.sum(mass[l:]))
    return float(1.0 - np.sum(mass[:l]))


def pbin_shift_difference(
    params_rest: Sequence[float], p: float, p_prime: float, l: int
) -> tuple[float, float]:
    """Both sides of the one-parameter shift identity for PBin survivals.

    lhs = P(PBin(rest, p) >= l) - P(PBin(rest, p') >= l)
    rhs = P(PBin(rest) = l - 1) * (p - p')

    The two agree exactly; both are returned so the identity can be checked.
    Requires ``p > p_prime`` and ``1 <= l <= len(params_rest) + 1``.
    """
    rest = _as_probs(params_rest)
    for name, value in (("p", p), ("p_prime", p_prime)):
        if not (0.0 <= value <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1]")
    if p <= p_prime:
        raise ValueError("requires p > p_prime")
    if not 1 <= l <= rest.size + 1:
        raise ValueError("requires 1 <= l <= len(params_rest) + 1")
    lhs = pbin_survival(np.append(rest, p), l) - pbin_survival(
        np.append(rest, p_prime), l
    )
    rhs = float(pbin_pmf(rest)[l - 1] * (p - p_prime))
    return lhs, rhs


def binom_pmf(n: int, p: float) -> np.ndarray:
    """Bin(n, p) pmf of length n+1 (lgamma form; ~1e-14 relative accuracy).

    Fast O(n) alternative to ``pbin_pmf([p]*n)`` for large n.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    out = np.zeros(n + 1)
    if p == 0.0:
        out[0] = 1.0
        return out
    if p == 1.0:
        out[n] = 1.0
        return out
    k = np.arange(n + 1, dtype=float)
    logfact = np.array([math.lgamma(i + 1.0) for i in range(n + 1)])
    logpmf = (logfact[n] - logfact - logfact[::-1]
              + k * math.log(p) + (n - k) * math.log1p(-p))
    return np.exp(logpmf)


def _as_weights(weights: Iterable[float]) -> np.ndarray:
    w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights,
                   dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise ValueError("weights must form a nonempty 1-D sequence")
    if not np.all(np.isfinite(w)) or w.min() < 0.0:
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must sum to 1 within 1e-12")
    return w


def multinomial_sample(
    trials: int,
    weights: Sequence[float],
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Draw from Mult(trials, weights): one integer count vector, or a
    (size, m) matrix of independent draws when ``size`` is given."""
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    w = _as_weights(weights)
    # Compensate sub-1e-12 rounding in the caller's weights for numpy.
    return rng.multinomial(trials, w / w.sum(), size=size)


def n_compositions(trials: int, m: int) -> int:
    """Number of ways to split ``trials`` into ``m`` ordered nonnegative parts."""
    return math.comb(trials + m - 1, m - 1)


def _compositions(trials: int, m: int) -> np.ndarray:
    """All compositions of ``trials`` into ``m`` parts, one per row."""
    total = n_compositions(trials, m)
    out = np.zeros((total, m), dtype=np.int64)
    if m == 1:
        out[0, 0] = trials
        return out
    # NEXCOM successor algorithm (constant amortized work per row).
    row = np.zeros(m, dtype=np.int64)
    row[0] = trials
    out[0] = row
    t, h = trials, 0
    for k in range(1, total):
        if t != 1:
            h = 0
        h += 1
        t = int(row[h - 1])
        row[h - 1] = 0
        row[0] = t - 1
        row[h] += 1
        out[k] = row
    return out


def multinomial_enumerate(
    trials: int, weights: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """All count vectors of Mult(trials, weights) with their probabilities.

    Returns ``(counts, probs)`` where ``counts`` has one composition per row.
    Probabilities sum to 1 within 1e-10.  Raises :class:`EnumerationGuardError`
    when the number of compositions exceeds the guard (use Monte Carlo then).
    """
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    w = _as_weights(weights)
    m = w.size
    total = n_compositions(trials, m)
    if total > ENUM_GUARD:
        raise EnumerationGuardError(
            f"{total} compositions exceed the {ENUM_GUARD} guard; "
            "use the Monte Carlo path"
        )
    counts = _compositions(trials, m)
    probs = multinomial_logpmf(counts, w)
    np.exp(probs, out=probs)
    return counts, probs


def multinomial_logpmf(counts: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Log Mult(n, weights) probabilities for each row of ``counts``.

    Cells with zero weight contribute 0 iff their count is zero, else -inf.
    """
    counts = np.atleast_2d(counts)
    n = int(counts[0].sum())
    # logfact[i] = log(i!)
    logfact = np.array([math.lgamma(i + 1.0) for i in range(n + 1)])
    out = np.full(counts.shape[0], logfact[n])
    out -= logfact[counts].sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = counts * np.log(weights)
    zero = weights == 0.0
    if zero.any():
        contrib[:, zero] = np.where(counts[:, zero] == 0, 0.0, -np.inf)
    out += contrib.sum(axis=1)
    return out
