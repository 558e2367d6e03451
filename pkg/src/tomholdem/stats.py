"""Exact small-sample statistics.

Conventions, fixed here so results are comparable across tools:

* rank tests (Mann-Whitney, Wilcoxon, Spearman permutation) report a
  two-tailed p as twice the smaller one-tailed p, capped at 1;
* Fisher and binomial tests sum the probabilities of all outcomes no more
  likely than the observed one;
* ties get midranks everywhere;
* bootstrap resampling draws group ``a`` then group ``b`` independently with
  replacement from a :class:`~tomholdem.rng.SplitMix64` stream, and the CI
  is the linear-interpolated 2.5th/97.5th percentile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps

from .rng import SplitMix64


class StatsError(ValueError):
    pass


class TooLargeForExact(StatsError):
    pass


class ZeroVariance(StatsError):
    pass


class ConstantInput(StatsError):
    pass


class AllZeroDifferences(StatsError):
    pass


class LengthMismatch(StatsError):
    pass


class EmptyInput(StatsError):
    pass


@dataclass(frozen=True)
class GroupSample:
    label: str
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise EmptyInput(f"group {self.label!r} is empty")
        if not all(math.isfinite(v) for v in self.values):
            raise StatsError(f"group {self.label!r} has non-finite values")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_two_tailed: float
    effect: float | None = None
    ci95: tuple[float, float] | None = None
    method: str = ""

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_two_tailed": self.p_two_tailed,
            "effect": self.effect,
            "ci95": list(self.ci95) if self.ci95 is not None else None,
            "method": self.method,
        }


MAX_EXACT_MW = 20


def _values(x) -> np.ndarray:
    if isinstance(x, GroupSample):
        x = x.values
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise StatsError("expected a 1-D sample")
    if not np.all(np.isfinite(arr)):
        raise StatsError("non-finite values")
    return arr


def midranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties sharing the mean rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _two_tailed(p_low: float, p_high: float) -> float:
    return min(1.0, 2 * min(p_low, p_high))


# -- Mann-Whitney / Cliff's delta -------------------------------------------


def _u_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """U for ``a``: pairs with a > b, ties counting one half."""
    gt = (a[:, None] > b[None, :]).sum()
    eq = (a[:, None] == b[None, :]).sum()
    return float(gt + 0.5 * eq)


def mann_whitney_exact(a, b) -> TestResult:
    """Exact two-tailed Mann-Whitney U by enumerating every group assignment.

    Reports ``U = min(U_a, U_b)``; ``effect`` is Cliff's delta for ``a``.
    """
    a, b = _values(a), _values(b)
    n, m = len(a), len(b)
    if n < 1 or m < 1:
        raise EmptyInput("both groups need at least one value")
    if n + m > MAX_EXACT_MW:
        raise TooLargeForExact(f"n + m = {n + m} exceeds {MAX_EXACT_MW}")
    pooled = np.concatenate([a, b])
    r2 = (2 * midranks(pooled)).astype(np.int64)  # doubled ranks are integers
    obs = int(r2[:n].sum())
    combos = np.array(list(combinations(range(n + m), n)), dtype=np.int64)
    sums = r2[combos].sum(axis=1)
    total = len(sums)
    p_low = np.count_nonzero(sums <= obs) / total
    p_high = np.count_nonzero(sums >= obs) / total
    u_a = (obs / 2) - n * (n + 1) / 2
    u = min(u_a, n * m - u_a)
    return TestResult(
        statistic=float(u),
        p_two_tailed=_two_tailed(p_low, p_high),
        effect=2 * u_a / (n * m) - 1,
        method=f"Mann-Whitney U, exact enumeration of {total} assignments",
    )


def _mann_whitney_normal(a: np.ndarray, b: np.ndarray) -> float:
    n, m = len(a), len(b)
    u_a = _u_statistic(a, b)
    ranks = midranks(np.concatenate([a, b]))
    _, tie_counts = np.unique(ranks, return_counts=True)
    N = n + m
    tie_term = ((tie_counts**3 - tie_counts).sum()) / (N * (N - 1))
    var = n * m / 12 * ((N + 1) - tie_term)
    if var == 0:
        return 1.0
    z = (u_a - n * m / 2) / math.sqrt(var)
    return float(min(1.0, 2 * sps.norm.sf(abs(z))))


def cliffs_delta_value(a, b) -> float:
    a, b = _values(a), _values(b)
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("both groups need at least one value")
    gt = (a[:, None] > b[None, :]).sum()
    lt = (a[:, None] < b[None, :]).sum()
    return float((gt - lt) / (len(a) * len(b)))


def cliffs_delta(a, b, *, resamples: int = 10_000, seed: int = 42) -> TestResult:
    """Cliff's delta with its Mann-Whitney p and a bootstrap CI.

    The p is exact when ``n + m <= 20``, normal-approximated otherwise; the CI
    is omitted when either group has fewer than two values.
    """
    a, b = _values(a), _values(b)
    delta = cliffs_delta_value(a, b)
    if len(a) + len(b) <= MAX_EXACT_MW:
        p = mann_whitney_exact(a, b).p_two_tailed
        method = "Cliff's delta; exact Mann-Whitney p"
    else:
        p = _mann_whitney_normal(a, b)
        method = "Cliff's delta; normal-approximation Mann-Whitney p"
    ci = None
    if len(a) >= 2 and len(b) >= 2:
        ci = bootstrap_ci_delta(a, b, resamples=resamples, seed=seed)
    return TestResult(statistic=delta, p_two_tailed=p, effect=delta, ci95=ci, method=method)


# -- bootstrap ---------------------------------------------------------------


def _resample_indices(rng: SplitMix64, resamples: int, n: int) -> np.ndarray:
    return rng.bulk_indices(resamples * n, n).reshape(resamples, n)


def _percentile_ci(samples: np.ndarray) -> tuple[float, float]:
    samples = samples[np.isfinite(samples)]
    if samples.size == 0:
        return (math.nan, math.nan)
    lo, hi = np.percentile(samples, [2.5, 97.5])
    return (float(lo), float(hi))


def bootstrap_distribution(
    a, b, statistic: Callable[[np.ndarray, np.ndarray], np.ndarray], *, resamples: int = 10_000, seed: int = 42
) -> np.ndarray:
    """Statistic over ``resamples`` paired resamples of both groups.

    ``statistic`` receives ``(A, B)`` with one resample per row and returns
    one value per row.
    """
    a, b = _values(a), _values(b)
    rng = SplitMix64(seed)
    ia = _resample_indices(rng, resamples, len(a))
    ib = _resample_indices(rng, resamples, len(b))
    out = np.empty(resamples)
    chunk = max(1, 2_000_000 // max(1, len(a) * len(b)))
    for start in range(0, resamples, chunk):
        sl = slice(start, start + chunk)
        out[sl] = statistic(a[ia[sl]], b[ib[sl]])
    return out


def _delta_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    gt = (A[:, :, None] > B[:, None, :]).sum(axis=(1, 2))
    lt = (A[:, :, None] < B[:, None, :]).sum(axis=(1, 2))
    return (gt - lt) / (A.shape[1] * B.shape[1])


def _d_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    n, m = A.shape[1], B.shape[1]
    pooled = ((n - 1) * A.var(axis=1, ddof=1) + (m - 1) * B.var(axis=1, ddof=1)) / (n + m - 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (A.mean(axis=1) - B.mean(axis=1)) / np.sqrt(pooled)
    d[pooled == 0] = np.nan
    return d


def bootstrap_ci_delta(a, b, resamples: int = 10_000, seed: int = 42) -> tuple[float, float]:
    a, b = _values(a), _values(b)
    if len(a) < 2 or len(b) < 2:
        raise StatsError("bootstrap needs at least two values per group")
    return _percentile_ci(bootstrap_distribution(a, b, _delta_rows, resamples=resamples, seed=seed))


# -- Cohen's d ----------------------------------------------------------------


def cohens_d(a, b) -> float:
    a, b = _values(a), _values(b)
    n, m = len(a), len(b)
    if n < 2 or m < 2:
        raise StatsError("Cohen's d needs at least two values per group")
    pooled = ((n - 1) * a.var(ddof=1) + (m - 1) * b.var(ddof=1)) / (n + m - 2)
    if pooled == 0:
        raise ZeroVariance("both groups have zero variance")
    return float((a.mean() - b.mean()) / math.sqrt(pooled))


def cohens_d_ci(a, b, resamples: int = 10_000, seed: int = 42) -> tuple[float, float]:
    """Percentile bootstrap CI for Cohen's d (zero-variance resamples dropped)."""
    return _percentile_ci(bootstrap_distribution(a, b, _d_rows, resamples=resamples, seed=seed))


def cohens_d_test(a, b, resamples: int = 10_000, seed: int = 42) -> TestResult:
    """Cohen's d with bootstrap CI; p from the exact (or normal) Mann-Whitney."""
    a, b = _values(a), _values(b)
    d = cohens_d(a, b)
    if len(a) + len(b) <= MAX_EXACT_MW:
        p = mann_whitney_exact(a, b).p_two_tailed
    else:
        p = _mann_whitney_normal(a, b)
    return TestResult(d, p, effect=d, ci95=cohens_d_ci(a, b, resamples, seed), method="Cohen's d; Mann-Whitney p")


# -- Fisher / binomial -------------------------------------------------------


def fishers_exact(table) -> TestResult:
    """Two-tailed Fisher exact test on a 2x2 table of counts.

    The statistic is the odds ratio, with 0.5 added to every cell when any
    cell is zero so it stays finite.
    """
    (a, b), (c, d) = table
    cells = [int(a), int(b), int(c), int(d)]
    if any(x < 0 for x in cells) or any(int(x) != x for x in (a, b, c, d)):
        raise StatsError("counts must be nonnegative integers")
    a, b, c, d = cells
    r1, r2, c1 = a + b, c + d, a + c
    N = r1 + r2
    denom = math.comb(N, c1)

    def prob(x: int) -> Fraction:
        return Fraction(math.comb(r1, x) * math.comb(r2, c1 - x), denom)

    lo, hi = max(0, c1 - r2), min(r1, c1)
    observed = prob(a)
    p = sum((q for q in (prob(x) for x in range(lo, hi + 1)) if q <= observed), Fraction(0))
    if 0 in cells:
        odds = (a + 0.5) * (d + 0.5) / ((b + 0.5) * (c + 0.5))
    else:
        odds = a * d / (b * c)
    return TestResult(float(odds), float(min(p, 1)), method="Fisher exact, two-tailed (minimum likelihood)")


def binomial_test(successes: int, trials: int, p0: float = 0.5) -> TestResult:
    if not 0 <= successes <= trials:
        raise StatsError("need 0 <= successes <= trials")
    if not 0 <= p0 <= 1:
        raise StatsError("p0 must be a probability")
    k = np.arange(trials + 1)
    pmf = sps.binom.pmf(k, trials, p0)
    observed = pmf[successes]
    p = pmf[pmf <= observed * (1 + 1e-7)].sum()
    return TestResult(
        statistic=successes / trials if trials else math.nan,
        p_two_tailed=float(min(1.0, p)),
        method=f"exact binomial vs p0={p0}, minimum likelihood",
    )


# -- weighted kappa ----------------------------------------------------------


def weighted_kappa(codes_a: Sequence[int], codes_b: Sequence[int], levels: int = 6) -> TestResult:
    """Linearly weighted Cohen's kappa over ``levels`` ordered categories.

    ``p`` is the large-sample z test against kappa = 0 (Fleiss, Cohen and
    Everitt null variance).
    """
    if len(codes_a) != len(codes_b):
        raise LengthMismatch(f"{len(codes_a)} vs {len(codes_b)} codes")
    if len(codes_a) == 0:
        raise EmptyInput("no codes")
    ca, cb = np.asarray(codes_a, dtype=int), np.asarray(codes_b, dtype=int)
    if ca.min() < 0 or cb.min() < 0 or ca.max() >= levels or cb.max() >= levels:
        raise StatsError(f"codes must lie in 0..{levels - 1}")
    n = len(ca)
    observed = np.zeros((levels, levels))
    np.add.at(observed, (ca, cb), 1)
    observed /= n
    rows, cols = observed.sum(axis=1), observed.sum(axis=0)
    expected = np.outer(rows, cols)
    idx = np.arange(levels)
    w = np.abs(idx[:, None] - idx[None, :]) / (levels - 1)
    dis_o = float((w * observed).sum())
    dis_e = float((w * expected).sum())
    if dis_o == 0:
        return TestResult(1.0, 0.0 if dis_e > 0 else 1.0, method="linear weighted kappa")
    kappa = 1 - dis_o / dis_e
    v = 1 - w  # agreement weights
    p_e = float((v * expected).sum())
    vbar_row = v @ cols
    vbar_col = rows @ v
    var0 = (
        (expected * (v - (vbar_row[:, None] + vbar_col[None, :])) ** 2).sum() - p_e**2
    ) / (n * (1 - p_e) ** 2)
    p = float(2 * sps.norm.sf(abs(kappa) / math.sqrt(var0))) if var0 > 0 else math.nan
    return TestResult(float(kappa), p, method="linear weighted kappa; asymptotic z test")


# -- Spearman ------------------------------------------------------------------

MAX_EXACT_SPEARMAN = 10


def _permutations_array(n: int) -> np.ndarray:
    """All permutations of ``range(n)`` as an (n!, n) int8 array."""
    perms = np.zeros((1, 0), dtype=np.int8)
    for k in range(n):
        blocks = []
        for pos in range(k + 1):
            blocks.append(np.insert(perms, pos, k, axis=1))
        perms = np.concatenate(blocks, axis=0)
    return perms


def spearman(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Spearman rho (Pearson correlation of midranks).

    p is an exact permutation p for ``n <= 10`` and the Student-t
    approximation with ``n - 2`` degrees of freedom above that.
    """
    x, y = _values(x), _values(y)
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} values")
    n = len(x)
    if n < 3:
        raise StatsError("spearman needs at least three pairs")
    rx, ry = midranks(x), midranks(y)
    if np.all(rx == rx[0]) or np.all(ry == ry[0]):
        raise ConstantInput("correlation undefined for constant input")
    rho = float(np.corrcoef(rx, ry)[0, 1])
    if n <= MAX_EXACT_SPEARMAN:
        ix, iy = (2 * rx).astype(np.int64), (2 * ry).astype(np.int64)
        obs = int(ix @ iy)
        low = high = total = 0
        sub = _permutations_array(n - 1)
        for first in range(n):
            rest = np.delete(np.arange(n), first)
            perms = rest[sub]  # permutations whose image of slot 0 is ``first``
            sums = ix[0] * iy[first] + iy[perms] @ ix[1:]
            low += int(np.count_nonzero(sums <= obs))
            high += int(np.count_nonzero(sums >= obs))
            total += len(sums)
        p = _two_tailed(low / total, high / total)
        method = f"Spearman rho; exact permutation p over {total} orderings"
    else:
        if abs(rho) >= 1:
            p = 0.0
        else:
            t = rho * math.sqrt((n - 2) / (1 - rho**2))
            p = float(2 * sps.t.sf(abs(t), n - 2))
        method = "Spearman rho; t approximation"
    return TestResult(rho, p, effect=rho, method=method)


# -- Wilcoxon signed rank ------------------------------------------------------


def wilcoxon_signed_rank(paired_diffs: Sequence[float]) -> TestResult:
    """Exact Wilcoxon signed-rank test; zero differences are dropped.

    The null distribution of W+ is the distribution of subset sums of the
    (midranked) absolute differences over all ``2**n`` sign assignments,
    counted by dynamic programming rather than listed one by one.
    """
    d = _values(paired_diffs)
    d = d[d != 0]
    if len(d) == 0:
        raise AllZeroDifferences("every difference is zero")
    r2 = (2 * midranks(np.abs(d))).astype(np.int64)
    w_plus2 = int(r2[d > 0].sum())
    total = int(r2.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in r2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    n_assign = 2 ** len(d)
    p_low = Fraction(int(counts[: w_plus2 + 1].sum()), n_assign)
    p_high = Fraction(int(counts[w_plus2:].sum()), n_assign)
    return TestResult(
        statistic=w_plus2 / 2,
        p_two_tailed=float(min(Fraction(1), 2 * min(p_low, p_high))),
        method=f"Wilcoxon signed-rank W+, exact over 2^{len(d)} sign assignments",
    )
