"""Offline-error computation, the two nonparametric tests the protocol
needs, and theory-verification oracles (submodularity ratio, curvature,
phi-approximation checks)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm, rankdata

from .algorithms import Pomc, brute_force_front, brute_force_opt
from .core import phi_ratio, substream


@dataclass
class ErrorSeries:
    """Per-change offline errors e_i = f(baseline_i) - f(answer_i)."""

    errors: np.ndarray
    baseline_id: str = ""

    def __len__(self):
        return len(self.errors)


def offline_errors(records, baseline, baseline_id="") -> ErrorSeries:
    """baseline: callable budget -> best-known f value for that budget."""
    e = np.array([baseline(rec.budget) - rec.best_f for rec in records])
    return ErrorSeries(errors=e, baseline_id=baseline_id)


def partial_offline_error(series, lo: int, hi: int) -> float:
    """Mean error over the 1-indexed inclusive change interval [lo, hi]."""
    errors = series.errors if isinstance(series, ErrorSeries) else np.asarray(series)
    if lo > hi or lo < 1 or hi > len(errors):
        raise ValueError(f"empty or out-of-range interval [{lo}, {hi}]")
    return float(errors[lo - 1:hi].mean())


def brute_force_baseline(f, c, cache=None):
    """Exact per-budget baseline via enumeration (desk scale, n <= 24)."""
    cache = {} if cache is None else cache

    def baseline(budget):
        if budget not in cache:
            _sol, val = brute_force_opt(f, c, budget)
            cache[budget] = val
        return cache[budget]

    return baseline


def long_run_baseline(f, c, evals=100_000, seed=0, cache=None):
    """Heuristic baseline: a long POMC run from scratch per distinct budget."""
    cache = {} if cache is None else cache

    def baseline(budget):
        if budget not in cache:
            rng = substream(seed, "baseline", budget)
            pomc = Pomc(f, c, budget, rng)
            pomc.run(evals)
            cache[budget] = pomc.answer_value()[0]
        return cache[budget]

    return baseline


# ---------------------------------------------------------------------------
# nonparametric statistics


def _tie_sum(all_values) -> float:
    _uniq, counts = np.unique(all_values, return_counts=True)
    return float(((counts**3) - counts).sum())


def kruskal_wallis(samples):
    """Rank-based H with tie correction; p from the chi-square approximation.

    Returns (H, p).  Fully degenerate input (every observation identical)
    yields (0, 1).
    """
    samples = [np.asarray(s, dtype=float) for s in samples]
    if len(samples) < 2 or any(s.size == 0 for s in samples):
        raise ValueError("need at least two non-empty groups")
    pooled = np.concatenate(samples)
    big_n = pooled.size
    ranks = rankdata(pooled)
    h = 0.0
    start = 0
    for s in samples:
        r = ranks[start:start + s.size]
        h += r.sum() ** 2 / s.size
        start += s.size
    h = 12.0 / (big_n * (big_n + 1)) * h - 3 * (big_n + 1)
    correction = 1.0 - _tie_sum(pooled) / (big_n**3 - big_n)
    if correction <= 0:
        return 0.0, 1.0
    h /= correction
    p = float(chi2.sf(h, len(samples) - 1))
    return float(h), p


def bonferroni_posthoc(samples, alpha=0.05):
    """Pairwise Dunn comparisons at alpha / (number of pairs).

    Returns a k x k integer matrix: marks[i][j] = +1 when group i has
    significantly lower values than group j, -1 for the reverse, 0 when not
    significant.  Antisymmetric by construction.
    """
    samples = [np.asarray(s, dtype=float) for s in samples]
    k = len(samples)
    pooled = np.concatenate(samples)
    big_n = pooled.size
    ranks = rankdata(pooled)
    mean_ranks = []
    start = 0
    for s in samples:
        mean_ranks.append(ranks[start:start + s.size].mean())
        start += s.size
    tie_term = _tie_sum(pooled) / (12.0 * (big_n - 1))
    base_var = big_n * (big_n + 1) / 12.0 - tie_term
    n_pairs = k * (k - 1) // 2
    marks = np.zeros((k, k), dtype=int)
    if base_var <= 0:
        return marks
    for i in range(k):
        for j in range(i + 1, k):
            se = np.sqrt(base_var * (1.0 / samples[i].size + 1.0 / samples[j].size))
            z = (mean_ranks[i] - mean_ranks[j]) / se
            p = 2.0 * float(norm.sf(abs(z)))
            if p < alpha / n_pairs:
                sign = 1 if mean_ranks[i] < mean_ranks[j] else -1
                marks[i, j] = sign
                marks[j, i] = -sign
    return marks


def format_marks(marks, index: int) -> str:
    """Table-style marks for one column, e.g. `2(+),3(-)` (1-based labels)."""
    parts = []
    for j in range(marks.shape[0]):
        if j == index or marks[index, j] == 0:
            continue
        parts.append(f"{j + 1}({'+' if marks[index, j] > 0 else '-'})")
    return ",".join(parts)


# ---------------------------------------------------------------------------
# theory oracles


SUBMOD_CAP = 10


def _all_values(f, n):
    vals = np.empty(1 << n)
    idx = np.arange(n, dtype=np.uint64)
    for mask in range(1 << n):
        bits = ((mask >> idx) & 1).astype(np.uint8)
        vals[mask] = f(bits)
    return vals


def submodularity_ratio(f, n=None) -> float:
    """Exact min over X subset Y, v not in Y of the nested marginal-gain
    ratio, clamped to [0, 1].  Exhaustive; n <= 10."""
    n = f.n if n is None else n
    if n > SUBMOD_CAP:
        raise ValueError(f"n = {n} exceeds exhaustive cap {SUBMOD_CAP}")
    vals = _all_values(f, n)
    best = None
    for y in range(1 << n):
        for v in range(n):
            bit = 1 << v
            if y & bit:
                continue
            denom = vals[y | bit] - vals[y]
            if denom <= 0:
                continue  # zero/zero skipped; positive/zero is unbounded above
            sub = y
            while True:
                num = vals[sub | bit] - vals[sub]
                ratio = num / denom
                if best is None or ratio < best:
                    best = ratio
                if sub == 0:
                    break
                sub = (sub - 1) & y
    if best is None:
        return 1.0  # no informative pair (constant f)
    return float(min(max(best, 0.0), 1.0))


def curvature(f, n=None) -> float:
    """Total curvature 1 - min_v (f(V) - f(V \\ v)) / f(v).

    Elements with f(v) = 0 are skipped and reported via a warning.
    """
    n = f.n if n is None else n
    if n > SUBMOD_CAP:
        raise ValueError(f"n = {n} exceeds exhaustive cap {SUBMOD_CAP}")
    full = np.ones(n, dtype=np.uint8)
    f_full = float(f(full))
    best = None
    skipped = []
    for v in range(n):
        single = np.zeros(n, dtype=np.uint8)
        single[v] = 1
        fv = float(f(single))
        if fv == 0.0:
            skipped.append(v)
            continue
        without = full.copy()
        without[v] = 0
        ratio = (f_full - float(f(without))) / fv
        if best is None or ratio < best:
            best = ratio
    if skipped:
        warnings.warn(f"curvature: skipped elements with f(v)=0: {skipped}")
    if best is None:
        raise ZeroDivisionError("every singleton has f(v) = 0")
    return 1.0 - best


@dataclass
class PhiCheck:
    budget: float
    answer_f: float
    optimum: float
    passed: bool


@dataclass
class PhiReport:
    phi: float
    checks: list

    @property
    def all_pass(self) -> bool:
        return all(ch.passed for ch in self.checks)


def check_phi_approx(answers, f, c, budget, alpha=1.0, delta_c=None,
                     optima=None) -> PhiReport:
    """Check f(answer_b) >= phi * opt(b) for every b on the delta-cost grid.

    `answers` is either a POMC population (answers extracted by stored cost)
    or a mapping b -> answer value.  Optima come from exhaustive enumeration,
    at the exact budget b (strictly harder than the shrunken-budget optimum
    used inside the cited guarantees); pass a precomputed `optima` mapping to
    reuse one enumeration across many trials on the same instance.
    """
    delta_c = c.min_increment if delta_c is None else delta_c
    if delta_c <= 0:
        raise ValueError("need a positive minimum cost increment")
    grid = []
    b = 0.0
    while b <= budget + 1e-12:
        grid.append(round(b, 12))
        b += delta_c
    phi = phi_ratio(alpha)
    if optima is None:
        optima = brute_force_front(f, c, grid)
    checks = []
    for b in grid:
        if isinstance(answers, Pomc):
            ans = answers.answer_value(b)[0]
        else:
            ans = answers[b]
        opt = optima[b]
        passed = opt <= 0 or ans >= phi * opt - 1e-9
        checks.append(PhiCheck(budget=b, answer_f=ans, optimum=opt, passed=passed))
    return PhiReport(phi=phi, checks=checks)
