"""The five solvers plus exhaustive oracles.

Greedy (GGA) and its adaptive variant (AdGGA) are deterministic per-budget
procedures; POMC, EAMC and NSGA-II are iterative and consume one evaluation
per offspring.  All of them operate on the (ObjectiveFn, CostFn) contracts
from `core` and share an EvalCounter.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (NEG_INF, POS_INF, EvalCounter, Solution)


class TooLargeError(ValueError):
    """Exhaustive enumeration requested beyond the hard cap."""


class NoFeasibleMemberError(RuntimeError):
    """Answer extraction found no member within the current budget."""


BRUTE_FORCE_CAP = 24


def _mask_bits(mask: int, n: int) -> np.ndarray:
    return (mask >> np.arange(n, dtype=np.uint64)).astype(np.uint8) & 1


def brute_force_opt(f, c, budget):
    """Exact maximizer of f over {X : c(X) <= budget} by enumeration, n <= 24."""
    n = f.n
    if n > BRUTE_FORCE_CAP:
        raise TooLargeError(f"n = {n} exceeds enumeration cap {BRUTE_FORCE_CAP}")
    best_mask, best_val = 0, NEG_INF
    for mask in range(1 << n):
        bits = _mask_bits(mask, n)
        if float(c(bits)) <= budget:
            val = float(f(bits))
            if val > best_val:
                best_mask, best_val = mask, val
    if best_val == NEG_INF:
        # c is monotone with c(empty) = 0, so this only happens for budget < 0
        return Solution.empty(n), float(f(Solution.empty(n).bits))
    return Solution(_mask_bits(best_mask, n)), best_val


def brute_force_front(f, c, budgets):
    """Optimum value for each budget in `budgets` from a single enumeration."""
    n = f.n
    if n > BRUTE_FORCE_CAP:
        raise TooLargeError(f"n = {n} exceeds enumeration cap {BRUTE_FORCE_CAP}")
    budgets = sorted(budgets)
    best = {b: NEG_INF for b in budgets}
    for mask in range(1 << n):
        bits = _mask_bits(mask, n)
        cost = float(c(bits))
        val = None
        for b in budgets:
            if cost <= b:
                if val is None:
                    val = float(f(bits))
                if val > best[b]:
                    best[b] = val
    return best


def knapsack_opt_value(instance, budget) -> float:
    """Exact optimum of a linear knapsack with integer item costs (0/1 DP).

    Independent of any greedy trace; used where enumeration is out of reach.
    """
    costs = [c for (c, _v) in instance.items]
    values = [v for (_c, v) in instance.items]
    if any(c != int(c) for c in costs):
        raise ValueError("DP oracle needs integer costs")
    cap = int(math.floor(budget))
    if cap < 0:
        return 0.0
    dp = [0.0] * (cap + 1)
    for cost, value in zip(costs, values):
        ci = int(cost)
        for w in range(cap, ci - 1, -1):
            cand = dp[w - ci] + value
            if cand > dp[w]:
                dp[w] = cand
    return dp[cap]


# ---------------------------------------------------------------------------
# greedy


def _best_feasible_singleton(f, c, budget, n, counter):
    """argmax f(v) over singletons with c(v) <= budget; None if none feasible."""
    best_v, best_val = None, NEG_INF
    bits = np.zeros(n, dtype=np.uint8)
    for v in range(n):
        bits[v] = 1
        if float(c(bits)) <= budget:
            counter.increment()
            val = float(f(bits))
            if val > best_val:
                best_v, best_val = v, val
        bits[v] = 0
    return best_v, best_val


def _greedy_extend(f, c, x_bits, budget, counter):
    """Alg. 1 body: scan V', add the argmax marginal-ratio element when
    feasible, and drop the argmax from V' regardless of feasibility."""
    x = x_bits.copy()
    remaining = list(np.flatnonzero(x == 0))
    cx = float(c(x))
    counter.increment()
    fx = float(f(x))
    while remaining:
        best_i, best_ratio = None, -1.0
        best_fv = best_cv = None
        for i, v in enumerate(remaining):
            x[v] = 1
            cv = float(c(x))
            counter.increment()
            fv = float(f(x))
            x[v] = 0
            dc = cv - cx
            gain = fv - fx
            ratio = (POS_INF if gain > 0 else 0.0) if dc == 0 else gain / dc
            if ratio > best_ratio:  # ties: lowest element index wins
                best_i, best_ratio = i, ratio
                best_fv, best_cv = fv, cv
        v = remaining.pop(best_i)
        if best_cv <= budget:
            x[v] = 1
            fx, cx = best_fv, best_cv
    return x, fx


def gga(f, c, budget, counter=None) -> Solution:
    """Generalized greedy: ratio-greedy fill, then compare with the best
    feasible singleton."""
    counter = counter if counter is not None else EvalCounter()
    n = f.n
    x, fx = _greedy_extend(f, c, np.zeros(n, dtype=np.uint8), budget, counter)
    v, fv = _best_feasible_singleton(f, c, budget, n, counter)
    if v is not None and fv > fx:
        return Solution.from_indices(n, [v])
    return Solution(x)


class AdaptiveGreedy:
    """AdGGA: keeps its working set across budget changes.

    Decreases strip the argmin marginal-ratio element until feasible;
    increases greedily extend over the unselected elements.  The returned
    answer is the better of the working set and the best feasible singleton,
    but the singleton never overwrites the internal state.
    """

    def __init__(self, f, c, budget, initial: Solution | None = None, counter=None):
        self.f = f
        self.c = c
        self.budget = float(budget)
        self.counter = counter if counter is not None else EvalCounter()
        if initial is None:
            self.x, _ = _greedy_extend(f, c, np.zeros(f.n, dtype=np.uint8),
                                       self.budget, self.counter)
        else:
            self.x = initial.bits.copy()

    def _shrink(self, new_budget):
        x = self.x
        cx = float(self.c(x))
        self.counter.increment()
        fx = float(self.f(x))
        while cx > new_budget:
            selected = np.flatnonzero(x)
            best_i, best_ratio = 0, POS_INF
            best_fv = best_cv = None
            for i, v in enumerate(selected):
                x[v] = 0
                cv = float(self.c(x))
                self.counter.increment()
                fv = float(self.f(x))
                x[v] = 1
                dc = cx - cv
                loss = fx - fv
                ratio = (POS_INF if loss > 0 else 0.0) if dc == 0 else loss / dc
                if best_fv is None or ratio < best_ratio:  # ties: lowest index wins
                    best_i, best_ratio = i, ratio
                    best_fv, best_cv = fv, cv
            if best_fv is None:  # selection already empty, nothing to strip
                break
            x[selected[best_i]] = 0
            fx, cx = best_fv, best_cv

    def update(self, new_budget) -> Solution:
        """Apply one dynamic change and return the answer for the new budget."""
        new_budget = float(new_budget)
        if new_budget < self.budget:
            self._shrink(new_budget)
        elif new_budget > self.budget:
            self.x, _ = _greedy_extend(self.f, self.c, self.x, new_budget,
                                       self.counter)
        self.budget = new_budget
        return self.answer()

    def answer(self) -> Solution:
        self.counter.increment()
        fx = float(self.f(self.x))
        v, fv = _best_feasible_singleton(self.f, self.c, self.budget, self.f.n,
                                         self.counter)
        if v is not None and fv > fx:
            return Solution.from_indices(self.f.n, [v])
        return Solution(self.x.copy())


# ---------------------------------------------------------------------------
# POMC


class Pomc:
    """Pareto optimization (GSEMO) over (f1, f2) with stale-vector semantics.

    Objective vectors are stamped at creation and never recomputed, so budget
    changes cost no evaluations: members created under an old bound simply
    keep their stored vectors.
    """

    def __init__(self, f, c, budget, rng, counter=None):
        self.f = f
        self.c = c
        self.n = f.n
        self.budget = float(budget)
        self.rng = rng
        self.counter = counter if counter is not None else EvalCounter()
        zeros = np.zeros(self.n, dtype=np.uint8)
        f1, f2 = self._evaluate(zeros)
        self._bits = [zeros]
        self._f1 = [f1]
        self._f2 = [f2]

    def _evaluate(self, bits):
        """One objective-vector computation under the current budget."""
        self.counter.increment()
        cost = float(self.c(bits))
        if cost > self.budget + 1:
            return NEG_INF, -cost
        return float(self.f(bits)), -cost

    def set_budget(self, budget) -> None:
        """Dynamic change: stored vectors are intentionally left stale."""
        self.budget = float(budget)

    def __len__(self):
        return len(self._bits)

    def members(self):
        return [(Solution(b.copy()), f1, f2)
                for b, f1, f2 in zip(self._bits, self._f1, self._f2)]

    def _insert(self, child, f1, f2):
        pf1, pf2 = self._f1, self._f2
        for m1, m2 in zip(pf1, pf2):
            if m1 >= f1 and m2 >= f2 and (m1 > f1 or m2 > f2):
                return  # strictly dominated by an incumbent
        keep = [i for i, (m1, m2) in enumerate(zip(pf1, pf2))
                if not (f1 >= m1 and f2 >= m2)]
        self._bits = [self._bits[i] for i in keep] + [child]
        self._f1 = [pf1[i] for i in keep] + [f1]
        self._f2 = [pf2[i] for i in keep] + [f2]

    def step(self) -> None:
        """One iteration: uniform parent, per-bit flip at 1/n, one evaluation."""
        i = int(self.rng.integers(len(self._bits)))
        child = self._bits[i] ^ (self.rng.random(self.n) < 1.0 / self.n)
        f1, f2 = self._evaluate(child)
        self._insert(child, f1, f2)

    def run(self, evals: int) -> None:
        """`evals` iterations with chunked random draws (same semantics as
        repeated step(), different stream consumption)."""
        n, rate = self.n, 1.0 / self.n
        evaluate, insert = self._evaluate, self._insert
        rng_random = self.rng.random
        done = 0
        while done < evals:
            chunk = min(4096, evals - done)
            sel = rng_random(chunk).tolist()
            mut = rng_random((chunk, n))
            flips = mut < rate
            for j in range(chunk):
                bits = self._bits
                child = bits[int(sel[j] * len(bits))] ^ flips[j]
                f1, f2 = evaluate(child)
                insert(child, f1, f2)
            done += chunk

    def answer(self, budget=None) -> Solution:
        """Best stored-f1 member whose stored cost fits the budget; free."""
        b = self.budget if budget is None else float(budget)
        best_i, best_f1 = None, NEG_INF
        for i, (f1, f2) in enumerate(zip(self._f1, self._f2)):
            if -f2 <= b and f1 > best_f1:
                best_i, best_f1 = i, f1
        if best_i is None:
            raise NoFeasibleMemberError(f"no member with stored cost <= {b}")
        return Solution(self._bits[best_i].copy())

    def answer_value(self, budget=None):
        """(stored f1, stored cost) of the answer member."""
        b = self.budget if budget is None else float(budget)
        best = None
        for f1, f2 in zip(self._f1, self._f2):
            if -f2 <= b and (best is None or f1 > best[0]):
                best = (f1, -f2)
        if best is None:
            raise NoFeasibleMemberError(f"no member with stored cost <= {b}")
        return best

    def check_invariants(self) -> None:
        """Debug hook: pairwise mutual non-dominance and no -inf member."""
        vecs = list(zip(self._f1, self._f2))
        for i, (a1, a2) in enumerate(vecs):
            if a1 == NEG_INF:
                raise AssertionError("population holds a -inf member")
            for j, (b1, b2) in enumerate(vecs):
                if i != j and a1 >= b1 and a2 >= b2:
                    raise AssertionError("population holds a dominated member")


# ---------------------------------------------------------------------------
# EAMC


def _eamc_g(fval, cost, size, alpha, budget):
    """Budget-normalized surrogate; g(empty) = f(empty)."""
    if size == 0:
        return fval
    denom = 1.0 - math.exp(-alpha * cost / budget)
    if denom <= 0.0:
        return POS_INF if fval > 0 else fval
    return fval / denom


class Eamc:
    """EAMC: at most two solutions per subset size (best by g, best by f).

    Every member is feasible under the current budget; a change simply drops
    the members that became infeasible.
    """

    def __init__(self, f, c, budget, rng, alpha=1.0, counter=None):
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.f = f
        self.c = c
        self.n = f.n
        self.budget = float(budget)
        self.alpha = alpha
        self.rng = rng
        self.counter = counter if counter is not None else EvalCounter()
        zeros = np.zeros(self.n, dtype=np.uint8)
        self.counter.increment()
        f0, c0 = float(f(zeros)), float(c(zeros))
        entry = (zeros, f0, c0)
        self.bins = {0: [entry, entry]}  # size -> [U, V]
        self._rebuild_members()

    def _rebuild_members(self):
        members = []
        for u, v in self.bins.values():
            members.append(u)
            if v is not u:
                members.append(v)
        self._members = members

    def __len__(self):
        return len(self._members)

    def members(self):
        return [(Solution(b.copy()), fv, cv) for (b, fv, cv) in self._members]

    def _g(self, fval, cost, size):
        return _eamc_g(fval, cost, size, self.alpha, self.budget)

    def step(self) -> None:
        i = int(self.rng.integers(len(self._members)))
        child = self._members[i][0] ^ (self.rng.random(self.n) < 1.0 / self.n)
        self.counter.increment()
        cost = float(self.c(child))
        if cost > self.budget:
            return
        fval = float(self.f(child))
        size = int(child.sum())
        entry = (child, fval, cost)
        slot = self.bins.get(size)
        if slot is None:
            self.bins[size] = [entry, entry]
        else:
            u, v = slot
            changed = False
            if self._g(fval, cost, size) > self._g(u[1], u[2], size):
                slot[0] = entry
                changed = True
            if fval > v[1]:
                slot[1] = entry
                changed = True
            if not changed:
                return
        self._rebuild_members()

    def run(self, evals: int) -> None:
        for _ in range(evals):
            self.step()

    def on_change(self, budget) -> None:
        """Remove every member with cost above the new bound; keep bin(0)."""
        self.budget = float(budget)
        for size in list(self.bins):
            u, v = self.bins[size]
            u_ok = u[2] <= self.budget
            v_ok = v[2] <= self.budget
            if u_ok and v_ok:
                continue
            if not u_ok and not v_ok:
                del self.bins[size]
            elif u_ok:
                self.bins[size] = [u, u]
            else:
                self.bins[size] = [v, v]
        self._rebuild_members()

    def answer(self) -> Solution:
        best = None
        for (bits, fval, cost) in self._members:
            if cost <= self.budget and (best is None or fval > best[1]):
                best = (bits, fval)
        if best is None:
            raise NoFeasibleMemberError(f"no member with cost <= {self.budget}")
        return Solution(best[0].copy())

    def answer_value(self):
        best = None
        for (_bits, fval, cost) in self._members:
            if cost <= self.budget and (best is None or fval > best[0]):
                best = (fval, cost)
        if best is None:
            raise NoFeasibleMemberError(f"no member with cost <= {self.budget}")
        return best

    def check_invariants(self) -> None:
        if len(self._members) > 2 * self.n + 2:
            raise AssertionError("population exceeds 2n + 2 members")
        for (_bits, _fval, cost) in self._members:
            if cost > self.budget:
                raise AssertionError("population holds an infeasible member")


# ---------------------------------------------------------------------------
# NSGA-II with elitism


class _Individual:
    __slots__ = ("bits", "f_raw", "c_raw", "rank", "crowding")

    def __init__(self, bits, f_raw, c_raw):
        self.bits = bits
        self.f_raw = f_raw
        self.c_raw = c_raw
        self.rank = 0
        self.crowding = POS_INF


def _fast_nondominated_sort(objs):
    """objs: list of (maximize, minimize) pairs; returns list of fronts
    (index lists)."""
    m = len(objs)
    dominated_by = [[] for _ in range(m)]
    dom_count = [0] * m
    fronts = [[]]
    for i in range(m):
        fi, ci = objs[i]
        for j in range(i + 1, m):
            fj, cj = objs[j]
            if fi >= fj and ci <= cj and (fi > fj or ci < cj):
                dominated_by[i].append(j)
                dom_count[j] += 1
            elif fj >= fi and cj <= ci and (fj > fi or cj < ci):
                dominated_by[j].append(i)
                dom_count[i] += 1
        if dom_count[i] == 0:
            fronts[0].append(i)
    k = 0
    while fronts[k]:
        nxt = []
        for i in fronts[k]:
            for j in dominated_by[i]:
                dom_count[j] -= 1
                if dom_count[j] == 0:
                    nxt.append(j)
        fronts.append(nxt)
        k += 1
    return fronts[:-1]


def _crowding_distances(objs, front):
    dist = {i: 0.0 for i in front}
    if len(front) <= 2:
        return {i: POS_INF for i in front}
    for dim in range(2):
        ordered = sorted(front, key=lambda i: objs[i][dim])
        lo, hi = objs[ordered[0]][dim], objs[ordered[-1]][dim]
        dist[ordered[0]] = dist[ordered[-1]] = POS_INF
        span = hi - lo
        if span <= 0:
            continue
        for a in range(1, len(ordered) - 1):
            i = ordered[a]
            if dist[i] != POS_INF:
                dist[i] += (objs[ordered[a + 1]][dim] - objs[ordered[a - 1]][dim]) / span
    return dist


class Nsga2:
    """NSGA-II on (maximize f_N, minimize c_N) with best-feasible elitism.

    Solutions with cost up to budget + delta_cap are kept unpenalized to
    prepare for upcoming changes; beyond that, both objectives are pushed
    into the dominated region proportionally to the violation.  Once per
    sort, the best feasible member's crowding distance is set to +inf so it
    survives truncation.
    """

    def __init__(self, f, c, budget, rng, *, delta_cap, f_max=None, c_max=None,
                 pop_size=20, crossover_rate=0.9, counter=None):
        self.f = f
        self.c = c
        self.n = f.n
        self.budget = float(budget)
        self.delta_cap = float(delta_cap)
        self.rng = rng
        self.pop_size = pop_size
        self.crossover_rate = crossover_rate
        self.counter = counter if counter is not None else EvalCounter()
        full = np.ones(self.n, dtype=np.uint8)
        self.f_max = float(f(full)) if f_max is None else float(f_max)
        self.c_max = float(c(full)) if c_max is None else float(c_max)
        zeros = np.zeros(self.n, dtype=np.uint8)
        self.counter.increment()
        seed_ind = _Individual(zeros, float(f(zeros)), float(c(zeros)))
        self.parents = [seed_ind] * pop_size

    def set_budget(self, budget) -> None:
        """Penalties are derived from cached raw values, so a change costs
        no evaluations."""
        self.budget = float(budget)

    def _penalized(self, ind):
        cap = self.budget + self.delta_cap
        if ind.c_raw <= cap:
            return ind.f_raw, ind.c_raw
        h = ind.c_raw - cap
        return (ind.f_raw - (self.n * self.f_max + 1.0) * h,
                ind.c_raw + (self.n * self.c_max + 1.0) * h)

    def _tournament(self):
        a, b = self.rng.integers(self.pop_size, size=2)
        pa, pb = self.parents[int(a)], self.parents[int(b)]
        if pa.rank != pb.rank:
            return pa if pa.rank < pb.rank else pb
        return pa if pa.crowding >= pb.crowding else pb

    def _make_offspring(self):
        out = []
        rate = 1.0 / self.n
        for _ in range(self.pop_size):
            p1, p2 = self._tournament(), self._tournament()
            if self.rng.random() < self.crossover_rate:
                take = self.rng.random(self.n) < 0.5
                child = np.where(take, p1.bits, p2.bits).astype(np.uint8)
            else:
                child = p1.bits.copy()
            child = child ^ (self.rng.random(self.n) < rate)
            self.counter.increment()
            cost = float(self.c(child))
            out.append(_Individual(child, float(self.f(child)), cost))
        return out

    def generation(self) -> None:
        """One generation: pop_size evaluations."""
        offspring = self._make_offspring()
        pool = self.parents + offspring
        objs = [self._penalized(ind) for ind in pool]
        fronts = _fast_nondominated_sort(objs)
        for rank, front in enumerate(fronts):
            dist = _crowding_distances(objs, front)
            for i in front:
                pool[i].rank = rank
                pool[i].crowding = dist[i]
        elite = None
        for ind in pool:
            if ind.c_raw <= self.budget and (elite is None or ind.f_raw > elite.f_raw):
                elite = ind
        if elite is not None:
            elite.crowding = POS_INF
        nxt = []
        for front in fronts:
            if len(nxt) + len(front) <= self.pop_size:
                nxt.extend(pool[i] for i in front)
            else:
                rest = sorted(front, key=lambda i: -pool[i].crowding)
                nxt.extend(pool[i] for i in rest[: self.pop_size - len(nxt)])
                break
        self.parents = nxt

    def run(self, evals: int) -> None:
        for _ in range(evals // self.pop_size):
            self.generation()

    def answer(self) -> Solution:
        best = None
        for ind in self.parents:
            if ind.c_raw <= self.budget and (best is None or ind.f_raw > best.f_raw):
                best = ind
        if best is None:
            return Solution.empty(self.n)
        return Solution(best.bits.copy())

    def answer_value(self):
        best = None
        for ind in self.parents:
            if ind.c_raw <= self.budget and (best is None or ind.f_raw > best[0]):
                best = (ind.f_raw, ind.c_raw)
        if best is None:
            zeros = np.zeros(self.n, dtype=np.uint8)
            return float(self.f(zeros)), float(self.c(zeros))
        return best
