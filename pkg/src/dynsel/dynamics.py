"""Budget-change schedules and the dynamic run harness.

A run walks a schedule of signed budget perturbations.  Between changes the
iterative solvers (POMC, EAMC, NSGA-II) get exactly `tau` evaluations; the
greedy procedures react to each change directly and their evaluations are
recorded but not charged against tau.  The best feasible solution is
snapshotted right before every change (and once more at the end), so a
schedule with k deltas yields k + 1 records.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .algorithms import (AdaptiveGreedy, Eamc, NoFeasibleMemberError, Nsga2,
                         Pomc, gga)
from .core import EvalCounter, Solution, substream

ITERATIVE_ALGORITHMS = ("pomc", "pomc-wp", "eamc", "nsga2")
GREEDY_ALGORITHMS = ("gga", "adgga")
ALL_ALGORITHMS = GREEDY_ALGORITHMS + ITERATIVE_ALGORITHMS

DEFAULT_WARMUP_EVALS = 10_000  # POMC^wp: evaluations before the first change


@dataclass
class BudgetSchedule:
    """Initial budget, clamp bounds and the signed per-change deltas."""

    b_init: float
    b_min: float
    b_max: float
    deltas: list
    tau: int
    r: float
    seed: int | None = None

    def __post_init__(self):
        if not self.b_min <= self.b_init <= self.b_max:
            raise ValueError("need b_min <= b_init <= b_max")
        if any(abs(d) > self.r + 1e-12 for d in self.deltas):
            raise ValueError("delta outside [-r, r]")

    @property
    def count(self) -> int:
        return len(self.deltas)

    def budgets(self) -> list:
        """Budget trajectory: initial value, then one post-clamp value per change."""
        out = [float(self.b_init)]
        b = float(self.b_init)
        for d in self.deltas:
            b = min(max(b + d, self.b_min), self.b_max)
            out.append(b)
        return out


def gen_schedule(b_init, b_min, b_max, r, count, tau, rng,
                 integer_deltas=False, seed=None) -> BudgetSchedule:
    """Random change sequence: two-point {-r, r} draws, or nonzero integers
    in [-r, r] when `integer_deltas` is set."""
    if r <= 0:
        raise ValueError("r must be positive")
    if count < 1:
        raise ValueError("need at least one change")
    if not b_min <= b_init <= b_max:
        raise ValueError("b_init outside [b_min, b_max]")
    deltas = []
    for _ in range(count):
        if integer_deltas:
            d = 0
            while d == 0:
                d = int(rng.integers(-int(r), int(r) + 1))
            deltas.append(float(d))
        else:
            deltas.append(float(r) if rng.random() < 0.5 else -float(r))
    return BudgetSchedule(b_init=float(b_init), b_min=float(b_min),
                          b_max=float(b_max), deltas=deltas, tau=int(tau),
                          r=float(r), seed=seed)


SCHEDULE_PRESETS = {
    # B_init = 10 within [5, 30], delta in {-1, 1}
    "influence": dict(b_init=10, b_min=5, b_max=30, r=1, integer_deltas=False),
    # B_init = 500 within [250, 750], integer delta in [-20, 20]
    "outdegree": dict(b_init=500, b_min=250, b_max=750, r=20, integer_deltas=True),
    # B_init = 1 within [0, 3], delta in {-0.1, 0.1}
    "random-cost": dict(b_init=1.0, b_min=0.0, b_max=3.0, r=0.1, integer_deltas=False),
}


def preset_schedule(name, rng, count=200, tau=1000, seed=None, **overrides):
    if name not in SCHEDULE_PRESETS:
        raise ValueError(f"unknown schedule preset {name!r}")
    params = dict(SCHEDULE_PRESETS[name])
    params.update(overrides)
    return gen_schedule(count=count, tau=tau, rng=rng, seed=seed, **params)


def save_schedule(schedule: BudgetSchedule, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"binit={schedule.b_init!r}\n")
        fh.write(f"bmin={schedule.b_min!r}\n")
        fh.write(f"bmax={schedule.b_max!r}\n")
        fh.write(f"r={schedule.r!r}\n")
        fh.write(f"tau={schedule.tau}\n")
        fh.write(f"seed={schedule.seed if schedule.seed is not None else ''}\n")
        for d in schedule.deltas:
            fh.write(f"{d!r}\n")


def load_schedule(path) -> BudgetSchedule:
    header = {}
    deltas = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if "=" in line:
                key, _, value = line.partition("=")
                header[key.strip()] = value.strip()
            else:
                deltas.append(float(line))
    seed = header.get("seed") or None
    return BudgetSchedule(
        b_init=float(header["binit"]), b_min=float(header["bmin"]),
        b_max=float(header["bmax"]), deltas=deltas, tau=int(header["tau"]),
        r=float(header["r"]), seed=int(seed) if seed is not None else None)


@dataclass
class RunRecord:
    """Snapshot of the best feasible solution at the end of one epoch."""

    change_index: int
    budget: float
    algorithm: str
    best_f: float
    best_cost: float
    evaluations: int
    wall_ms: float
    solution: Solution | None = field(default=None, repr=False)


RUN_CSV_COLUMNS = ("run_id", "seed", "change_index", "budget", "algorithm",
                   "best_f", "best_cost", "evaluations", "wall_ms")


def write_run_csv(path, run_id, seed, records) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_CSV_COLUMNS)
        for rec in records:
            writer.writerow([run_id, seed, rec.change_index, repr(rec.budget),
                             rec.algorithm, repr(rec.best_f), repr(rec.best_cost),
                             rec.evaluations, f"{rec.wall_ms:.3f}"])


def read_run_csv(path):
    import csv

    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(RunRecord(
                change_index=int(row["change_index"]), budget=float(row["budget"]),
                algorithm=row["algorithm"], best_f=float(row["best_f"]),
                best_cost=float(row["best_cost"]),
                evaluations=int(row["evaluations"]),
                wall_ms=float(row["wall_ms"])))
    return records


def make_solver(name, f, c, budget, rng, params=None, counter=None):
    """Construct an iterative solver by name."""
    params = params or {}
    if name in ("pomc", "pomc-wp"):
        return Pomc(f, c, budget, rng, counter=counter)
    if name == "eamc":
        return Eamc(f, c, budget, rng, alpha=params.get("alpha", 1.0),
                    counter=counter)
    if name == "nsga2":
        return Nsga2(f, c, budget, rng,
                     delta_cap=params.get("delta_cap", 1.0),
                     f_max=params.get("f_max"), c_max=params.get("c_max"),
                     pop_size=params.get("pop_size", 20),
                     crossover_rate=params.get("crossover_rate", 0.9),
                     counter=counter)
    raise ValueError(f"{name!r} is not an iterative algorithm")


def warmup(name, f, c, b_init, evals, rng, params=None, counter=None):
    """Run an iterative solver for `evals` evaluations at the initial bound."""
    if evals < 0:
        raise ValueError("warm-up evaluations must be non-negative")
    solver = make_solver(name, f, c, b_init, rng, params=params, counter=counter)
    if evals:
        solver.run(evals)
    return solver


def _solver_answer(solver):
    try:
        return solver.answer_value()
    except NoFeasibleMemberError:
        return float("-inf"), float("inf")


def run_dynamic(name, f, c, schedule: BudgetSchedule, seed, params=None):
    """Execute one algorithm over one change sequence.

    Iterative algorithms report budgeted evaluation counts (exact multiples
    of tau); greedy algorithms report their actual evaluation counter, which
    is kept outside the tau budget.
    """
    if name not in ALL_ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}")
    params = params or {}
    rng = substream(seed, "run", name)
    budgets = schedule.budgets()
    tau = schedule.tau
    records = []

    if name == "gga":
        counter = EvalCounter()
        for i, b in enumerate(budgets):
            t0 = time.perf_counter()
            sol = gga(f, c, b, counter=counter)
            wall = (time.perf_counter() - t0) * 1000
            records.append(RunRecord(i, b, name, float(f(sol.bits)),
                                     float(c(sol.bits)), counter.count, wall,
                                     solution=sol))
        return records

    if name == "adgga":
        counter = EvalCounter()
        t0 = time.perf_counter()
        solver = AdaptiveGreedy(f, c, budgets[0], counter=counter)
        sol = solver.answer()
        wall = (time.perf_counter() - t0) * 1000
        records.append(RunRecord(0, budgets[0], name, float(f(sol.bits)),
                                 float(c(sol.bits)), counter.count, wall,
                                 solution=sol))
        for i, b in enumerate(budgets[1:], start=1):
            t0 = time.perf_counter()
            sol = solver.update(b)
            wall = (time.perf_counter() - t0) * 1000
            records.append(RunRecord(i, b, name, float(f(sol.bits)),
                                     float(c(sol.bits)), counter.count, wall,
                                     solution=sol))
        return records

    # iterative algorithms
    counter = EvalCounter()
    warmup_evals = int(params.get("warmup_evals",
                                  DEFAULT_WARMUP_EVALS if name == "pomc-wp" else 0))
    solver = warmup(name, f, c, budgets[0], warmup_evals, rng, params=params,
                    counter=counter)
    used = 0
    for i, b in enumerate(budgets):
        t0 = time.perf_counter()
        if i > 0:
            if name in ("pomc", "pomc-wp"):
                solver.set_budget(b)  # stale vectors, zero evaluations
            elif name == "eamc":
                solver.on_change(b)
            else:
                solver.set_budget(b)  # NSGA-II re-derives penalties lazily
        solver.run(tau)
        used += tau
        best_f, best_cost = _solver_answer(solver)
        wall = (time.perf_counter() - t0) * 1000
        records.append(RunRecord(i, b, name, best_f, best_cost, used, wall))
    return records
