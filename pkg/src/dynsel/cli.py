"""Command-line entry point: generate instances and schedules, run dynamic
experiments, analyze results, and run the theory-verification traces.

Experiment configs are plain INI files (configparser); every generated file
embeds the originating seed, the config hash and the tool version where its
format allows, and each output directory carries a manifest with both.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import shutil
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algorithms import AdaptiveGreedy, Pomc, knapsack_opt_value
from .analysis import (bonferroni_posthoc, brute_force_baseline,
                       check_phi_approx, format_marks, kruskal_wallis,
                       long_run_baseline, offline_errors,
                       partial_offline_error)
from .core import Solution, substream
from .dynamics import (ALL_ALGORITHMS, SCHEDULE_PRESETS, gen_schedule,
                       load_schedule, preset_schedule, read_run_csv,
                       run_dynamic, save_schedule, write_run_csv)
from .problems import (BipartiteCoverInstance, CoverageInstance,
                       DirectedGraph, IcSpreadObjective, InfluenceInstance,
                       bipartite_cover_graph, gen_adversarial_knapsack,
                       gen_ba_graph, gen_bipartite_cover, gen_er_graph,
                       gen_random_digraph, load_dimacs, load_edge_list,
                       make_cost, save_edge_list)

EXPERIMENT_PRESETS = {
    "influence-routing": dict(schedule="influence", cost="routing",
                              taus=(100, 1000, 5000, 10000),
                              algorithms="gga,adgga,pomc,pomc-wp"),
    "influence-cardinality": dict(schedule="influence", cost="cardinality",
                                  taus=(100, 1000, 5000, 10000),
                                  algorithms="gga,adgga,pomc,pomc-wp"),
    "maxcov-random": dict(schedule="random-cost", cost="random-linear",
                          taus=(100, 1000, 5000, 15000, 45000),
                          algorithms="gga,adgga,pomc-wp,eamc,nsga2"),
    "maxcov-outdegree": dict(schedule="outdegree", cost="outdegree",
                             taus=(100, 1000, 5000, 15000, 45000),
                             algorithms="gga,adgga,pomc-wp,eamc,nsga2"),
}


def _config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def load_graph(path) -> DirectedGraph:
    with open(path) as fh:
        for line in fh:
            if line.strip() and not line.startswith(("c", "#")):
                first = line.split()[0]
                break
        else:
            first = ""
    if first == "p":
        return load_dimacs(path)
    return load_edge_list(path)


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    rng = substream(args.seed, "generate", args.kind)
    out = Path(args.out)
    if args.kind == "schedule":
        if args.preset:
            sched = preset_schedule(args.preset, rng, count=args.count,
                                    tau=args.tau, seed=args.seed)
        else:
            sched = gen_schedule(args.binit, args.bmin, args.bmax, args.r,
                                 args.count, args.tau, rng,
                                 integer_deltas=args.integer_deltas,
                                 seed=args.seed)
        save_schedule(sched, out)
    elif args.kind == "ba":
        graph = gen_ba_graph(args.n, m=args.m, rng=rng, edge_prob=args.edge_prob)
        save_edge_list(graph, out)
    elif args.kind == "er":
        graph = gen_er_graph(args.n, args.p, rng)
        save_edge_list(graph, out)
    elif args.kind == "adversarial-knapsack":
        inst = gen_adversarial_knapsack(args.n)
        with open(out, "w") as fh:
            fh.write(f"# adversarial knapsack n={args.n} dynsel={__version__}\n")
            for (c, v) in inst.items:
                fh.write(f"{c!r} {v!r}\n")
    elif args.kind == "bipartite-cover":
        inst = gen_bipartite_cover(args.n)
        save_edge_list(bipartite_cover_graph(inst), out)
    elif args.kind == "config":
        if not args.experiment:
            raise ValueError("config generation needs --experiment")
        preset = EXPERIMENT_PRESETS[args.experiment]
        tau = args.tau  # the full grid is preset["taus"]; one tau per config
        cfg = configparser.ConfigParser()
        cfg["instance"] = {"kind": "coverage", "generator": "digraph",
                           "n": str(args.n), "p": str(args.p),
                           "seed": str(args.seed)}
        cfg["cost"] = {"variant": preset["cost"]}
        cfg["schedule"] = {"preset": preset["schedule"],
                           "count": str(args.count), "tau": str(tau),
                           "seed": str(args.seed)}
        cfg["run"] = {"algorithms": preset["algorithms"],
                      "seeds": str(args.run_seeds), "output": "results"}
        with open(out, "w") as fh:
            fh.write(f"# dynsel={__version__} experiment={args.experiment} "
                     f"seed={args.seed}\n")
            cfg.write(fh)
    elif args.kind == "random-costs":
        costs = 1.0 - rng.random(args.n)
        with open(out, "w") as fh:
            fh.write(f"# random-linear costs n={args.n} seed={args.seed} "
                     f"dynsel={__version__}\n")
            for w in costs:
                fh.write(f"{float(w)!r}\n")
    else:
        raise ValueError(f"unknown kind {args.kind!r}")
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------
# run


def _read_config(path) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise FileNotFoundError(path)
    return cfg


def load_costs_file(path) -> np.ndarray:
    costs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                costs.append(float(line))
    return np.asarray(costs)


def build_instance(cfg, base_dir: Path):
    """Build (f, c, meta) from the [instance] and [cost] config sections."""
    inst_sec = cfg["instance"]
    cost_sec = cfg["cost"] if cfg.has_section("cost") else {}
    kind = inst_sec.get("kind", "coverage")
    seed = inst_sec.getint("seed", 0)
    rng = substream(seed, "instance", kind)
    meta = {"kind": kind, "seed": seed}

    if kind == "adversarial-knapsack":
        inst = gen_adversarial_knapsack(inst_sec.getint("n"))
        return inst.objective, inst.cost, meta

    if kind == "bipartite-cover":
        inst = gen_bipartite_cover(inst_sec.getint("n"))
        f = inst.objective
        n = inst.n
    elif kind in ("coverage", "influence"):
        if inst_sec.get("graph"):
            graph = load_graph(base_dir / inst_sec.get("graph"))
        else:
            generator = inst_sec.get("generator", "digraph")
            n = inst_sec.getint("n")
            p = inst_sec.getfloat("p", 0.1)
            if generator == "er":
                graph = gen_er_graph(n, p, rng)
            elif generator == "ba":
                graph = gen_ba_graph(n, m=inst_sec.getint("m", 2), rng=rng,
                                     edge_prob=inst_sec.getfloat("edge_prob", 0.1))
            else:
                graph = gen_random_digraph(n, p, rng,
                                           edge_prob=inst_sec.getfloat("edge_prob", 0.1))
        n = graph.n
        if kind == "coverage":
            f = CoverageInstance(graph).objective
        else:
            routing = None
            if inst_sec.get("routing_graph"):
                routing = load_graph(base_dir / inst_sec.get("routing_graph"))
            influence = InfluenceInstance(
                social_graph=graph,
                simulations=inst_sec.getint("simulations", 500),
                routing_graph=routing,
                per_node_cost=inst_sec.getfloat("per_node_cost", 0.1))
            f = IcSpreadObjective(influence, rng=substream(seed, "ic"))
            meta["influence"] = influence
    else:
        raise ValueError(f"unknown instance kind {kind!r}")

    variant = cost_sec.get("variant", "cardinality")
    meta["cost_variant"] = variant
    weights = None
    if variant == "random-linear":
        costs_path = cost_sec.get("costs")
        if costs_path and (base_dir / costs_path).exists():
            weights = load_costs_file(base_dir / costs_path)
        else:
            # generated once from the master seed and persisted with the run
            weights = 1.0 - substream(seed, "costs").random(n)
            if costs_path:
                with open(base_dir / costs_path, "w") as fh:
                    for w in weights:
                        fh.write(f"{float(w)!r}\n")
    c = make_cost(variant, n=n,
                  graph=graph if kind in ("coverage", "influence") else None,
                  weights=weights, q=int(cost_sec.get("q", 6)), rng=rng,
                  influence=meta.get("influence"))
    return f, c, meta


def build_schedule(cfg, base_dir: Path, run_seed: int):
    sched_sec = cfg["schedule"]
    if sched_sec.get("path"):
        sched = load_schedule(base_dir / sched_sec.get("path"))
        if sched_sec.get("tau"):
            sched.tau = sched_sec.getint("tau")
        return sched
    preset = sched_sec.get("preset")
    base_seed = sched_sec.getint("seed", 0)
    seed = base_seed + run_seed
    rng = substream(seed, "schedule")
    overrides = {}
    for key in ("binit", "bmin", "bmax", "r"):
        if sched_sec.get(key):
            overrides[{"binit": "b_init", "bmin": "b_min",
                       "bmax": "b_max", "r": "r"}[key]] = sched_sec.getfloat(key)
    if preset:
        return preset_schedule(preset, rng, count=sched_sec.getint("count", 200),
                               tau=sched_sec.getint("tau", 1000), seed=seed,
                               **overrides)
    return gen_schedule(sched_sec.getfloat("binit"), sched_sec.getfloat("bmin"),
                        sched_sec.getfloat("bmax"), sched_sec.getfloat("r"),
                        sched_sec.getint("count", 200),
                        sched_sec.getint("tau", 1000), rng,
                        integer_deltas=sched_sec.getboolean("integer_deltas", False),
                        seed=seed)


def _run_seeds(run_sec):
    raw = run_sec.get("seeds", "1")
    if "," in raw:
        return [int(s) for s in raw.split(",")]
    return list(range(int(raw)))


def cmd_run(args) -> int:
    config_path = Path(args.config)
    cfg = _read_config(config_path)
    base_dir = config_path.parent
    run_sec = cfg["run"]
    out_dir = Path(run_sec.get("output", "results"))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    shutil.copy(config_path, out_dir / "config.ini")
    # copy referenced inputs so the output directory is a self-contained bundle
    for section, key in (("instance", "graph"), ("instance", "routing_graph"),
                         ("cost", "costs"), ("schedule", "path")):
        if cfg.has_section(section) and cfg[section].get(key):
            src = base_dir / cfg[section].get(key)
            dst = out_dir / cfg[section].get(key)
            if src.exists() and src.resolve() != dst.resolve():
                dst.parent.mkdir(parents=True, exist_ok=True)
                shutil.copy(src, dst)

    algorithms = [a.strip() for a in run_sec.get("algorithms", "gga").split(",")]
    for a in algorithms:
        if a not in ALL_ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    seeds = _run_seeds(run_sec)
    f, c, meta = build_instance(cfg, base_dir)
    params = {}
    if run_sec.get("warmup"):
        params["warmup_evals"] = run_sec.getint("warmup")
    if cfg.has_section("schedule") and cfg["schedule"].get("r"):
        params["delta_cap"] = cfg["schedule"].getfloat("r")

    cfg_hash = _config_hash(config_path.read_text())
    files = []
    failed = []
    for seed in seeds:
        schedule = build_schedule(cfg, base_dir, seed)
        if schedule.r:
            params.setdefault("delta_cap", schedule.r)
        for alg in algorithms:
            run_id = f"{alg}_s{seed}"
            try:
                records = run_dynamic(alg, f, c, schedule, seed, params=params)
            except Exception as exc:  # noqa: BLE001 - flag truncated run, keep going
                failed.append((run_id, str(exc)))
                continue
            path = out_dir / f"{run_id}.csv"
            write_run_csv(path, run_id, seed, records)
            files.append(path.name)

    manifest = {
        "version": __version__,
        "config_hash": cfg_hash,
        "algorithms": algorithms,
        "seeds": seeds,
        "cost_variant": meta.get("cost_variant", ""),
        "files": files,
        "failed": failed,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    if failed:
        for run_id, msg in failed:
            print(f"FAILED {run_id}: {msg}", file=sys.stderr)
        return 1
    print(f"wrote {len(files)} run files to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# analyze


def _parse_intervals(spec, total):
    if not spec:
        return [(1, total)]
    out = []
    for part in spec.split(","):
        lo, _, hi = part.partition("-")
        out.append((int(lo), int(hi)))
    return out


def cmd_analyze(args) -> int:
    results_dir = Path(args.results)
    manifest = json.loads((results_dir / "manifest.json").read_text())
    cfg = _read_config(results_dir / "config.ini")
    f, c, meta = build_instance(cfg, results_dir)

    if args.baseline == "brute-force":
        baseline = brute_force_baseline(f, c)
        baseline_id = "brute-force"
    elif args.baseline.startswith("pomc"):
        evals = int(args.baseline.partition(":")[2] or 100_000)
        baseline = long_run_baseline(f, c, evals=evals)
        baseline_id = args.baseline
    else:
        raise ValueError(f"unknown baseline spec {args.baseline!r}")

    by_alg = {}
    for name in manifest["files"]:
        records = read_run_csv(results_dir / name)
        alg = records[0].algorithm
        seed = int(name.rsplit("_s", 1)[1].split(".")[0])
        by_alg.setdefault(alg, {})[seed] = records
    if not by_alg:
        raise ValueError("no run files found")
    algorithms = sorted(by_alg)
    total = max(len(r) for runs in by_alg.values() for r in runs.values())
    intervals = _parse_intervals(args.intervals, total)

    sched_sec = cfg["schedule"] if cfg.has_section("schedule") else {}
    r_val = sched_sec.get("r", "")
    if not r_val and sched_sec.get("preset"):
        r_val = SCHEDULE_PRESETS[sched_sec.get("preset")]["r"]
    tau_val = sched_sec.get("tau", "")
    constraint = manifest.get("cost_variant", "")

    rows = []
    matrices = {}
    for (lo, hi) in intervals:
        groups = []
        for alg in algorithms:
            per_seed = [partial_offline_error(
                offline_errors(by_alg[alg][s], baseline), lo, hi)
                for s in sorted(by_alg[alg])]
            groups.append(np.asarray(per_seed))
        _h, p = kruskal_wallis(groups) if len(groups) > 1 else (0.0, 1.0)
        marks = (bonferroni_posthoc(groups, alpha=args.alpha)
                 if p < args.alpha else np.zeros((len(groups),) * 2, dtype=int))
        matrices[f"{lo}-{hi}"] = marks.tolist()
        for i, alg in enumerate(algorithms):
            rows.append([constraint, r_val, tau_val, f"{lo}-{hi}", alg,
                         f"{groups[i].mean():.6g}", f"{groups[i].std(ddof=1):.6g}"
                         if groups[i].size > 1 else "0",
                         format_marks(marks, i)])

    out = Path(args.out) if args.out else results_dir / "report.csv"
    import csv

    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["constraint", "r", "tau", "interval", "algorithm",
                         "mean", "std", "marks"])
        writer.writerows(rows)
    sig_path = out.with_suffix(".significance.json")
    sig_path.write_text(json.dumps({
        "version": __version__,
        "config_hash": manifest["config_hash"],
        "baseline": baseline_id,
        "algorithms": algorithms,
        "matrices": matrices,
    }, indent=2))
    print(f"wrote {out} and {sig_path}")
    return 0


# ---------------------------------------------------------------------------
# verify-theory


def cmd_verify_theory(args) -> int:
    ok = True

    def report(name, passed, detail):
        nonlocal ok
        ok = ok and passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    # greedy adaptation failure under budget increases (knapsack)
    for n in (4, 8, 16, 64):
        inst = gen_adversarial_knapsack(n)
        solver = AdaptiveGreedy(inst.objective, inst.cost, 1.0)
        budget = 1.0
        for _ in range(n // 2):
            budget += 1.0
            answer = solver.update(budget)
        got = float(inst.objective(answer.bits))
        opt = knapsack_opt_value(inst, budget)
        passed = got == 3.5 and opt == 3 + n / 4
        report(f"knapsack-increase n={n}", passed,
               f"adaptive greedy {got} vs optimum {opt} "
               f"(ratio {got / opt:.4f})")

    # greedy adaptation failure under budget decreases (bipartite cover)
    for n in (16, 64, 100):
        inst = gen_bipartite_cover(n)
        k = math.isqrt(n)
        cost = make_cost("cardinality", n=n)
        solver = AdaptiveGreedy(inst.objective, cost, float(n),
                                initial=Solution.from_indices(n, range(n)))
        answer = None
        for b in range(n - 1, k - 1, -1):
            answer = solver.update(float(b))
        got = float(inst.objective(answer.bits))
        passed = got == 2 * k
        report(f"bipartite-decrease n={n}", passed,
               f"adaptive greedy {got} vs optimum {n - k}")

    # phi-approximation of POMC on a small coverage instance
    rng = substream(args.seed, "verify", "phi")
    graph = gen_random_digraph(10, 0.2, rng)
    inst = CoverageInstance(graph)
    cost = make_cost("cardinality", n=10)
    budget = 3.0
    pomc = Pomc(inst.objective, cost, budget, substream(args.seed, "verify", "pomc"))
    pomc.run(25 * 10 * 10 * int(budget))
    rep = check_phi_approx(pomc, inst.objective, cost, budget, alpha=1.0)
    report("pomc-phi-approximation", rep.all_pass,
           f"phi={rep.phi:.4f}, budgets checked: "
           + ", ".join(f"b={ch.budget:g}:{'ok' if ch.passed else 'FAIL'}"
                       for ch in rep.checks))
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynsel",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"dynsel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate instances and schedules")
    gen.add_argument("kind", choices=["ba", "er", "adversarial-knapsack",
                                      "bipartite-cover", "schedule",
                                      "random-costs", "config"])
    gen.add_argument("--experiment", choices=sorted(EXPERIMENT_PRESETS))
    gen.add_argument("--run-seeds", type=int, default=30,
                     help="number of run seeds for generated configs")
    gen.add_argument("--n", type=int, default=100)
    gen.add_argument("--p", type=float, default=0.02)
    gen.add_argument("--m", type=int, default=2)
    gen.add_argument("--edge-prob", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--preset", choices=sorted(SCHEDULE_PRESETS))
    gen.add_argument("--count", type=int, default=200)
    gen.add_argument("--tau", type=int, default=1000)
    gen.add_argument("--binit", type=float)
    gen.add_argument("--bmin", type=float)
    gen.add_argument("--bmax", type=float)
    gen.add_argument("--r", type=float)
    gen.add_argument("--integer-deltas", action="store_true")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("--config", required=True)
    run.set_defaults(func=cmd_run)

    ana = sub.add_parser("analyze", help="offline errors and statistics")
    ana.add_argument("--results", required=True)
    ana.add_argument("--baseline", default="brute-force",
                     help="`brute-force` or `pomc:<evals>`")
    ana.add_argument("--intervals", default="",
                     help="e.g. `1-50,51-100,101-150,151-200`")
    ana.add_argument("--alpha", type=float, default=0.05)
    ana.add_argument("--out")
    ana.set_defaults(func=cmd_analyze)

    ver = sub.add_parser("verify-theory",
                         help="worst-case traces and the phi-approximation check")
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify_theory)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
