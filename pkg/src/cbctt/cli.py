"""Command-line entry point and batch experiment harness.

Exit codes: 0 success (and a hard-feasible timetable where one is produced),
1 usage, input or format errors, 2 a valid run whose best timetable is infeasible.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .annealer import ITER_MAX, SAParams, anneal
from .errors import CttError
from .evaluation import format_solution, full_cost, load_solution
from .instance import FEATURE_NAMES, extract_features, load_ctt, validate_instance
from .tuning import (FULL_RANGES, REFINED_RANGES, ConfigPoint, PerformanceMatrix, Selector,
                     build_performance_matrix, cross_validate_accuracy, f_race,
                     permutation_importance, read_configs, sample_configs, screen_instances,
                     train_forests, write_configs)

log = logging.getLogger("cbctt")

JOBS_ENV = "CBCTT_JOBS"
EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


@dataclass
class RunRecord:
    instance: str
    config_id: int
    config: dict
    seed: int
    iterations: int = 0
    total: int | None = None
    breakdown: dict = field(default_factory=dict)
    feasible: bool = False
    wall_time: float = 0.0
    timestamp: str = ""
    status: str = "ok"
    error: str = ""

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.instance, self.config_id, self.seed)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _expand(patterns: Sequence[str]) -> list[str]:
    out: list[str] = []
    for pat in patterns:
        hits = sorted(glob.glob(pat))
        if not hits and os.path.exists(pat):
            hits = [pat]
        if not hits:
            raise FileNotFoundError(f"no instance matches {pat!r}")
        out.extend(h for h in hits if h not in out)
    return out


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


# -- solve / validate / features ---------------------------------------------------


def _params_from_args(args) -> SAParams:
    return SAParams(T0=args.T0, T_min=args.T_min, rho=args.rho, cr=args.cr, sr=args.sr,
                    w_hard=args.w_hard, iter_max=int(args.max_iterations))


def cmd_solve(args) -> int:
    inst = load_ctt(args.instance)
    params = _params_from_args(args)
    res = anneal(inst, params, args.seed, max_seconds=args.max_seconds, trace=bool(args.log))
    out = Path(args.output or Path(args.instance).with_suffix(".sol").name)
    out.write_text(format_solution(inst, res.best_timetable))
    rec = RunRecord(
        instance=inst.name, config_id=0, config=asdict(params), seed=args.seed,
        iterations=res.iterations_used, total=res.best_cost.total,
        breakdown=res.best_cost.to_dict(), feasible=res.feasible,
        wall_time=round(res.elapsed, 3), timestamp=_now(),
    )
    text = json.dumps(asdict(rec), indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n")
    else:
        print(text)
    if args.log:
        with open(args.log, "w") as fh:
            res.write_log(fh)
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_validate(args) -> int:
    inst = load_ctt(args.instance)
    tt = load_solution(inst, args.solution)
    cost = full_cost(inst, tt, args.w_hard)
    for k, v in cost.to_dict().items():
        if k not in ("w_hard", "total", "feasible"):
            print(f"{k}: {v}")
    print(f"hard: {cost.hard}")
    print(f"soft: {cost.soft}")
    print(f"total: {cost.total}")
    return EXIT_OK if cost.feasible else EXIT_INFEASIBLE


def cmd_features(args) -> int:
    rows = []
    for path in _expand(args.instances):
        inst = load_ctt(path)
        for f in validate_instance(inst):
            log.warning("%s: %s: %s", inst.name, f.kind.value, f.message)
        rows.append({"instance": inst.name, **extract_features(inst).to_dict()})
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        if args.format == "json":
            for r in rows:
                fh.write(json.dumps(r) + "\n")
        else:
            w = csv.DictWriter(fh, fieldnames=["instance", *FEATURE_NAMES])
            w.writeheader()
            w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_sample_configs(args) -> int:
    ranges = FULL_RANGES if args.full else REFINED_RANGES
    configs = sample_configs(args.n, ranges)
    if args.output:
        write_configs(args.output, configs)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["id"] + list(asdict(configs[0])))
        for i, c in enumerate(configs, start=1):
            w.writerow([i] + list(asdict(c).values()))
    return EXIT_OK


# -- experiment harness -------------------------------------------------------------


@lru_cache(maxsize=64)
def _instance(path: str):
    return load_ctt(path)


def _run_task(task: tuple) -> dict:
    path, config_id, config, seed, iter_max, max_seconds = task
    name = path
    t0 = time.perf_counter()
    try:
        inst = _instance(path)
        name = inst.name
        params = ConfigPoint(**config).to_params(iter_max)
        res = anneal(inst, params, seed, max_seconds=max_seconds, trace=False)
        rec = RunRecord(
            instance=name, config_id=config_id, config=config, seed=seed,
            iterations=res.iterations_used, total=res.best_cost.total,
            breakdown=res.best_cost.to_dict(), feasible=res.feasible,
            wall_time=round(res.elapsed, 3), timestamp=_now(),
        )
    except Exception as exc:  # recorded and reported, the grid goes on
        rec = RunRecord(instance=name, config_id=config_id, config=config, seed=seed,
                        wall_time=round(time.perf_counter() - t0, 3), timestamp=_now(),
                        status="error", error=f"{type(exc).__name__}: {exc}")
    return asdict(rec)


def read_records(path) -> list[RunRecord]:
    out = []
    if not os.path.exists(path):
        return out
    with open(path) as fh:
        for no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(RunRecord(**json.loads(line)))
            except (json.JSONDecodeError, TypeError):
                log.warning("%s:%d: skipping unreadable record", path, no)
    return out


def results_from_records(records: Sequence[RunRecord], n_configs: int | None = None):
    """``results[instance][config]`` cost lists from successful runs, plus config ids."""
    cells: dict[str, dict[int, dict[int, float]]] = {}
    for r in records:
        if r.status != "ok" or r.total is None:
            continue
        cells.setdefault(r.instance, {}).setdefault(r.config_id, {})[r.seed] = r.total
    ids = sorted({c for row in cells.values() for c in row})
    if n_configs is not None:
        ids = list(range(1, n_configs + 1))
    results, incomplete = {}, []
    for name in sorted(cells):
        row = cells[name]
        samples = [[row[c][s] for s in sorted(row[c])] if c in row else [] for c in ids]
        if any(len(s) < 2 for s in samples):
            incomplete.append(name)
            continue
        results[name] = samples
    return results, ids, incomplete


def _matrix_from_log(log_path, out_path, fdr_q, screen, n_configs=None) -> PerformanceMatrix:
    results, ids, incomplete = results_from_records(read_records(log_path), n_configs)
    for name in incomplete:
        log.warning("instance %s has cells with fewer than 2 successful runs; left out", name)
    if screen:
        keep = set(screen_instances(results))
        dropped = sorted(set(results) - keep)
        if dropped:
            log.info("screening drops %d instance(s) without a configuration effect", len(dropped))
        results = {k: v for k, v in results.items() if k in keep}
    if not results:
        raise ValueError("no instance has complete results")
    m = build_performance_matrix(results, fdr_q, configs=[str(c) for c in ids])
    m.to_csv(out_path)
    return m


def cmd_experiment(args) -> int:
    paths = _expand(args.instances)
    configs = read_configs(args.configs)
    seeds = args.seed_list or list(range(1, args.seeds + 1))
    names = {p: _instance(p).name for p in paths}
    done = {r.key for r in read_records(args.log) if r.status == "ok"}
    tasks = []
    for p in paths:
        for ci, cfg in enumerate(configs, start=1):
            for s in seeds:
                if (names[p], ci, s) not in done:
                    tasks.append((p, ci, asdict(cfg), s, int(args.max_iterations),
                                  args.max_seconds))
    log.info("%d run(s) to do, %d already logged", len(tasks), len(done))
    jobs = args.jobs or _default_jobs()
    failures = 0
    with open(args.log, "a") as fh:
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                stream = pool.map(_run_task, tasks)
                for rec in stream:
                    failures += rec["status"] != "ok"
                    fh.write(json.dumps(rec) + "\n")
                    fh.flush()
        else:
            for t in tasks:
                rec = _run_task(t)
                failures += rec["status"] != "ok"
                fh.write(json.dumps(rec) + "\n")
                fh.flush()
    if failures:
        log.warning("%d run(s) failed; see records with status 'error'", failures)
    if args.matrix:
        m = _matrix_from_log(args.log, args.matrix, args.fdr, args.screen, len(configs))
        print(f"matrix: {len(m.instances)} instances x {len(m.configs)} configs -> {args.matrix}")
    return EXIT_OK


def cmd_build_matrix(args) -> int:
    m = _matrix_from_log(args.log, args.output, args.fdr, args.screen)
    rates = ", ".join(f"{c}:{r:.3f}" for c, r in zip(m.configs, m.success_rates))
    print(f"{len(m.instances)} instances x {len(m.configs)} configs; success rates {rates}")
    return EXIT_OK


# -- race / train / predict ---------------------------------------------------------


class _RaceSolver:
    def __init__(self, iter_max: int, max_seconds: float | None):
        self.iter_max = iter_max
        self.max_seconds = max_seconds

    def __call__(self, inst, cfg: ConfigPoint, seed: int) -> float:
        res = anneal(inst, cfg.to_params(self.iter_max), seed, max_seconds=self.max_seconds,
                     trace=False)
        return float(res.best_cost.total)


def cmd_race(args) -> int:
    insts = [load_ctt(p) for p in _expand(args.instances)]
    configs = read_configs(args.configs)
    res = f_race(insts, configs, _RaceSolver(int(args.max_iterations), args.max_seconds),
                 runs_per_step=args.runs_per_step, confidence=args.confidence,
                 budget=args.budget, min_blocks=args.min_blocks, seed=args.seed)
    for c, blocks in res.eliminated:
        print(f"config {c + 1} eliminated after {blocks} blocks")
    print("survivors (best first): " + ", ".join(
        f"{c + 1} (mean rank {res.mean_ranks[c]:.2f})" for c in res.survivors))
    return EXIT_OK


def _read_features(path) -> dict[str, np.ndarray]:
    """Feature rows keyed by instance name, from CSV or JSON lines."""
    with open(path, newline="") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    else:
        rows = list(csv.DictReader(text.splitlines()))
    return {r["instance"]: np.array([float(r[k]) for k in FEATURE_NAMES]) for r in rows}


def cmd_train(args) -> int:
    m = PerformanceMatrix.from_csv(args.matrix)
    feats = _read_features(args.features)
    missing = [i for i in m.instances if i not in feats]
    if missing:
        raise ValueError(f"no features for {len(missing)} instance(s), e.g. {missing[0]!r}")
    X = np.array([feats[i] for i in m.instances])
    Y = m.flags
    configs = read_configs(args.configs)
    if len(configs) != len(m.configs):
        raise ValueError(f"{len(configs)} configs but the matrix has {len(m.configs)} columns")
    if args.cv:
        acc = cross_validate_accuracy(X, Y, folds=args.cv, seed=args.seed, n_trees=args.trees,
                                      m_try=args.m_try)
        print(f"{args.cv}-fold accuracy: {acc:.3f} (majority rule {Y[:, m.majority].mean():.3f})")
    forests = train_forests(X, Y, n_trees=args.trees, m_try=args.m_try, seed=args.seed)
    imp = permutation_importance(forests, X, Y, seed=args.seed)
    print("permutation importance: " + ", ".join(
        f"{k}={v:.4f}" for k, v in sorted(zip(FEATURE_NAMES, imp), key=lambda t: -t[1])))
    Selector(configs, forests, m.success_rates).save(args.output)
    print(f"model -> {args.output}")
    return EXIT_OK


def cmd_predict(args) -> int:
    sel = Selector.load(args.model)
    inst = load_ctt(args.instance)
    x = extract_features(inst).as_array()
    j = sel.choose(x)
    print(json.dumps({"instance": inst.name, "config_id": j + 1, **sel.configs[j].to_dict()}))
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    d = SAParams()
    p.add_argument("--T0", type=float, default=d.T0, help="starting temperature")
    p.add_argument("--T-min", dest="T_min", type=float, default=d.T_min,
                   help="temperature floor")
    p.add_argument("--rho", type=float, default=d.rho, help="accepted/sampled ratio per level")
    p.add_argument("--cr", type=float, default=d.cr, help="cooling rate")
    p.add_argument("--sr", type=float, default=d.sr, help="swap-move rate")
    p.add_argument("--w-hard", dest="w_hard", type=int, default=d.w_hard,
                   help="weight of hard violations")


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iterations", type=float, default=ITER_MAX,
                   help="iteration budget per run (default %(default).0f)")
    p.add_argument("--max-seconds", type=float, default=None,
                   help="optional wall-clock stop; makes results timing-dependent")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbctt",
                                     description="Curriculum-based course timetabling toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="anneal one instance")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--output", help="solution path (default: <instance stem>.sol)")
    p.add_argument("--report", help="write the run record here instead of stdout")
    p.add_argument("--log", help="JSON-lines trace of every cooling step")
    _add_search_flags(p)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="cost report for a solution file")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--w-hard", dest="w_hard", type=int, default=SAParams.w_hard)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("features", help="instance features, one record per instance")
    p.add_argument("instances", nargs="+", help="paths or glob patterns")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="JSON lines keyed by feature name, or CSV")
    p.add_argument("--output")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("sample-configs", help="Hammersley configurations as CSV")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--full", action="store_true",
                   help="sample all six parameters over their wide ranges")
    p.add_argument("--output")
    p.set_defaults(func=cmd_sample_configs)

    p = sub.add_parser("race", help="F-Race over instances")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--configs", required=True)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--runs-per-step", type=int, default=1)
    p.add_argument("--budget", type=int, default=None, help="maximum number of solver runs")
    p.add_argument("--min-blocks", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_race)

    p = sub.add_parser("experiment", help="run the instance x config x seed grid")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--configs", required=True)
    p.add_argument("--seeds", type=int, default=10, help="use seeds 1..N")
    p.add_argument("--seed-list", type=int, nargs="+", help="explicit seeds")
    p.add_argument("--jobs", type=int, default=None,
                   help=f"worker processes (default ${JOBS_ENV} or 1)")
    p.add_argument("--log", default="runs.jsonl")
    p.add_argument("--matrix", default="matrix.csv")
    p.add_argument("--fdr", type=float, default=0.10)
    p.add_argument("--screen", action="store_true",
                   help="drop instances without a Kruskal-Wallis configuration effect")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("build-matrix", help="performance matrix from a run log")
    p.add_argument("--log", default="runs.jsonl")
    p.add_argument("--output", default="matrix.csv")
    p.add_argument("--fdr", type=float, default=0.10)
    p.add_argument("--screen", action="store_true")
    p.set_defaults(func=cmd_build_matrix)

    p = sub.add_parser("train", help="fit one forest per configuration")
    p.add_argument("--matrix", required=True)
    p.add_argument("--features", required=True, help="output of 'features' (JSON lines or CSV)")
    p.add_argument("--configs", required=True)
    p.add_argument("--trees", type=int, default=200)
    p.add_argument("--m-try", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cv", type=int, default=0, help="also report k-fold accuracy")
    p.add_argument("--output", default="model.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="pick a configuration for an instance")
    p.add_argument("--model", required=True)
    p.add_argument("instance")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CttError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
