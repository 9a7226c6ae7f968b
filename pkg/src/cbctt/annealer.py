"""Single-stage simulated annealing with cutoff cooling and an iteration budget."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import IO

import numpy as np

from . import _kernels as K
from .errors import NeighborhoodExhaustedError
from .evaluation import CostBreakdown, Timetable, _static, full_cost, random_assignment
from .instance import Instance
from .neighborhood import restrict_to_empty_rooms

ITER_MAX = 300_000_000
CHUNK = 1 << 20


@dataclass(frozen=True)
class SAParams:
    """Search parameters; defaults are the race winner (configuration #11)."""

    T0: float = 30.25
    T_min: float = 0.1567
    rho: float = 0.0364
    cr: float = 0.99
    sr: float = 0.43
    w_hard: int = 100
    iter_max: int = ITER_MAX

    def __post_init__(self):
        if not self.T0 > self.T_min > 0:
            raise ValueError(f"need T0 > T_min > 0, got T0={self.T0}, T_min={self.T_min}")
        if not 0 < self.cr < 1:
            raise ValueError(f"cooling rate must lie in (0, 1), got {self.cr}")
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if not 0 <= self.sr <= 1:
            raise ValueError(f"swap rate must lie in [0, 1], got {self.sr}")
        if self.w_hard < 1 or int(self.w_hard) != self.w_hard:
            raise ValueError(f"w_hard must be a positive integer, got {self.w_hard}")
        if self.iter_max < 1:
            raise ValueError("iteration budget must be >= 1")

    def replace(self, **changes) -> SAParams:
        d = asdict(self)
        d.update(changes)
        return SAParams(**d)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def cooling_steps(p: SAParams) -> float:
    """Number of geometric steps taking ``T0`` down to ``T_min``."""
    return math.log(p.T0 / p.T_min) / -math.log(p.cr)


def compute_ns(p: SAParams) -> int:
    """Samples per temperature level so that ``T_min`` is reached as the budget runs out."""
    if not p.T0 > p.T_min > 0:
        raise ValueError("need T0 > T_min > 0")
    return max(1, _round_half_up(p.iter_max / cooling_steps(p)))


def compute_na(p: SAParams) -> int:
    return max(1, _round_half_up(p.rho * compute_ns(p)))


def metropolis_accept(delta: int, T: float, rng: np.random.Generator) -> bool:
    if T <= 0:
        raise ValueError("temperature must be positive")
    if delta <= 0:
        return True
    return bool(rng.random() < math.exp(-delta / T))


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    temperature: float
    current: int
    best: int


@dataclass
class SearchResult:
    best_timetable: Timetable
    best_cost: CostBreakdown
    iterations_used: int
    seed: int
    feasible: bool
    temperature_trace: list[TracePoint] | None = None
    final_temperature: float = math.nan
    elapsed: float = 0.0
    params: SAParams = field(default_factory=SAParams)

    def log_records(self):
        """JSON-lines run log: one record per cooling step, then a summary."""
        for tp in self.temperature_trace or []:
            yield {"iteration": tp.iteration, "temperature": tp.temperature,
                   "current_cost": tp.current, "best_cost": tp.best}
        yield {
            "final": True,
            "instance": self.best_timetable.instance.name,
            "seed": self.seed,
            "iterations_used": self.iterations_used,
            "feasible": self.feasible,
            "final_temperature": self.final_temperature,
            "elapsed": self.elapsed,
            "params": asdict(self.params),
            "cost": self.best_cost.to_dict(),
        }

    def write_log(self, fh: IO[str]) -> None:
        for rec in self.log_records():
            fh.write(json.dumps(rec) + "\n")


def anneal(inst: Instance, p: SAParams, seed: int, *, max_seconds: float | None = None,
           trace: bool = True) -> SearchResult:
    """Run one annealing search from a random initial timetable.

    The temperature drops by ``cr`` after ``n_s`` sampled moves or ``n_a`` accepted
    ones, whichever comes first. Once it reaches ``T_min`` the search keeps
    sampling there until every one of the ``iter_max`` iterations is spent.
    ``max_seconds`` optionally stops earlier; results then depend on wall time.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    tt = random_assignment(inst, rng)
    S, X = _static(inst), tt._X
    n_s, n_a = compute_ns(p), compute_na(p)
    w_hard = int(p.w_hard)

    init = int(K.weighted(K.cost_components(S, X.lec_period, X.lec_room), w_hard))
    best_period = X.lec_period.copy()
    best_room = X.lec_room.copy()
    n_trace = int(math.ceil(cooling_steps(p))) + 2 if trace else 0
    tr_it = np.zeros(n_trace, dtype=np.int64)
    tr_t = np.zeros(n_trace, dtype=np.float64)
    tr_cur = np.zeros(n_trace, dtype=np.int64)
    tr_best = np.zeros(n_trace, dtype=np.int64)
    run = np.zeros(8, dtype=np.int64)
    run[K.CUR] = run[K.BEST] = init
    if trace:
        tr_t[0] = p.T0
        tr_cur[0] = tr_best[0] = init
        run[K.NTRACE] = 1
    T = np.array([p.T0], dtype=np.float64)
    fparams = np.array([p.T_min, p.cr, p.sr], dtype=np.float64)
    iparams = np.array([n_s, n_a, w_hard, restrict_to_empty_rooms(inst), inst.n_courses > 1],
                       dtype=np.int64)

    while run[K.IT] < p.iter_max and run[K.STATUS] == 0:
        stop = p.iter_max if max_seconds is None else min(p.iter_max, run[K.IT] + CHUNK)
        K.anneal_chunk(S, X, rng, T, fparams, iparams, run, stop, best_period, best_room,
                       tr_it, tr_t, tr_cur, tr_best)
        if max_seconds is not None and time.perf_counter() - start >= max_seconds:
            break
    if run[K.STATUS]:
        raise NeighborhoodExhaustedError(
            f"no applicable ML or SL move after {K.MAX_TRIES} draws each "
            f"at iteration {run[K.IT]}")

    now = int(K.weighted(K.cost_components(S, X.lec_period, X.lec_room), w_hard))
    if now != run[K.CUR]:
        raise AssertionError(f"incremental cost {run[K.CUR]} != recomputed {now}")

    best_tt = Timetable(inst, best_period, best_room)
    cost = full_cost(inst, best_tt, w_hard)
    if cost.total != run[K.BEST]:
        raise AssertionError(f"incremental best {run[K.BEST]} != recomputed {cost.total}")
    points = None
    if trace:
        k = int(run[K.NTRACE])
        points = [TracePoint(int(tr_it[i]), float(tr_t[i]), int(tr_cur[i]), int(tr_best[i]))
                  for i in range(k)]
    return SearchResult(
        best_timetable=best_tt,
        best_cost=cost,
        iterations_used=int(run[K.IT]),
        seed=seed,
        feasible=cost.feasible,
        temperature_trace=points,
        final_temperature=float(T[0]),
        elapsed=time.perf_counter() - start,
        params=p,
    )
