"""Configuration sampling, racing, performance matrices and feature-based selection."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .annealer import SAParams
from .forest import Forest, predict_proba, predict_proba_many, train_forest
from .instance import FEATURE_NAMES
from .stats import (benjamini_hochberg, friedman, kruskal_wallis, median,
                    wilcoxon_rank_sum, wilcoxon_signed_rank)

log = logging.getLogger(__name__)

# parameter order fixes the Hammersley dimension each one takes
REFINED_RANGES: dict[str, tuple[float, float]] = {
    "T0": (1.0, 40.0),
    "T_min": (0.015, 0.21),
    "rho": (0.034, 0.05),
}
FULL_RANGES: dict[str, tuple[float, float]] = {
    "T0": (1.0, 100.0),
    "T_min": (0.01, 1.0),
    "rho": (0.01, 1.0),
    "cr": (0.99, 0.999),
    "w_hard": (10.0, 1000.0),
    "sr": (0.1, 0.9),
}


# -- low-discrepancy sampling ------------------------------------------------------


def primes(k: int) -> list[int]:
    """The first ``k`` primes."""
    out: list[int] = []
    n = 2
    while len(out) < k:
        if all(n % p for p in out if p * p <= n):
            out.append(n)
        n += 1
    return out


def radical_inverse(i: int, base: int) -> float:
    """Digits of ``i`` in ``base`` mirrored about the radix point."""
    inv = 0.0
    f = 1.0 / base
    while i > 0:
        i, digit = divmod(i, base)
        inv += digit * f
        f /= base
    return inv


def hammersley_points(n: int, d: int) -> np.ndarray:
    """``n`` points in [0, 1)^d: i/n first, then radical inverses in bases 2, 3, 5, ..."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    bases = primes(d - 1)
    pts = np.empty((n, d))
    for i in range(n):
        pts[i, 0] = i / n
        for j, b in enumerate(bases):
            pts[i, j + 1] = radical_inverse(i, b)
    return pts


@dataclass(frozen=True)
class ConfigPoint:
    """One solver configuration; parameters left out of the sampled space keep their fixed values."""

    T0: float
    T_min: float
    rho: float
    cr: float = 0.99
    w_hard: int = 100
    sr: float = 0.43

    def to_params(self, iter_max: int | None = None) -> SAParams:
        p = SAParams(T0=self.T0, T_min=self.T_min, rho=self.rho, cr=self.cr,
                     w_hard=int(self.w_hard), sr=self.sr)
        return p if iter_max is None else p.replace(iter_max=int(iter_max))

    def to_dict(self) -> dict:
        return asdict(self)


CONFIG_FIELDS = tuple(f.name for f in fields(ConfigPoint))


def scale_to_ranges(points, ranges: Mapping[str, tuple[float, float]] = REFINED_RANGES
                    ) -> list[ConfigPoint]:
    """Map each unit coordinate affinely onto its parameter's [lo, hi]."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    names = list(ranges)
    if pts.shape[1] != len(names):
        raise ValueError(f"points have {pts.shape[1]} coordinates for {len(names)} parameters")
    unknown = set(names) - set(CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)}")
    for name, (lo, hi) in ranges.items():
        if lo > hi:
            raise ValueError(f"inverted range for {name}: [{lo}, {hi}]")
    out = []
    for row in pts:
        vals = {}
        for (name, (lo, hi)), u in zip(ranges.items(), row):
            v = min(max((1 - u) * lo + u * hi, lo), hi)  # exact at both endpoints
            vals[name] = int(round(v)) if name == "w_hard" else float(v)
        out.append(ConfigPoint(**vals))
    return out


def sample_configs(n: int, ranges: Mapping[str, tuple[float, float]] = REFINED_RANGES
                   ) -> list[ConfigPoint]:
    return scale_to_ranges(hammersley_points(n, len(ranges)), ranges)


def write_configs(path, configs: Sequence[ConfigPoint]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("id",) + CONFIG_FIELDS)
        for i, c in enumerate(configs, start=1):
            w.writerow([i] + [getattr(c, k) for k in CONFIG_FIELDS])


def read_configs(path) -> list[ConfigPoint]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {k: float(row[k]) for k in CONFIG_FIELDS if row.get(k) not in (None, "")}
            if "w_hard" in vals:
                vals["w_hard"] = int(round(vals["w_hard"]))
            out.append(ConfigPoint(**vals))
    if not out:
        raise ValueError(f"no configurations in {path}")
    return out


# -- racing --------------------------------------------------------------------------


@dataclass
class RaceResult:
    survivors: list[int]          # config indices, best mean rank first
    mean_ranks: dict[int, float]  # over the survivors' blocks
    eliminated: list[tuple[int, int]] = field(default_factory=list)  # (config, blocks seen)
    n_blocks: int = 0
    evaluations: int = 0
    costs: np.ndarray | None = None  # blocks x configs, NaN once a config is out


def _mean_ranks(costs: np.ndarray, cols: list[int]) -> dict[int, float]:
    r = np.apply_along_axis(rankdata, 1, costs[:, cols])
    return {c: float(m) for c, m in zip(cols, r.mean(axis=0))}


def f_race(instances: Sequence, configs: Sequence, solver: Callable[[object, object, int], float],
           *, runs_per_step: int = 1, confidence: float = 0.95, budget: int | None = None,
           min_blocks: int = 5, seed: int = 0) -> RaceResult:
    """Race ``configs`` over ``instances``, dropping those shown worse than the leader.

    Each instance contributes ``runs_per_step`` blocks; within a block every live
    configuration runs with the same seed. Once ``min_blocks`` blocks exist, a
    Friedman test at level 1 - confidence guards a signed-rank comparison of each
    live configuration against the one with the best mean rank. Rejected
    configurations leave from the bottom of the ranking, so a survivor never ranks
    below a configuration dropped in the same step. ``budget`` caps solver calls.
    """
    if not instances:
        raise ValueError("no instances to race on")
    k = len(configs)
    if k == 0:
        raise ValueError("no configurations to race")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    alpha = 1.0 - confidence
    alive = list(range(k))
    if k == 1:
        return RaceResult(survivors=[0], mean_ranks={0: 1.0})
    rows: list[np.ndarray] = []
    eliminated: list[tuple[int, int]] = []
    evals = 0
    step = 0
    for inst in instances:
        if len(alive) == 1:
            break
        if budget is not None and evals + len(alive) * runs_per_step > budget:
            break
        for r in range(runs_per_step):
            s = seed + step * runs_per_step + r
            row = np.full(k, np.nan)
            for c in alive:
                row[c] = float(solver(inst, configs[c], s))
                evals += 1
            rows.append(row)
        step += 1
        if len(rows) < min_blocks:
            continue
        costs = np.array(rows)
        # blocks where every live config ran
        block = costs[~np.isnan(costs[:, alive]).any(axis=1)]
        if friedman(block[:, alive]) >= alpha:
            continue
        ranks = _mean_ranks(block, alive)
        order = sorted(alive, key=lambda c: (ranks[c], c))
        leader = order[0]
        for c in reversed(order[1:]):
            if wilcoxon_signed_rank(block[:, leader], block[:, c]) >= alpha:
                break
            alive.remove(c)
            eliminated.append((c, len(rows)))
            log.info("race: config %d out after %d blocks", c, len(rows))
    costs = np.array(rows) if rows else np.empty((0, k))
    if len(rows):
        block = costs[~np.isnan(costs[:, alive]).any(axis=1)]
        ranks = _mean_ranks(block, alive)
    else:
        ranks = {c: 1.0 for c in alive}
    survivors = sorted(alive, key=lambda c: (ranks[c], c))
    return RaceResult(survivors=survivors, mean_ranks=ranks, eliminated=eliminated,
                      n_blocks=len(rows), evaluations=evals, costs=costs)


# -- performance matrix ------------------------------------------------------------


@dataclass
class PerformanceMatrix:
    instances: list[str]
    configs: list[str]
    flags: np.ndarray  # bool, instances x configs

    def __post_init__(self):
        self.flags = np.asarray(self.flags, dtype=bool)
        if self.flags.shape != (len(self.instances), len(self.configs)):
            raise ValueError(f"flag matrix {self.flags.shape} does not match "
                             f"{len(self.instances)} instances x {len(self.configs)} configs")

    @property
    def success_rates(self) -> np.ndarray:
        if not self.instances:
            return np.zeros(len(self.configs))
        return self.flags.mean(axis=0)

    @property
    def majority(self) -> int:
        """Column with the highest success rate, lowest index on ties."""
        return int(np.argmax(self.success_rates))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["instance"] + list(self.configs))
            for name, row in zip(self.instances, self.flags):
                w.writerow([name] + [int(v) for v in row])

    @classmethod
    def from_csv(cls, path) -> PerformanceMatrix:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path} is empty")
        header, body = rows[0], [r for r in rows[1:] if r]
        flags = np.array([[int(v) for v in r[1:]] for r in body], dtype=bool)
        return cls(instances=[r[0] for r in body], configs=header[1:],
                   flags=flags.reshape(len(body), len(header) - 1))


def _check_results(results: Mapping[str, Sequence[Sequence[float]]]) -> int:
    k = None
    for name, row in results.items():
        if k is None:
            k = len(row)
        if len(row) != k:
            raise ValueError(f"instance {name}: {len(row)} configs, expected {k}")
        for j, cell in enumerate(row):
            if cell is None or len(cell) < 2:
                raise ValueError(f"instance {name}, config {j}: need at least 2 runs")
    if k is None or k == 0:
        raise ValueError("no results")
    return k


def performance_row(samples: Sequence[Sequence[float]], fdr_q: float = 0.10) -> np.ndarray:
    """Flags for the configs not shown worse than the smallest-median one."""
    meds = [median(s) for s in samples]
    best = int(np.argmin(meds))
    others = [j for j in range(len(samples)) if j != best]
    flags = np.ones(len(samples), dtype=bool)
    if others:
        pv = [wilcoxon_rank_sum(samples[best], samples[j]) for j in others]
        for j, rej in zip(others, benjamini_hochberg(pv, fdr_q)):
            flags[j] = not rej
    return flags


def build_performance_matrix(results: Mapping[str, Sequence[Sequence[float]]],
                             fdr_q: float = 0.10, configs: Sequence[str] | None = None
                             ) -> PerformanceMatrix:
    """``results[instance][config]`` holds the run costs of one cell."""
    k = _check_results(results)
    names = list(configs) if configs is not None else [str(j + 1) for j in range(k)]
    if len(names) != k:
        raise ValueError(f"{len(names)} config names for {k} columns")
    flags = np.array([performance_row(results[i], fdr_q) for i in results], dtype=bool)
    return PerformanceMatrix(instances=list(results), configs=names,
                             flags=flags.reshape(len(results), k))


def screen_instances(results: Mapping[str, Sequence[Sequence[float]]],
                     alpha: float = 0.10) -> list[str]:
    """Instances on which the configuration has a Kruskal-Wallis-detectable effect."""
    _check_results(results)
    return [name for name, row in results.items() if kruskal_wallis(row) < alpha]


# -- feature-based selection -------------------------------------------------------


def _rates(matrix) -> np.ndarray:
    if isinstance(matrix, PerformanceMatrix):
        return matrix.success_rates
    return np.asarray(matrix, dtype=float)


def _choose(probs: np.ndarray, rates: np.ndarray) -> int:
    # highest probability, then highest success rate, then lowest index
    keys = sorted(range(len(probs)), key=lambda j: (-round(probs[j], 12), -rates[j], j))
    return keys[0]


def select_config(forests: Sequence[Forest], x, matrix) -> int:
    """Index of the configuration most likely to perform well on features ``x``.

    A forest that is constant or no better out-of-bag than its majority class
    reports its training success rate instead of a feature-driven estimate; when
    that holds for every forest the choice is the majority configuration.
    ``matrix`` is a PerformanceMatrix or the vector of column success rates.
    """
    rates = _rates(matrix)
    if len(forests) != len(rates):
        raise ValueError(f"{len(forests)} forests for {len(rates)} configurations")
    x = np.asarray(x, dtype=float).ravel()
    if not any(f.informative for f in forests):
        return int(np.argmax(rates))
    probs = np.array([predict_proba(f, x) if f.informative else f.positive_rate
                      for f in forests])
    return _choose(probs, rates)


def select_many(forests: Sequence[Forest], X, matrix) -> np.ndarray:
    rates = _rates(matrix)
    if len(forests) != len(rates):
        raise ValueError(f"{len(forests)} forests for {len(rates)} configurations")
    X = np.asarray(X, dtype=float)
    if not any(f.informative for f in forests):
        return np.full(X.shape[0], int(np.argmax(rates)))
    P = np.column_stack([predict_proba_many(f, X) if f.informative
                         else np.full(X.shape[0], f.positive_rate) for f in forests])
    return np.array([_choose(p, rates) for p in P])


def train_forests(X, Y, n_trees: int = 200, m_try: int = 3, seed: int = 0,
                  min_node_size: int = 5) -> list[Forest]:
    """One forest per column of the flag matrix ``Y``."""
    Y = np.asarray(Y, dtype=bool)
    seeds = np.random.SeedSequence(seed).generate_state(Y.shape[1], dtype=np.uint32)
    return [train_forest(X, Y[:, j], n_trees=n_trees, m_try=m_try, seed=int(seeds[j]),
                         min_node_size=min_node_size) for j in range(Y.shape[1])]


def cross_validate_accuracy(X, Y, folds: int = 10, seed: int = 0, n_trees: int = 100,
                            m_try: int = 3, min_node_size: int = 5) -> float:
    """Share of held-out instances whose selected configuration is flagged good."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=bool)
    n = X.shape[0]
    if Y.shape[0] != n:
        raise ValueError(f"{n} feature rows but {Y.shape[0]} flag rows")
    if folds < 2 or n < folds:
        raise ValueError(f"need at least {folds} rows for {folds}-fold cross validation")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    correct = 0
    for f, test in enumerate(np.array_split(perm, folds)):
        train = np.setdiff1d(perm, test)
        forests = train_forests(X[train], Y[train], n_trees=n_trees, m_try=m_try,
                                seed=seed * 1000 + f, min_node_size=min_node_size)
        chosen = select_many(forests, X[test], Y[train].mean(axis=0))
        correct += int(Y[test, chosen].sum())
    return correct / n


def permutation_importance(forests: Sequence[Forest], X, Y, seed: int = 0,
                           n_repeats: int = 5) -> np.ndarray:
    """Mean drop in per-forest accuracy when one feature column is shuffled."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=bool)
    if Y.shape != (X.shape[0], len(forests)):
        raise ValueError("flag matrix must have one column per forest")
    rng = np.random.default_rng(seed)

    def accuracy(Xm):
        return np.array([np.mean((predict_proba_many(f, Xm) > 0.5) == Y[:, j])
                         for j, f in enumerate(forests)])

    base = accuracy(X)
    out = np.zeros(X.shape[1])
    for col in range(X.shape[1]):
        drops = []
        for _ in range(n_repeats):
            Xp = X.copy()
            Xp[:, col] = rng.permutation(Xp[:, col])
            drops.append(np.mean(base - accuracy(Xp)))
        out[col] = float(np.mean(drops))
    return out


# -- persisted selector ------------------------------------------------------------

MODEL_FORMAT = 1


@dataclass
class Selector:
    """Trained forests plus what ``predict`` needs to name the chosen configuration."""

    configs: list[ConfigPoint]
    forests: list[Forest]
    success_rates: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def choose(self, x) -> int:
        return select_config(self.forests, x, self.success_rates)

    def save(self, path) -> None:
        doc = {
            "format": MODEL_FORMAT,
            "feature_names": list(self.feature_names),
            "configs": [c.to_dict() for c in self.configs],
            "success_rates": [float(r) for r in self.success_rates],
            "forests": [f.to_dict() for f in self.forests],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path) -> Selector:
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {doc.get('format')!r}")
        return cls(
            configs=[ConfigPoint(**c) for c in doc["configs"]],
            forests=[Forest.from_dict(f) for f in doc["forests"]],
            success_rates=np.asarray(doc["success_rates"], dtype=float),
            feature_names=tuple(doc["feature_names"]),
        )
