"""Binary random-forest classifier: bootstrap CART trees with Gini splits.

Trees are stored as flat node arrays so prediction is a short loop and the
JSON dump is a direct transcription.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FOREST_FORMAT = 1


@dataclass
class Tree:
    feature: np.ndarray    # split feature per node, -1 at leaves
    threshold: np.ndarray  # go left when x[feature] <= threshold
    left: np.ndarray
    right: np.ndarray
    n_pos: np.ndarray      # training class counts reaching each node
    n_neg: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def is_leaf_only(self) -> bool:
        return bool(self.feature[0] < 0)

    def leaf(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            if x[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return node

    def proba(self, x: np.ndarray) -> float:
        k = self.leaf(x)
        return self.n_pos[k] / (self.n_pos[k] + self.n_neg[k])

    def proba_many(self, X: np.ndarray) -> np.ndarray:
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[nodes] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            nd = nodes[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            nodes[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[nodes] >= 0
        return self.n_pos[nodes] / (self.n_pos[nodes] + self.n_neg[nodes])

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "n_pos": self.n_pos.tolist(),
            "n_neg": self.n_neg.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Tree:
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            n_pos=np.asarray(d["n_pos"], dtype=np.int64),
            n_neg=np.asarray(d["n_neg"], dtype=np.int64),
        )


def _best_split(x: np.ndarray, y: np.ndarray):
    """Lowest weighted Gini over cuts between distinct sorted values of one feature."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order].astype(float)
    n = xs.size
    cut = np.nonzero(xs[1:] > xs[:-1])[0]  # left part ends at index cut
    if cut.size == 0:
        return None
    n_left = cut + 1.0
    n_right = n - n_left
    pos_left = np.cumsum(ys)[cut]
    pos_right = ys.sum() - pos_left
    p_l = pos_left / n_left
    p_r = pos_right / n_right
    impurity = n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)
    k = int(np.argmin(impurity))
    c = cut[k]
    thr = 0.5 * (xs[c] + xs[c + 1])
    if not xs[c] <= thr < xs[c + 1]:  # midpoint rounded onto the upper value
        thr = xs[c]
    return impurity[k] / n, thr


def grow_tree(X: np.ndarray, y: np.ndarray, m_try: int, min_node_size: int,
              rng: np.random.Generator) -> Tree:
    """CART on (X, y); each split looks at ``m_try`` features drawn without replacement.

    A node becomes a leaf when it is pure, holds fewer than ``min_node_size``
    samples, or none of the drawn features takes two distinct values there.
    """
    d = X.shape[1]
    m = min(m_try, d)
    feature, threshold, left, right, n_pos, n_neg = [], [], [], [], [], []

    def new_node(idx):
        pos = int(y[idx].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n_pos.append(pos)
        n_neg.append(idx.size - pos)
        return len(feature) - 1

    root = new_node(np.arange(X.shape[0]))
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        pos = n_pos[node]
        if pos == 0 or pos == idx.size or idx.size < min_node_size:
            continue
        best = None
        for f in rng.choice(d, size=m, replace=False):
            found = _best_split(X[idx, f], y[idx])
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], int(f), found[1])
        if best is None:
            continue
        _, f, thr = best
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        n_pos=np.asarray(n_pos, dtype=np.int64),
        n_neg=np.asarray(n_neg, dtype=np.int64),
    )


@dataclass
class Forest:
    trees: list[Tree]
    n_features: int
    m_try: int
    min_node_size: int
    seeds: list[int]
    positive_rate: float = 0.5
    oob_accuracy: float = float("nan")
    meta: dict = field(default_factory=dict)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def is_constant(self) -> bool:
        """True when no tree splits, so the output ignores the features."""
        return all(t.is_leaf_only for t in self.trees)

    @property
    def informative(self) -> bool:
        """Out-of-bag accuracy beats always predicting the training majority class.

        Forests without an out-of-bag estimate count as informative unless constant.
        """
        if self.is_constant:
            return False
        if np.isnan(self.oob_accuracy):
            return True
        return self.oob_accuracy > max(self.positive_rate, 1 - self.positive_rate)

    def to_dict(self) -> dict:
        return {
            "format": FOREST_FORMAT,
            "n_features": self.n_features,
            "m_try": self.m_try,
            "min_node_size": self.min_node_size,
            "seeds": list(self.seeds),
            "positive_rate": self.positive_rate,
            "oob_accuracy": None if np.isnan(self.oob_accuracy) else self.oob_accuracy,
            "meta": self.meta,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Forest:
        if d.get("format") != FOREST_FORMAT:
            raise ValueError(f"unsupported forest format {d.get('format')!r}")
        oob = d.get("oob_accuracy")
        return cls(
            trees=[Tree.from_dict(t) for t in d["trees"]],
            n_features=int(d["n_features"]),
            m_try=int(d["m_try"]),
            min_node_size=int(d["min_node_size"]),
            seeds=[int(s) for s in d["seeds"]],
            positive_rate=float(d.get("positive_rate", 0.5)),
            oob_accuracy=float("nan") if oob is None else float(oob),
            meta=dict(d.get("meta", {})),
        )


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(bool)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("feature matrix must be 2-D and non-empty")
    if y.shape != (X.shape[0],):
        raise ValueError(f"{X.shape[0]} feature rows but {y.size} labels")
    return X, y


def train_forest(X, y, n_trees: int = 200, m_try: int = 3, seed: int = 0,
                 min_node_size: int = 5) -> Forest:
    """Bagged CART trees; deterministic for a fixed ``seed``."""
    X, y = _check_xy(X, y)
    if n_trees < 1:
        raise ValueError("need at least one tree")
    n = X.shape[0]
    seeds = np.random.SeedSequence(seed).generate_state(n_trees, dtype=np.uint32).tolist()
    trees = []
    votes = np.zeros(n)
    counts = np.zeros(n)
    for s in seeds:
        rng = np.random.default_rng(s)
        boot = rng.integers(0, n, size=n)
        tree = grow_tree(X[boot], y[boot], m_try, min_node_size, rng)
        trees.append(tree)
        oob = np.ones(n, dtype=bool)
        oob[boot] = False
        if oob.any():
            votes[oob] += tree.proba_many(X[oob])
            counts[oob] += 1
    seen = counts > 0
    oob_acc = float("nan")
    if seen.any():
        oob_acc = float(np.mean((votes[seen] / counts[seen] > 0.5) == y[seen]))
    return Forest(trees=trees, n_features=X.shape[1], m_try=m_try,
                  min_node_size=min_node_size, seeds=seeds,
                  positive_rate=float(y.mean()), oob_accuracy=oob_acc)


def predict_proba(forest: Forest, x) -> float:
    """Mean over trees of the positive fraction in the leaf reached by ``x``."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != forest.n_features:
        raise ValueError(f"expected {forest.n_features} features, got {x.size}")
    return float(np.mean([t.proba(x) for t in forest.trees]))


def predict_proba_many(forest: Forest, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise ValueError(f"expected rows of {forest.n_features} features")
    out = np.zeros(X.shape[0])
    for t in forest.trees:
        out += t.proba_many(X)
    return out / forest.n_trees
