"""Gradient-boosted regression trees, squared error, exact greedy splits.

Trees are grown depth-first with vectorized split search: per node and
feature, candidates are evaluated from prefix sums over the sorted
column. Fitting is deterministic for a given seed; with subsample = 1
no randomness is consumed at all.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_GAIN_EPS = 1e-12


class RegressionTree:
    """Flat-array binary tree; children of node i live at left[i]/right[i]."""

    def __init__(self, max_depth: int = 4, min_samples_leaf: int = 1):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.value) - 1

    def _best_split(self, X: np.ndarray, y: np.ndarray):
        n = len(y)
        total = y.sum()
        parent_term = total * total / n
        msl = self.min_samples_leaf
        best_gain = _GAIN_EPS
        best = None
        sizes = np.arange(1, n)
        for j in range(X.shape[1]):
            order = np.argsort(X[:, j], kind="stable")
            xs = X[order, j]
            left_sum = np.cumsum(y[order])[:-1]
            valid = xs[1:] > xs[:-1]
            if msl > 1:
                valid &= (sizes >= msl) & (n - sizes >= msl)
            if not valid.any():
                continue
            gain = left_sum**2 / sizes + (total - left_sum) ** 2 / (n - sizes) - parent_term
            gain[~valid] = -np.inf
            k = int(np.argmax(gain))
            if gain[k] > best_gain:
                best_gain = gain[k]
                best = (j, (xs[k] + xs[k + 1]) / 2.0)
        return best

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RegressionTree":
        root = self._new_node(float(y.mean()))
        stack = [(root, np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            if depth >= self.max_depth or len(idx) < 2 * self.min_samples_leaf:
                continue
            split = self._best_split(X[idx], y[idx])
            if split is None:
                continue
            j, thr = split
            mask = X[idx, j] <= thr
            left_idx, right_idx = idx[mask], idx[~mask]
            if len(left_idx) == 0 or len(right_idx) == 0:
                continue
            self.feature[node] = j
            self.threshold[node] = thr
            self.left[node] = self._new_node(float(y[left_idx].mean()))
            self.right[node] = self._new_node(float(y[right_idx].mean()))
            stack.append((self.left[node], left_idx, depth + 1))
            stack.append((self.right[node], right_idx, depth + 1))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X), dtype=float)
        stack = [(0, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if self.feature[node] < 0:
                out[idx] = self.value[node]
                continue
            mask = X[idx, self.feature[node]] <= self.threshold[node]
            if mask.any():
                stack.append((self.left[node], idx[mask]))
            if (~mask).any():
                stack.append((self.right[node], idx[~mask]))
        return out


@dataclass(frozen=True)
class BoostingParams:
    n_trees: int = 200
    max_depth: int = 4
    learning_rate: float = 0.1
    subsample: float = 1.0
    min_samples_leaf: int = 3


class GradientBoostedTrees:
    def __init__(self, params: BoostingParams | None = None, seed: int = 0):
        self.params = params or BoostingParams()
        self.seed = seed
        self.base_prediction = 0.0
        self.trees: list[RegressionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GradientBoostedTrees":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        p = self.params
        rng = np.random.default_rng(self.seed)
        self.base_prediction = float(y.mean())
        pred = np.full(len(y), self.base_prediction)
        self.trees = []
        for _ in range(p.n_trees):
            residual = y - pred
            if p.subsample < 1.0:
                k = max(1, int(round(p.subsample * len(y))))
                rows = np.sort(rng.choice(len(y), size=k, replace=False))
            else:
                rows = slice(None)
            tree = RegressionTree(p.max_depth, p.min_samples_leaf)
            tree.fit(X[rows], residual[rows])
            pred = pred + p.learning_rate * tree.predict(X)
            self.trees.append(tree)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        pred = np.full(len(X), self.base_prediction)
        for tree in self.trees:
            pred = pred + self.params.learning_rate * tree.predict(X)
        return pred
