"""Partition tree over the unit cube, UCT leaf scoring and depth control.

The tree is rebuilt from the full history every iteration.  Each internal
node holds a two-way classifier trained to reproduce a 2-means clustering of
its members on ``[coords, normalized objective]``; points are routed by that
classifier's predictions.  Depth is counted in layers: a tree whose maximum
depth is 1 is a single root leaf.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

import numpy as np
from scipy.special import softmax
from sklearn.svm import SVC

from . import _kernels


class TwoWayClassifier(Protocol):
    def fit(self, X: np.ndarray, labels: np.ndarray) -> "TwoWayClassifier": ...

    def predict(self, X: np.ndarray) -> np.ndarray: ...


class NearestCentroidClassifier:
    """Assigns each point to the closer of the two class means."""

    def fit(self, X, labels):
        self.centroids_ = np.stack([X[labels == 0].mean(axis=0), X[labels == 1].mean(axis=0)])
        return self

    def predict(self, X):
        d2 = _kernels.sqdist(np.atleast_2d(X), self.centroids_)
        return (d2[:, 1] < d2[:, 0]).astype(np.int64)


class SvmClassifier:
    """RBF-kernel SVM; falls back to nearest centroid for a singleton class."""

    def __init__(self, C: float = 1.0, gamma: str | float = "scale", min_class_size: int = 2):
        self.C = C
        self.gamma = gamma
        self.min_class_size = min_class_size

    def fit(self, X, labels):
        counts = np.bincount(labels, minlength=2)
        if counts.min() < self.min_class_size:
            self.model_ = NearestCentroidClassifier().fit(X, labels)
        else:
            self.model_ = SVC(kernel="rbf", C=self.C, gamma=self.gamma).fit(X, labels)
        return self

    def predict(self, X):
        return np.asarray(self.model_.predict(np.atleast_2d(X)), dtype=np.int64)


def default_classifier() -> TwoWayClassifier:
    return SvmClassifier()


# --------------------------------------------------------------------------
# clustering
# --------------------------------------------------------------------------


def kmeans2(F: np.ndarray, seed, n_init: int = 10, max_iter: int = 100) -> np.ndarray | None:
    """Best-of-``n_init`` 2-means labels for the rows of ``F``.

    k-means++ seeding.  Returns None when the data cannot be split in two
    (all rows identical, or every restart ends with an empty cluster).
    """
    n = F.shape[0]
    if n < 2 or np.all(F == F[0]):
        return None
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        first = F[rng.integers(n)]
        d2 = np.sum((F - first) ** 2, axis=1)
        if d2.sum() <= 0.0:
            continue
        second = F[rng.choice(n, p=d2 / d2.sum())]
        labels, _, inertia, ok = _kernels.lloyd(F, np.stack([first, second]), max_iter)
        if ok and inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def minmax(y: np.ndarray) -> np.ndarray:
    """Scale to ``[0, 1]``; a constant vector maps to zeros."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return y.copy()
    lo, hi = y.min(), y.max()
    span = hi - lo
    if span <= 0.0:
        return np.zeros_like(y)
    out = (y - lo) / span
    return out


# --------------------------------------------------------------------------
# tree
# --------------------------------------------------------------------------


@dataclass
class TreeNode:
    id: int
    depth: int
    member_indices: np.ndarray
    v_hat: float
    parent: int | None = None
    splitter: TwoWayClassifier | None = None
    children: tuple[int, int] | None = None

    @property
    def n_visits(self) -> int:
        return int(self.member_indices.size)

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass
class PartitionTree:
    nodes: list[TreeNode]
    max_depth: int
    root: int = 0

    @property
    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes if n.is_leaf]

    @property
    def n_leaves(self) -> int:
        return sum(n.is_leaf for n in self.nodes)

    @property
    def depth(self) -> int:
        """Number of layers actually built (1 for a root-only tree)."""
        return 1 + max(n.depth for n in self.nodes)

    def assign(self, X) -> np.ndarray:
        """Leaf id for every row of ``X``, following classifier predictions."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(X.shape[0], self.root, dtype=np.int64)
        # nodes are stored in BFS order, so parents are visited before children
        for node in self.nodes:
            if node.is_leaf:
                continue
            here = np.flatnonzero(out == node.id)
            if here.size == 0:
                continue
            side = node.splitter.predict(X[here])
            left, right = node.children
            out[here] = np.where(side == 0, left, right)
        return out

    def assign_leaf(self, point) -> int:
        return int(self.assign(np.asarray(point, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class NavigatorConfig:
    """Tree and depth-control settings.

    With ``coupled`` set (and a trust region present) the depth moves one
    step per trust-region resize instead of running its own counters; the
    thresholds below then only apply to kinds without a trust region.
    ``objective_weight`` scales the objective column of the clustering
    features; None means the number of dimensions.
    """

    initial_depth: int = 1
    depth_limit: int = 5
    success_threshold: int = 5
    failure_threshold: int = 3
    cp: float = 0.5
    tau: float = 0.1
    leaf_size: int = 10
    adaptive: bool = True
    restart_depth: int = 1
    coupled: bool = True
    objective_weight: float | None = None


@dataclass(frozen=True)
class NavigatorState:
    max_depth: int
    config: NavigatorConfig = field(default_factory=NavigatorConfig)
    success_count: int = 0
    failure_count: int = 0
    needs_restart: bool = False

    @classmethod
    def initial(cls, config: NavigatorConfig = NavigatorConfig()) -> "NavigatorState":
        return cls(max_depth=config.initial_depth, config=config)


def split_node(X: np.ndarray, y_norm: np.ndarray, members: np.ndarray, seed,
               classifier_factory: Callable[[], TwoWayClassifier] = default_classifier,
               objective_weight: float = 1.0):
    """Try to bifurcate ``members``.

    Returns ``(left, right, classifier)`` with the higher-mean cluster on the
    left, or None when clustering degenerates or the classifier sends every
    member to one side.
    """
    feats = np.hstack([X[members], objective_weight * y_norm[members, None]])
    labels = kmeans2(feats, seed)
    if labels is None:
        return None
    if y_norm[members][labels == 1].mean() > y_norm[members][labels == 0].mean():
        labels = 1 - labels
    clf = classifier_factory().fit(X[members], labels)
    side = clf.predict(X[members])
    if side.min() == side.max():
        return None
    return members[side == 0], members[side == 1], clf


def build_tree(X, y, state: NavigatorState, seed,
               classifier_factory: Callable[[], TwoWayClassifier] = default_classifier
               ) -> PartitionTree:
    """Breadth-first tree over the dataset, stopping at ``state.max_depth`` layers."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y_norm = minmax(y)
    cfg = state.config
    weight = cfg.objective_weight if cfg.objective_weight is not None else float(X.shape[1])
    root = TreeNode(0, 0, np.arange(X.shape[0]), float(y_norm.mean()) if y_norm.size else 0.0)
    nodes = [root]
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node.depth + 1 >= state.max_depth or node.n_visits < cfg.leaf_size:
            continue
        node_seed = np.random.SeedSequence(seed, spawn_key=(node.id,))
        result = split_node(X, y_norm, node.member_indices, node_seed, classifier_factory,
                            weight)
        if result is None:
            continue
        left_idx, right_idx, clf = result
        node.splitter = clf
        children = []
        for idx in (left_idx, right_idx):
            child = TreeNode(len(nodes), node.depth + 1, idx, float(y_norm[idx].mean()),
                             parent=node.id)
            nodes.append(child)
            children.append(child.id)
            queue.append(child)
        node.children = (children[0], children[1])
    return PartitionTree(nodes, state.max_depth)


def uct_value(v_hat: float, n_parent: int, n_node: int, cp: float) -> float:
    return v_hat + 2.0 * cp * np.sqrt(2.0 * np.log(n_parent) / n_node)


def uct(node: TreeNode, tree: PartitionTree, cp: float) -> float:
    if node.parent is None:
        return node.v_hat
    return uct_value(node.v_hat, tree.nodes[node.parent].n_visits, node.n_visits, cp)


def softmax_scores(ucts, tau: float) -> np.ndarray:
    return softmax(np.asarray(ucts, dtype=float) / tau)


def partition_scores(tree: PartitionTree, cp: float, tau: float) -> dict[int, float]:
    """Temperature softmax of leaf UCT values, keyed by leaf id."""
    leaves = tree.leaves
    scores = softmax_scores([uct(n, tree, cp) for n in leaves], tau)
    return {n.id: float(s) for n, s in zip(leaves, scores)}


def greedy_leaf(tree: PartitionTree, cp: float) -> int:
    """Walk from the root always taking the child with the larger UCT."""
    node = tree.nodes[tree.root]
    while not node.is_leaf:
        left, right = (tree.nodes[i] for i in node.children)
        node = left if uct(left, tree, cp) >= uct(right, tree, cp) else right
    return node.id


def adapt_depth(state: NavigatorState, improved: bool) -> NavigatorState:
    """Shrink the tree after consecutive successes, grow it after failures.

    Growing past ``depth_limit`` sets ``needs_restart`` and resets the depth.
    With ``adaptive`` off the state is returned unchanged.
    """
    cfg = state.config
    if not cfg.adaptive:
        return state
    if improved:
        succ, fail = state.success_count + 1, 0
    else:
        succ, fail = 0, state.failure_count + 1
    if succ >= cfg.success_threshold:
        return shift_depth(replace(state, success_count=0, failure_count=fail), -1)
    if fail >= cfg.failure_threshold:
        return shift_depth(replace(state, success_count=succ, failure_count=0), +1)
    return replace(state, success_count=succ, failure_count=fail)


def shift_depth(state: NavigatorState, delta: int) -> NavigatorState:
    """Move the maximum depth by ``delta``, applying the floor and the restart limit."""
    cfg = state.config
    if not cfg.adaptive or delta == 0:
        return state
    depth = max(1, state.max_depth + delta)
    if depth > cfg.depth_limit:
        return replace(state, max_depth=cfg.restart_depth, needs_restart=True)
    return replace(state, max_depth=depth)
