"""Hierarchical density-based clustering with outlier labeling.

The pipeline: core distances -> minimum spanning tree over the mutual
reachability graph (Prim, O(n^2), distances computed on the fly) -> single
linkage hierarchy -> condensed tree (children below the minimum cluster size
fall out as points) -> stability-based cluster extraction by excess of mass.

Everything is deterministic for a fixed input order: equal-weight edges are
broken lexicographically on (weight, smaller point index, larger point
index), and final labels are numbered by first member appearance in input
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist


class TooFewPointsError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterParams:
    min_cluster_size: int = 24
    min_samples: int | None = None  # defaults to min_cluster_size

    def __post_init__(self) -> None:
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")

    def resolved_min_samples(self) -> int:
        return self.min_samples if self.min_samples is not None else self.min_cluster_size


@dataclass
class Clustering:
    """Labels aligned with input order; -1 marks outliers, clusters are 0..K-1."""

    labels: np.ndarray
    cluster_count: int
    outlier_count: int

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "Clustering":
        labels = np.asarray(labels, dtype=np.int64)
        distinct = np.unique(labels[labels >= 0])
        return cls(
            labels=labels,
            cluster_count=len(distinct),
            outlier_count=int(np.sum(labels == -1)),
        )


@dataclass
class CondensedTree:
    """Condensed hierarchy rows (parent, child, lambda, child size).

    Point ids are 0..n-1; cluster node ids start at n with the root being
    exactly n. lambda = 1/distance at the split where the child detaches,
    so lambdas never decrease walking from the root toward the leaves.
    """

    parents: np.ndarray
    children: np.ndarray
    lambdas: np.ndarray
    sizes: np.ndarray
    n_points: int
    stabilities: dict[int, float] = field(default_factory=dict)

    @property
    def root(self) -> int:
        return self.n_points

    def cluster_ids(self) -> list[int]:
        ids = {self.root}
        ids.update(int(c) for c in self.children[self.children >= self.n_points])
        return sorted(ids)


def _as_matrix(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        X = points
    elif len(points) > 0 and hasattr(points[0], "values"):
        X = np.stack([p.values for p in points])
    else:
        X = np.asarray(points, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d point array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points must be finite")
    return X


def core_distances(points, k: int) -> np.ndarray:
    """Distance from each point to its k-th nearest neighbor, self-inclusive.

    k = 1 therefore gives zero for every point, and duplicated points have
    zero core distance whenever their multiplicity reaches k.
    """
    X = _as_matrix(points)
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise TooFewPointsError(f"k={k} exceeds the number of points ({n})")
    core = np.empty(n, dtype=np.float64)
    # Chunk the distance matrix to keep memory bounded on large corpora.
    chunk = max(1, (1 << 23) // n)
    for start in range(0, n, chunk):
        block = cdist(X[start:start + chunk], X)
        core[start:start + chunk] = np.partition(block, k - 1, axis=1)[:, k - 1]
    return core


def mutual_reachability(a, b, core_a: float, core_b: float) -> float:
    """max(core(a), core(b), d(a, b)) for two distinct points."""
    d = float(np.linalg.norm(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)))
    return max(d, core_a, core_b)


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


# Up to this many points the full distance matrix is materialized once
# (n^2 doubles), which makes Prim's inner loop a plain row lookup.
_DENSE_LIMIT = 6000


def _dense_distances(X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    D = np.empty((n, n), dtype=np.float64)
    chunk = max(1, (1 << 23) // n)
    for start in range(0, n, chunk):
        D[start:start + chunk] = cdist(X[start:start + chunk], X)
    return D


def _mst_prim(X: np.ndarray, core: np.ndarray, D: np.ndarray | None = None) -> np.ndarray:
    """MST of the complete mutual-reachability graph; edges as (a, b, weight).

    Ties on weight are resolved toward the lexicographically smallest
    (smaller index, larger index) pair, both when retaining candidate edges
    and when choosing the next vertex, which pins down one specific tree.
    """
    n = X.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    edges = np.empty((n - 1, 3), dtype=np.float64)

    current = 0
    in_tree[0] = True
    for step in range(n - 1):
        if D is not None:
            d = D[current]
        else:
            delta = X - X[current]
            d = np.sqrt(np.einsum("ij,ij->i", delta, delta))
        cand = np.maximum(d, np.maximum(core, core[current]))
        cand[in_tree] = np.inf

        better = cand < dist
        if better.any():
            dist[better] = cand[better]
            parent[better] = current
        ties = np.nonzero((cand == dist) & ~better & ~in_tree & np.isfinite(dist))[0]
        for v in ties:
            if _edge_key(current, int(v)) < _edge_key(int(parent[v]), int(v)):
                parent[v] = current

        m = dist.min()
        choices = np.nonzero(dist == m)[0]
        if len(choices) == 1:
            j = int(choices[0])
        else:
            j = min((int(v) for v in choices), key=lambda v: _edge_key(int(parent[v]), v))
        edges[step] = (parent[j], j, dist[j])
        in_tree[j] = True
        dist[j] = np.inf
        current = j
    return edges


def _single_linkage(edges: np.ndarray, n: int):
    """Merge MST edges in ascending weight into a dendrogram.

    Internal nodes are numbered n..2n-2 in merge order; returns per-internal
    arrays (left child, right child, merge height, subtree size).
    """
    a = np.minimum(edges[:, 0], edges[:, 1]).astype(np.int64)
    b = np.maximum(edges[:, 0], edges[:, 1]).astype(np.int64)
    w = edges[:, 2]
    order = np.lexsort((b, a, w))

    uf_parent = np.arange(2 * n - 1, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while uf_parent[root] != root:
            root = uf_parent[root]
        while uf_parent[x] != root:
            uf_parent[x], x = root, uf_parent[x]
        return root

    node_of = np.arange(2 * n - 1, dtype=np.int64)  # component root -> dendrogram node
    sizes_all = np.ones(2 * n - 1, dtype=np.int64)
    left = np.empty(n - 1, dtype=np.int64)
    right = np.empty(n - 1, dtype=np.int64)
    height = np.empty(n - 1, dtype=np.float64)
    size = np.empty(n - 1, dtype=np.int64)

    for i, e in enumerate(order):
        ra, rb = find(int(a[e])), find(int(b[e]))
        node = n + i
        left[i] = node_of[ra]
        right[i] = node_of[rb]
        height[i] = w[e]
        size[i] = sizes_all[node_of[ra]] + sizes_all[node_of[rb]]
        sizes_all[node] = size[i]
        uf_parent[ra] = node
        uf_parent[rb] = node
        node_of[node] = node
    return left, right, height, size


def _subtree_points(node: int, left: np.ndarray, right: np.ndarray, n: int) -> list[int]:
    points = []
    stack = [node]
    while stack:
        x = stack.pop()
        if x < n:
            points.append(x)
        else:
            stack.append(int(left[x - n]))
            stack.append(int(right[x - n]))
    return points


def _condense(left, right, height, size, n: int, min_cluster_size: int) -> CondensedTree:
    rows_parent: list[int] = []
    rows_child: list[int] = []
    rows_lambda: list[float] = []
    rows_size: list[int] = []

    def emit(parent: int, child: int, lam: float, child_size: int) -> None:
        rows_parent.append(parent)
        rows_child.append(child)
        rows_lambda.append(lam)
        rows_size.append(child_size)

    def node_size(x: int) -> int:
        return 1 if x < n else int(size[x - n])

    root_sl = 2 * n - 2
    next_cluster = n + 1
    stack = [(root_sl, n)]
    while stack:
        sl_node, cluster = stack.pop()
        node = sl_node
        # Follow the cluster downward while it only sheds sub-minimum children.
        while True:
            l, r = int(left[node - n]), int(right[node - n])
            h = float(height[node - n])
            lam = (1.0 / h) if h > 0.0 else np.inf
            size_l, size_r = node_size(l), node_size(r)
            if size_l >= min_cluster_size and size_r >= min_cluster_size:
                for child, child_size in ((l, size_l), (r, size_r)):
                    emit(cluster, next_cluster, lam, child_size)
                    stack.append((child, next_cluster))
                    next_cluster += 1
                break
            if size_l < min_cluster_size and size_r < min_cluster_size:
                for child in (l, r):
                    for p in _subtree_points(child, left, right, n):
                        emit(cluster, p, lam, 1)
                break
            big, small = (l, r) if size_l >= min_cluster_size else (r, l)
            for p in _subtree_points(small, left, right, n):
                emit(cluster, p, lam, 1)
            node = big  # the surviving child continues as the same cluster

    tree = CondensedTree(
        parents=np.asarray(rows_parent, dtype=np.int64),
        children=np.asarray(rows_child, dtype=np.int64),
        lambdas=np.asarray(rows_lambda, dtype=np.float64),
        sizes=np.asarray(rows_size, dtype=np.int64),
        n_points=n,
    )
    tree.stabilities = _stabilities(tree)
    return tree


def _stabilities(tree: CondensedTree) -> dict[int, float]:
    """stability(C) = sum over members p of (lambda_p - lambda_birth(C)).

    Points leaving at the birth level contribute zero. The root is born at
    lambda 0 (infinite distance). Splits at zero distance produce infinite
    lambdas; a cluster both born and emptied at zero distance (coincident
    duplicates) contributes nothing rather than NaN.
    """
    birth: dict[int, float] = {tree.root: 0.0}
    for parent, child, lam in zip(tree.parents, tree.children, tree.lambdas):
        if child >= tree.n_points:
            birth[int(child)] = float(lam)
    stability = {c: 0.0 for c in birth}
    for parent, lam, size in zip(tree.parents, tree.lambdas, tree.sizes):
        b = birth[int(parent)]
        if np.isinf(lam) and np.isinf(b):
            continue
        stability[int(parent)] += float(size) * (float(lam) - b)
    return stability


def _cluster_children(tree: CondensedTree) -> dict[int, list[int]]:
    children: dict[int, list[int]] = {}
    for parent, child in zip(tree.parents, tree.children):
        if child >= tree.n_points:
            children.setdefault(int(parent), []).append(int(child))
    return children


def extract_eom(tree: CondensedTree) -> list[int]:
    """Excess-of-mass cluster selection.

    Bottom-up, a node is preferred over its subtree when its stability
    strictly exceeds the sum of its children's best stabilities; the final
    selection is the top-down antichain of preferred nodes. The root is never
    selectable, so structureless data yields no clusters at all.
    """
    children = _cluster_children(tree)
    preferred: dict[int, bool] = {}
    best: dict[int, float] = {}
    for c in sorted(tree.cluster_ids(), reverse=True):
        child_sum = sum(best[k] for k in children.get(c, ()))
        if c == tree.root:
            preferred[c] = False
            best[c] = child_sum
        elif tree.stabilities[c] > child_sum:
            preferred[c] = True
            best[c] = tree.stabilities[c]
        else:
            preferred[c] = False
            best[c] = child_sum
    selected: list[int] = []
    stack = [tree.root]
    while stack:
        node = stack.pop()
        for kid in children.get(node, ()):
            if preferred[kid]:
                selected.append(kid)
            else:
                stack.append(kid)
    return sorted(selected)


def _assign_labels(tree: CondensedTree, selected: list[int], n: int) -> np.ndarray:
    children = _cluster_children(tree)
    owner: dict[int, int] = {}
    for s in selected:
        stack = [s]
        while stack:
            node = stack.pop()
            owner[node] = s
            stack.extend(children.get(node, ()))

    point_owner = np.full(n, -1, dtype=np.int64)
    for parent, child in zip(tree.parents, tree.children):
        if child < n:
            point_owner[int(child)] = owner.get(int(parent), -1)

    labels = np.full(n, -1, dtype=np.int64)
    relabel: dict[int, int] = {}
    for i in range(n):
        o = int(point_owner[i])
        if o == -1:
            continue
        if o not in relabel:
            relabel[o] = len(relabel)
        labels[i] = relabel[o]
    return labels


def cluster(points, params: ClusterParams = ClusterParams()) -> tuple[Clustering, CondensedTree]:
    """Cluster points, labeling low-density points as outliers (-1).

    Deterministic: identical input produces identical output, and labels are
    numbered by first member appearance in input order.
    """
    X = _as_matrix(points)
    n = X.shape[0]
    if n < params.min_cluster_size:
        raise TooFewPointsError(
            f"need at least min_cluster_size={params.min_cluster_size} points, got {n}"
        )
    k = params.resolved_min_samples()
    if k > n:
        raise TooFewPointsError(f"min_samples={k} exceeds the number of points ({n})")

    if n <= _DENSE_LIMIT:
        D = _dense_distances(X)
        core = np.partition(D, k - 1, axis=1)[:, k - 1]
    else:
        D = None
        core = core_distances(X, k)
    edges = _mst_prim(X, core, D)
    left, right, height, size = _single_linkage(edges, n)
    tree = _condense(left, right, height, size, n, params.min_cluster_size)
    selected = extract_eom(tree)
    labels = _assign_labels(tree, selected, n)
    return Clustering.from_labels(labels), tree


def mst_total_weight(points, k: int) -> float:
    """Total weight of the mutual-reachability MST; exposed for verification."""
    X = _as_matrix(points)
    core = core_distances(X, k)
    edges = _mst_prim(X, core)
    return float(edges[:, 2].sum())


# ---------------------------------------------------------------------------
# Exports

def write_clustering(
    path: str | Path,
    paragraph_ids: list[str],
    clustering: Clustering,
    params: ClusterParams,
) -> None:
    if len(paragraph_ids) != len(clustering.labels):
        raise ValueError("paragraph ids and labels differ in length")
    with open(path, "w", encoding="utf-8") as f:
        f.write(
            "# min_cluster_size={} min_samples={} clusters={} outliers={}\n".format(
                params.min_cluster_size,
                params.resolved_min_samples(),
                clustering.cluster_count,
                clustering.outlier_count,
            )
        )
        f.write("paragraph_id\tlabel\n")
        for pid, label in zip(paragraph_ids, clustering.labels):
            f.write(f"{pid}\t{int(label)}\n")


def read_clustering(path: str | Path) -> tuple[list[str], Clustering]:
    ids: list[str] = []
    labels: list[int] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#") or line.startswith("paragraph_id\t"):
                continue
            pid, _, label = line.partition("\t")
            ids.append(pid)
            labels.append(int(label))
    return ids, Clustering.from_labels(np.asarray(labels, dtype=np.int64))


def write_condensed_tree(path: str | Path, tree: CondensedTree) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("parent\tchild\tlambda\tsize\n")
        for parent, child, lam, size in zip(
            tree.parents, tree.children, tree.lambdas, tree.sizes
        ):
            f.write(f"{int(parent)}\t{int(child)}\t{float(lam)!r}\t{int(size)}\n")
