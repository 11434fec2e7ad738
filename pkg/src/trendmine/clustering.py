"""Density-based topic clustering built from scratch: core distances, mutual
reachability, a Prim minimum spanning tree over the implicit complete graph,
tree condensation, excess-of-mass cluster extraction, and class-based TF-IDF
cluster labeling.

The MST stage is the O(n^2) memory-light variant: mutual-reachability rows are
computed on the fly instead of materializing the full distance matrix, which
keeps desk-scale corpora (tens of thousands of posts) comfortably in memory.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .textprep import CleanPost

log = logging.getLogger(__name__)

DEFAULT_MIN_CLUSTER_SIZE = 15
DEFAULT_LAMBDA_EPS = 1e-12

Edge = tuple[int, int, float]
CondensedRow = tuple[int, int, float, int]   # (parent, child, lambda, child_size)


@dataclass(frozen=True)
class HdbscanParams:
    min_cluster_size: int = DEFAULT_MIN_CLUSTER_SIZE
    min_samples: int | None = None           # None = min_cluster_size
    metric: str = "euclidean"                # euclidean | cosine
    lambda_eps: float = DEFAULT_LAMBDA_EPS   # zero-distance cap: lambda_max = 1/eps

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise DataError("min_cluster_size must be >= 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise DataError("min_samples must be >= 1")
        if self.metric not in ("euclidean", "cosine"):
            raise DataError(f"unknown metric {self.metric!r}")

    @property
    def effective_min_samples(self) -> int:
        return self.min_samples if self.min_samples is not None else self.min_cluster_size


@dataclass(frozen=True)
class ClusterModel:
    labels: np.ndarray                        # per-point int, -1 = noise
    condensed_tree: tuple[CondensedRow, ...]
    stabilities: dict[int, float]             # condensed cluster id -> stability
    mst_edges: tuple[Edge, ...]

    @property
    def n_points(self) -> int:
        return len(self.labels)

    @property
    def n_clusters(self) -> int:
        return len(set(int(x) for x in self.labels) - {-1})


@dataclass(frozen=True)
class ClusterSummary:
    cluster_id: int
    name: str
    top_terms: tuple[tuple[str, float], ...]  # scores non-increasing
    size: int


def _prepare(vectors: np.ndarray, metric: str) -> np.ndarray:
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("vectors must be a 2-D array")
    if metric == "cosine":
        # cosine as Euclidean on L2-normalized rows: one MST code path
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = np.divide(X, norms, out=X.copy(), where=norms > 0)
    return X


def core_distances(vectors: np.ndarray, k: int, metric: str = "euclidean") -> np.ndarray:
    """Distance from each point to its k-th nearest neighbor, self excluded."""
    X = _prepare(vectors, metric)
    n = len(X)
    if k < 1:
        raise DataError("min_samples must be >= 1")
    if n < k + 1:
        raise DataError(f"core distance needs at least k+1={k + 1} points, got {n}")
    sq = np.einsum("ij,ij->i", X, X)
    cores = np.empty(n, dtype=np.float64)
    block = max(1, min(1024, n))
    for i0 in range(0, n, block):
        d2 = sq[i0:i0 + block, None] + sq[None, :] - 2.0 * (X[i0:i0 + block] @ X.T)
        np.maximum(d2, 0.0, out=d2)
        # with the self-distance zero included, the k-th neighbor sits at
        # sorted position k
        cores[i0:i0 + block] = np.sqrt(np.partition(d2, k, axis=1)[:, k])
    return cores


def mutual_reachability(distance: float, core_i: float, core_j: float) -> float:
    """max(core(i), core(j), d(i, j)); symmetric by construction."""
    return max(distance, core_i, core_j)


def build_mst(vectors: np.ndarray, params: HdbscanParams) -> list[Edge]:
    """Minimum spanning tree of the complete mutual-reachability graph (Prim).

    Ties in the frontier pick the lowest point index, so the edge list is
    deterministic for a given input order.
    """
    X = _prepare(vectors, params.metric)
    n = len(X)
    if n < 2:
        raise DataError("MST needs at least 2 points")
    cores = core_distances(X, params.effective_min_samples)
    sq = np.einsum("ij,ij->i", X, X)

    in_tree = np.zeros(n, dtype=bool)
    best_w = np.full(n, np.inf)
    best_src = np.zeros(n, dtype=np.int64)
    current = 0
    in_tree[0] = True
    edges: list[Edge] = []
    for _ in range(n - 1):
        d2 = sq + sq[current] - 2.0 * (X @ X[current])
        d = np.sqrt(np.maximum(d2, 0.0))
        mr = np.maximum(d, np.maximum(cores, cores[current]))
        improved = ~in_tree & (mr < best_w)
        best_w[improved] = mr[improved]
        best_src[improved] = current
        frontier = np.where(in_tree, np.inf, best_w)
        nxt = int(np.argmin(frontier))
        edges.append((int(best_src[nxt]), nxt, float(frontier[nxt])))
        in_tree[nxt] = True
        current = nxt
    return edges


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int):
        self.parent[self.find(a)] = self.find(b)


def _single_linkage(mst_edges: list[Edge], n: int):
    """Dendrogram from MST edges sorted ascending: per internal node its two
    children (leaf < n, internal >= n), merge distance and leaf count."""
    order = sorted(mst_edges, key=lambda e: (e[2], e[0], e[1]))
    uf = _UnionFind(2 * n - 1)
    node_of: list[int] = list(range(n))     # component root -> dendrogram node
    sizes = [1] * n + [0] * (n - 1)
    left = np.empty(n - 1, dtype=np.int64)
    right = np.empty(n - 1, dtype=np.int64)
    dist = np.empty(n - 1, dtype=np.float64)
    node_of = node_of + [0] * (n - 1)
    for m, (i, j, w) in enumerate(order):
        ri, rj = uf.find(i), uf.find(j)
        ni, nj = node_of[ri], node_of[rj]
        new = n + m
        left[m], right[m], dist[m] = ni, nj, w
        sizes[new] = sizes[ni] + sizes[nj]
        uf.union(ri, rj)
        node_of[uf.find(ri)] = new
    return left, right, dist, sizes


def _leaves(node: int, n: int, left, right) -> list[int]:
    out: list[int] = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur < n:
            out.append(cur)
        else:
            m = cur - n
            stack.append(int(right[m]))
            stack.append(int(left[m]))
    return out


def condense_tree(mst_edges: list[Edge], min_cluster_size: int,
                  lambda_eps: float = DEFAULT_LAMBDA_EPS) -> list[CondensedRow]:
    """Walk the single-linkage hierarchy top-down: at each split, sides smaller
    than min_cluster_size fall out as points at lambda = 1/edge-distance, sides
    at least that large become new condensed clusters. Zero distances are
    capped at lambda_max = 1/lambda_eps so stabilities stay finite."""
    if min_cluster_size < 2:
        raise DataError("min_cluster_size must be >= 2")
    n = len(mst_edges) + 1
    left, right, dist, sizes = _single_linkage(mst_edges, n)

    def lam(d: float) -> float:
        return 1.0 / d if d > lambda_eps else 1.0 / lambda_eps

    rows: list[CondensedRow] = []
    root_cluster = n
    next_cluster = n + 1
    # stack of (dendrogram node, condensed cluster the node lives in)
    stack: list[tuple[int, int]] = [(2 * n - 2, root_cluster)]
    while stack:
        node, cluster = stack.pop()
        m = node - n
        value = lam(float(dist[m]))
        sides = [int(left[m]), int(right[m])]
        counts = [sizes[s] for s in sides]
        if all(c >= min_cluster_size for c in counts):
            for side, count in zip(sides, counts):
                rows.append((cluster, next_cluster, value, count))
                stack.append((side, next_cluster))
                next_cluster += 1
        elif all(c < min_cluster_size for c in counts):
            for side in sides:
                for p in _leaves(side, n, left, right):
                    rows.append((cluster, p, value, 1))
        else:
            big, small = (sides[0], sides[1]) if counts[0] >= counts[1] else (sides[1], sides[0])
            for p in _leaves(small, n, left, right):
                rows.append((cluster, p, value, 1))
            stack.append((big, cluster))
    return rows


def extract_clusters(condensed_tree: list[CondensedRow]) -> tuple[np.ndarray, dict[int, float]]:
    """Excess-of-mass cluster selection.

    stability(C) = sum over exits from C of (lambda - lambda_birth(C)) * size.
    Bottom-up, children replace their parent when their combined stability
    exceeds it; a selected cluster claims every point in its condensed subtree
    that exits strictly above the cluster's birth lambda. Everything else is
    noise (-1).
    """
    if not condensed_tree:
        raise DataError("condensed tree is empty")
    root = min(parent for parent, _, _, _ in condensed_tree)
    n = root

    births: dict[int, float] = {}
    children_of: dict[int, list[int]] = {}
    point_rows: dict[int, list[tuple[int, float]]] = {}
    stability: dict[int, float] = {}
    for parent, child, value, size in condensed_tree:
        if child >= n:
            births[child] = value
            children_of.setdefault(parent, []).append(child)
        else:
            point_rows.setdefault(parent, []).append((child, value))
        stability.setdefault(parent, 0.0)
    births[root] = min(value for parent, _, value, _ in condensed_tree if parent == root)

    for parent, child, value, size in condensed_tree:
        stability[parent] += (value - births[parent]) * size

    clusters = sorted(stability)
    subtree_stability: dict[int, float] = {}
    selected: dict[int, bool] = {}
    for c in reversed(clusters):
        child_sum = sum(subtree_stability[ch] for ch in children_of.get(c, []))
        if children_of.get(c) and child_sum > stability[c]:
            selected[c] = False
            subtree_stability[c] = child_sum
        else:
            selected[c] = True
            subtree_stability[c] = stability[c]

    ancestor_selected: dict[int, bool] = {root: False}
    parent_of = {child: parent for parent, child, _, _ in condensed_tree if child >= n}
    final: list[int] = []
    for c in clusters:
        if c != root:
            ancestor_selected[c] = ancestor_selected[parent_of[c]] or selected[parent_of[c]]
        if selected[c] and not ancestor_selected[c]:
            final.append(c)

    labels = np.full(n, -1, dtype=np.int64)
    for label, cluster in enumerate(sorted(final)):
        birth = births[cluster]
        stack = [cluster]
        while stack:
            c = stack.pop()
            for point, value in point_rows.get(c, []):
                if value > birth:
                    labels[point] = label
            stack.extend(children_of.get(c, []))
    return labels, stability


def run_hdbscan(vectors: np.ndarray, params: HdbscanParams) -> ClusterModel:
    """Full clustering pass: MST, condensation, extraction."""
    edges = build_mst(vectors, params)
    tree = condense_tree(edges, params.min_cluster_size, params.lambda_eps)
    labels, stabilities = extract_clusters(tree)
    model = ClusterModel(labels=labels, condensed_tree=tuple(tree),
                         stabilities=stabilities, mst_edges=tuple(edges))
    log.info("clustered %d points into %d clusters (%d noise)",
             model.n_points, model.n_clusters, int(np.sum(labels == -1)))
    return model


def label_clusters(posts: list[CleanPost], labels: np.ndarray, k: int = 10) -> list[ClusterSummary]:
    """Class-based TF-IDF labels: score(t, c) = tf(t, c) * ln(1 + A / tf_all(t)),
    with A the average total term count per cluster. Ties rank lexicographically."""
    if len(posts) != len(labels):
        raise DataError("posts and labels must align")
    per_cluster: dict[int, Counter] = {}
    for post, lab in zip(posts, labels):
        lab = int(lab)
        if lab == -1:
            continue
        bag = per_cluster.setdefault(lab, Counter())
        bag.update(post.tokens)
        bag.update(post.ngrams)
    if not per_cluster:
        return []
    tf_all: Counter = Counter()
    for bag in per_cluster.values():
        tf_all.update(bag)
    avg_count = sum(tf_all.values()) / len(per_cluster)

    summaries: list[ClusterSummary] = []
    sizes = Counter(int(x) for x in labels if int(x) != -1)
    for cluster_id in sorted(per_cluster):
        bag = per_cluster[cluster_id]
        scored = [(term, count * math.log(1.0 + avg_count / tf_all[term]))
                  for term, count in bag.items()]
        scored.sort(key=lambda ts: (-ts[1], ts[0]))
        top = tuple(scored[:k])
        summaries.append(ClusterSummary(
            cluster_id=cluster_id,
            name=top[0][0] if top else "",
            top_terms=top,
            size=sizes[cluster_id],
        ))
    return summaries


def cluster_model_to_dict(model: ClusterModel, summaries: list[ClusterSummary] | None = None) -> dict:
    doc = {
        "labels": [int(x) for x in model.labels],
        "condensed_tree": [[int(p), int(c), float(v), int(s)]
                           for p, c, v, s in model.condensed_tree],
        "stabilities": {str(c): float(s) for c, s in sorted(model.stabilities.items())},
        "mst_edges": [[int(i), int(j), float(w)] for i, j, w in model.mst_edges],
    }
    if summaries is not None:
        doc["summaries"] = [{
            "cluster_id": s.cluster_id,
            "name": s.name,
            "size": s.size,
            "top_terms": [[t, float(v)] for t, v in s.top_terms],
        } for s in summaries]
    return doc


def cluster_model_from_dict(doc: dict) -> ClusterModel:
    return ClusterModel(
        labels=np.asarray(doc["labels"], dtype=np.int64),
        condensed_tree=tuple((int(p), int(c), float(v), int(s))
                             for p, c, v, s in doc["condensed_tree"]),
        stabilities={int(c): float(s) for c, s in doc["stabilities"].items()},
        mst_edges=tuple((int(i), int(j), float(w)) for i, j, w in doc["mst_edges"]),
    )
