"""Independent oracles the tests check the implementation against. These stay
deliberately separate from the library code paths they verify."""

import numpy as np


def mutual_reachability_matrix(X: np.ndarray, k: int) -> np.ndarray:
    """Mutual reachability weights computed the slow, obvious way: full sorted
    distance matrix, k-th neighbor by sorting (not partitioning)."""
    n = len(X)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            D[i, j] = float(np.sqrt(np.sum((X[i] - X[j]) ** 2)))
    cores = np.array([np.sort(D[i])[k] for i in range(n)])
    W = np.maximum(D, np.maximum(cores[:, None], cores[None, :]))
    np.fill_diagonal(W, 0.0)
    return W


def exhaustive_mst_weight(W: np.ndarray) -> float:
    """Minimum total weight over ALL labeled spanning trees, enumerated via
    Pruefer sequences (n^(n-2) trees), decoded for every sequence at once."""
    n = len(W)
    if n == 2:
        return float(W[0, 1])
    m = n ** (n - 2)
    # all Pruefer sequences as an (m, n-2) array
    seqs = np.indices((n,) * (n - 2)).reshape(n - 2, m).T
    deg = np.ones((m, n), dtype=np.int64)
    for c in range(n - 2):
        np.add.at(deg, (np.arange(m), seqs[:, c]), 1)
    weights = np.zeros(m)
    rows = np.arange(m)
    for c in range(n - 2):
        leaf = (deg == 1).argmax(axis=1)     # smallest leaf per sequence
        weights += W[leaf, seqs[:, c]]
        deg[rows, leaf] = 0
        deg[rows, seqs[:, c]] -= 1
    first = (deg == 1).argmax(axis=1)
    deg[rows, first] = 0
    second = (deg == 1).argmax(axis=1)
    weights += W[first, second]
    return float(weights.min())


def normal_equations_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and intercept from the 2x2 normal equations, solved directly."""
    n = len(x)
    a = np.array([[n, float(np.sum(x))],
                  [float(np.sum(x)), float(np.sum(x * x))]])
    b = np.array([float(np.sum(y)), float(np.sum(x * y))])
    intercept, slope = np.linalg.solve(a, b)
    return float(slope), float(intercept)


def best_label_agreement(labels: np.ndarray, gold: np.ndarray) -> float:
    """Fraction of points whose label maps to their gold group under the best
    one-to-one label permutation; noise (-1) always counts as wrong."""
    from itertools import permutations

    label_ids = sorted(set(int(x) for x in labels) - {-1})
    gold_ids = sorted(set(int(x) for x in gold))
    best = 0
    for perm in permutations(gold_ids, min(len(label_ids), len(gold_ids))):
        mapping = dict(zip(label_ids, perm))
        hits = sum(1 for lab, g in zip(labels, gold)
                   if int(lab) != -1 and mapping.get(int(lab)) == int(g))
        best = max(best, hits)
    return best / len(gold)
