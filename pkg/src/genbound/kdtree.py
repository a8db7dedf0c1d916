"""Exact k-nearest-neighbor search under the max (Chebyshev) norm.

A static median-split kd-tree plus a brute-force reference path.  Both
return identical results: neighbors ordered by (distance, index), strict
inequality for range counting.  The brute-force path doubles as the oracle
in tests and as the default for small point sets where building a tree
does not pay off.
"""

import heapq

import numpy as np

BRUTE_FORCE_CUTOFF = 256
_LEAF_SIZE = 16


def max_norm_distances(points, query):
    """Chebyshev distances from ``query`` to every row of ``points``."""
    return np.max(np.abs(points - query[None, :]), axis=1)


def brute_force_knn(points, query, k):
    """k nearest rows of ``points`` to ``query``; ties broken by lower index.

    Returns (distances, indices) sorted ascending by (distance, index).
    """
    points = np.asarray(points, dtype=float)
    query = np.asarray(query, dtype=float)
    if k < 1 or k > points.shape[0]:
        raise ValueError(f"k must be in [1, {points.shape[0]}], got {k}")
    d = max_norm_distances(points, query)
    order = np.lexsort((np.arange(len(d)), d))[:k]
    return d[order], order


class KdTree:
    """Immutable kd-tree over an (N, dim) float array, max-norm metric.

    Median count-splits along the widest box side; queries run on explicit
    stacks.  Safe to share across threads once built.
    """

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[0] == 0:
            raise ValueError("points must be a nonempty (N, dim) array")
        self.points = points
        self.n, self.dim = points.shape
        self._left = []
        self._right = []
        self._split_dim = []
        self._lo = []
        self._hi = []
        self._size = []
        self._leaf_idx = []
        self._root = self._build(np.arange(self.n))

    def _new_node(self, idx):
        node = len(self._left)
        pts = self.points[idx]
        self._left.append(-1)
        self._right.append(-1)
        self._split_dim.append(-1)
        self._lo.append(pts.min(axis=0))
        self._hi.append(pts.max(axis=0))
        self._size.append(len(idx))
        self._leaf_idx.append(None)
        return node

    def _build(self, idx):
        node = self._new_node(idx)
        if len(idx) <= _LEAF_SIZE:
            self._leaf_idx[node] = idx
            return node
        spread = self._hi[node] - self._lo[node]
        dim = int(np.argmax(spread))
        half = len(idx) // 2
        part = np.argpartition(self.points[idx, dim], half)
        self._split_dim[node] = dim
        self._left[node] = self._build(idx[part[:half]])
        self._right[node] = self._build(idx[part[half:]])
        return node

    def _box_min_dist(self, node, query):
        gap = np.maximum(self._lo[node] - query, query - self._hi[node])
        return float(np.max(np.maximum(gap, 0.0)))

    def query(self, query, k):
        """k nearest points to ``query``: (distances, indices), ties by index.

        The query point is not excluded; a point at distance 0 is returned.
        """
        query = np.asarray(query, dtype=float)
        if k < 1 or k > self.n:
            raise ValueError(f"k must be in [1, {self.n}], got {k}")
        heap = []  # (-distance, -index): lexicographically worst on top
        stack = [self._root]
        while stack:
            node = stack.pop()
            if len(heap) == k and self._box_min_dist(node, query) > -heap[0][0]:
                continue
            if self._split_dim[node] < 0:
                idx = self._leaf_idx[node]
                dists = np.max(np.abs(self.points[idx] - query[None, :]), axis=1)
                for d, i in zip(dists, idx):
                    item = (-float(d), -int(i))
                    if len(heap) < k:
                        heapq.heappush(heap, item)
                    elif item > heap[0]:
                        heapq.heapreplace(heap, item)
                continue
            left, right = self._left[node], self._right[node]
            # visit the child whose box is nearer first
            if self._box_min_dist(left, query) <= self._box_min_dist(right, query):
                stack.append(right)
                stack.append(left)
            else:
                stack.append(left)
                stack.append(right)
        out = sorted((-nd, -ni) for nd, ni in heap)
        return (np.array([d for d, _ in out]),
                np.array([i for _, i in out], dtype=np.int64))

    def count_within(self, query, radius):
        """Number of points at max-norm distance strictly less than ``radius``."""
        query = np.asarray(query, dtype=float)
        count = 0
        stack = [self._root]
        while stack:
            node = stack.pop()
            if self._box_min_dist(node, query) >= radius:
                continue
            lo, hi = self._lo[node], self._hi[node]
            box_max = float(np.max(np.maximum(np.abs(lo - query), np.abs(hi - query))))
            if box_max < radius:
                count += self._size[node]
                continue
            if self._split_dim[node] < 0:
                idx = self._leaf_idx[node]
                dists = np.max(np.abs(self.points[idx] - query[None, :]), axis=1)
                count += int((dists < radius).sum())
                continue
            stack.append(self._left[node])
            stack.append(self._right[node])
        return count


def knn_search(points, query, k, method="auto"):
    """k nearest neighbors of ``query`` among ``points`` under the max norm.

    method: "kdtree", "brute", or "auto" (brute force up to
    BRUTE_FORCE_CUTOFF points, kd-tree above).  All methods return identical
    (distances, indices) ordered by (distance, index).
    """
    points = np.asarray(points, dtype=float)
    if method == "auto":
        method = "brute" if points.shape[0] <= BRUTE_FORCE_CUTOFF else "kdtree"
    if method == "brute":
        return brute_force_knn(points, query, k)
    if method == "kdtree":
        return KdTree(points).query(query, k)
    raise ValueError(f"unknown method {method!r}")
