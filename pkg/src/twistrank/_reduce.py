"""Deterministic pairwise-tree summation.

Chunked kernels produce partial results in a fixed chunk order; combining
them with a balanced pairwise tree makes every reduction bit-identical
regardless of how many worker threads produced the chunks.
"""

from __future__ import annotations

import numpy as np


def tree_sum(values) -> float:
    """Sum a 1-d array of floats with a fixed pairwise reduction tree."""
    x = np.asarray(values, dtype=np.float64).ravel().copy()
    n = x.size
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        x[:half] += x[n - half: n]
        # odd element (index half of the new prefix) rides along untouched
        n = n - half
    return float(x[0])


def tree_sum_arrays(chunks) -> np.ndarray:
    """Elementwise pairwise-tree sum of a list of equal-length arrays."""
    items = [np.asarray(c, dtype=np.float64) for c in chunks]
    if not items:
        raise ValueError("no chunks to reduce")
    while len(items) > 1:
        merged = []
        for i in range(0, len(items) - 1, 2):
            merged.append(items[i] + items[i + 1])
        if len(items) % 2:
            merged.append(items[-1])
        items = merged
    return items[0]
