"""Per-node feature extraction for the policy network."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection

import numpy as np

from .network import SubstrateNetwork

FEATURE_NAMES = ("cpu", "sto", "sl", "avg_dst")


def floyd_warshall(net: SubstrateNetwork) -> np.ndarray:
    """All-pairs hop counts. Unreachable pairs are ``inf`` (float array)."""
    n = net.num_nodes
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u, v in net.endpoints:
        dist[u, v] = dist[v, u] = 1.0
    for k in range(n):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    return dist


def avg_dst(net: SubstrateNetwork, n: int, mapped: Collection[int], dist: np.ndarray) -> float:
    """Sum of hop distances from ``n`` to the already-mapped nodes, over ``len(mapped) + 1``."""
    mapped = list(mapped)
    total = float(sum(dist[n, m] for m in mapped))
    return total / (len(mapped) + 1)


def minmax_rows(raw: np.ndarray) -> np.ndarray:
    """Scale each row into [0, 1]; a constant row becomes 0.5."""
    lo = raw.min(axis=1, keepdims=True)
    span = raw.max(axis=1, keepdims=True) - lo
    flat = span[:, 0] == 0
    span[flat] = 1.0
    out = (raw - lo) / span
    out[flat] = 0.5
    return out


@dataclass
class FeatureMatrix:
    raw: np.ndarray  # shape (4, num_nodes)
    normalized: np.ndarray

    @property
    def shape(self):
        return self.raw.shape

    def column(self, k: int, normalized: bool = True) -> np.ndarray:
        return (self.normalized if normalized else self.raw)[:, k]


def build_feature_matrix(net: SubstrateNetwork, mapped: Collection[int], dist: np.ndarray) -> FeatureMatrix:
    mapped = list(mapped)
    if mapped:
        avg = dist[:, mapped].sum(axis=1) / (len(mapped) + 1)
    else:
        avg = np.zeros(net.num_nodes)
    raw = np.vstack(
        [
            net.residual_cpu_all().astype(float),
            net.residual_sto_all().astype(float),
            net.security_level.astype(float),
            avg,
        ]
    )
    return FeatureMatrix(raw, minmax_rows(raw))
