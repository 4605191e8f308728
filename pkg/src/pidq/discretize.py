"""Turn raw per-modality features into a discrete joint distribution.

Each modality is discretized on its own, either by fixed-width histogram
bins or by k-means clustering, and the codes are counted against the label.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .dist import Cardinalities, JointDist
from .errors import ArgumentError, ValidationError

MAX_AUTO_BINS = 100


@dataclass(frozen=True)
class SampleTable:
    """Paired samples: features for each modality and an integer label."""

    x1: np.ndarray
    x2: np.ndarray
    y: np.ndarray
    ny: int | None = None

    def __post_init__(self):
        x1 = _as_rows(self.x1, "x1")
        x2 = _as_rows(self.x2, "x2")
        y = np.asarray(self.y)
        if y.ndim != 1:
            raise ValidationError("y must be one-dimensional")
        if not (len(x1) == len(x2) == len(y)):
            raise ValidationError(f"row counts differ: x1={len(x1)}, x2={len(x2)}, y={len(y)}")
        if len(y) < 1:
            raise ValidationError("sample table is empty")
        if y.dtype.kind == "f":
            if not np.all(np.isfinite(y)):
                raise ValidationError(f"label is missing or not finite at row {int(np.argmax(~np.isfinite(y)))}")
            if np.any(y != np.round(y)):
                raise ValidationError(f"label is not an integer at row {int(np.argmax(y != np.round(y)))}")
        y = y.astype(np.int64)
        if np.any(y < 0):
            raise ValidationError(f"negative label at row {int(np.argmax(y < 0))}")
        ny = int(y.max()) + 1 if self.ny is None else int(self.ny)
        if np.any(y >= ny):
            raise ValidationError(f"label {int(y.max())} out of range for ny={ny}")
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ny", ny)

    @property
    def n(self) -> int:
        return len(self.y)


def _as_rows(x, name) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValidationError(f"{name} must be a vector or an n x d matrix")
    if not np.all(np.isfinite(x)):
        row = int(np.argwhere(~np.isfinite(x))[0, 0])
        raise ValidationError(f"{name} has a missing or non-finite value at row {row}")
    return x


@dataclass(frozen=True)
class DiscretizeConfig:
    method: str = "histogram"
    bins_or_k: Union[str, int] = "auto"
    seed: int = 0
    kmeans_max_iters: int = 100
    kmeans_restarts: int = 5

    def __post_init__(self):
        if self.method not in ("histogram", "kmeans"):
            raise ArgumentError(f"method must be 'histogram' or 'kmeans', got {self.method!r}")
        if self.bins_or_k != "auto":
            if isinstance(self.bins_or_k, bool) or not isinstance(self.bins_or_k, (int, np.integer)):
                raise ArgumentError(f"bins_or_k must be 'auto' or an integer, got {self.bins_or_k!r}")
            if self.bins_or_k < 2:
                raise ArgumentError("a fixed bin or cluster count must be at least 2")
        if self.kmeans_max_iters < 1 or self.kmeans_restarts < 1:
            raise ArgumentError("kmeans_max_iters and kmeans_restarts must be positive")


def auto_bin_count(n: int) -> int:
    """Smallest k with k**3 >= n, clamped to [2, 100]."""
    k = max(1, round(n ** (1.0 / 3.0)))
    while k**3 < n:
        k += 1
    while k > 1 and (k - 1) ** 3 >= n:
        k -= 1
    return int(min(max(k, 2), MAX_AUTO_BINS))


def _resolve_count(config: DiscretizeConfig, n: int) -> int:
    return auto_bin_count(n) if config.bins_or_k == "auto" else int(config.bins_or_k)


def bin_scalar_features(values, config: DiscretizeConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-width bins between the sample min and max.

    The outermost bins are open-ended, so the returned ``edges`` start at
    ``-inf`` and end at ``+inf``. A value on an interior edge goes to the
    upper bin.

    Returns
    -------
    codes : ndarray of int, shape (n,)
    edges : ndarray, shape (bins + 1,)
    """
    config = config or DiscretizeConfig()
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 1:
        raise ValidationError("cannot bin an empty vector")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"non-finite value at row {int(np.argmax(~np.isfinite(v)))}")
    lo, hi = v.min(), v.max()
    if lo == hi:
        warnings.warn("all values identical; modality collapses to a single bin", RuntimeWarning, stacklevel=2)
        return np.zeros(v.size, dtype=np.int64), np.array([-np.inf, np.inf])
    bins = _resolve_count(config, v.size)
    edges = np.linspace(lo, hi, bins + 1)
    edges[0], edges[-1] = -np.inf, np.inf
    codes = np.searchsorted(edges[1:-1], v, side="right")
    return codes.astype(np.int64), edges


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    history: list[float] = field(default_factory=list)


def _kmeans_pp(x, k, rng) -> np.ndarray:
    n = len(x)
    centers = [int(rng.integers(n))]
    d2 = ((x - x[centers[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            free = np.setdiff1d(np.arange(n), centers)
            idx = int(rng.choice(free))
        centers.append(idx)
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(1))
    return x[centers].copy()


def _lloyd(x, centroids, max_iters) -> KMeansResult:
    k = len(centroids)
    history = []
    labels = None
    for _ in range(max_iters):
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(2)
        new_labels = d2.argmin(1)
        cost = d2[np.arange(len(x)), new_labels]
        counts = np.bincount(new_labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            # empty cluster: move it onto the point currently paying the most
            far = int(np.argmax(cost))
            centroids[j] = x[far]
            new_labels[far] = j
            cost[far] = 0.0
            counts = np.bincount(new_labels, minlength=k)
        history.append(float(cost.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centroids[j] = x[labels == j].mean(0)
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(2)
    inertia = float(d2[np.arange(len(x)), labels].sum())
    return KMeansResult(labels.astype(np.int64), centroids, inertia, history)


def kmeans_discretize(rows, k: int, seed: int = 0, config: DiscretizeConfig | None = None) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding; best of several restarts.

    Deterministic for a given ``seed``. An empty cluster is re-seeded at the
    point farthest from its centroid.
    """
    config = config or DiscretizeConfig(method="kmeans")
    x = _as_rows(rows, "rows")
    if not 1 <= k <= len(x):
        raise ArgumentError(f"k={k} must lie in [1, n={len(x)}]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(config.kmeans_restarts):
        res = _lloyd(x, _kmeans_pp(x, k, rng), config.kmeans_max_iters)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def discretize_modality(x, config: DiscretizeConfig | None = None) -> tuple[np.ndarray, dict]:
    """Codes in ``[0, card)`` for one modality, plus metadata for the sidecar.

    Multi-dimensional histogram features are binned per dimension and the
    occupied bin tuples are numbered in lexicographic order.
    """
    config = config or DiscretizeConfig()
    x = _as_rows(x, "features")
    if config.method == "kmeans":
        k = min(_resolve_count(config, len(x)), len(x))
        res = kmeans_discretize(x, k, config.seed, config)
        return res.labels, {"method": "kmeans", "k": k, "centroids": res.centroids.tolist(), "inertia": res.inertia}
    per_dim = [bin_scalar_features(x[:, j], config) for j in range(x.shape[1])]
    # open outer edges are stored as None so the metadata stays strict JSON
    edges = [[None] + e[1:-1].tolist() + [None] for _, e in per_dim]
    if x.shape[1] == 1:
        codes = per_dim[0][0]
        return codes, {"method": "histogram", "bins": len(edges[0]) - 1, "edges": edges}
    stacked = np.stack([c for c, _ in per_dim], axis=1)
    cells, codes = np.unique(stacked, axis=0, return_inverse=True)
    return codes.ravel().astype(np.int64), {
        "method": "histogram",
        "bins": [len(e) - 1 for e in edges],
        "edges": edges,
        "cells": cells.tolist(),
    }


def empirical_joint(x1_codes, x2_codes, y, card: Cardinalities | None = None) -> JointDist:
    """Relative frequencies of (x1, x2, y) code triples."""
    cols = [np.asarray(c) for c in (x1_codes, x2_codes, y)]
    n = len(cols[0])
    if any(len(c) != n for c in cols) or n == 0:
        raise ValidationError("code columns must be non-empty and of equal length")
    if card is None:
        card = Cardinalities(*(int(c.max()) + 1 for c in cols))
    for name, c, size in zip(("x1", "x2", "y"), cols, card.shape):
        bad = (c < 0) | (c >= size) | (c != np.round(c))
        if bad.any():
            row = int(np.argmax(bad))
            raise ValidationError(f"{name} code {c[row]!r} at row {row} is outside [0, {size})")
    flat = np.ravel_multi_index(tuple(c.astype(np.int64) for c in cols), card.shape)
    counts = np.bincount(flat, minlength=card.cells).reshape(card.shape)
    return JointDist(card, counts / n)


def discretize_table(table: SampleTable, config: DiscretizeConfig | None = None) -> tuple[JointDist, dict]:
    """Discretize both modalities and return the empirical joint with metadata.

    Empty bins are dropped: codes are renumbered over the occupied bins and
    ``metadata[mod]["occupied"]`` maps each final code back to its bin.
    """
    config = config or DiscretizeConfig()
    codes, meta = [], {}
    for name, x in (("x1", table.x1), ("x2", table.x2)):
        raw, info = discretize_modality(x, config)
        occupied, compact = np.unique(raw, return_inverse=True)
        info["occupied"] = occupied.tolist()
        codes.append(compact.ravel())
        meta[name] = info
    card = Cardinalities(len(meta["x1"]["occupied"]), len(meta["x2"]["occupied"]), table.ny)
    joint = empirical_joint(codes[0], codes[1], table.y, card)
    meta.update(n=table.n, seed=config.seed)
    return joint, meta
