"""Finite joint distributions over (X1, X2, Y) and information measures.

All quantities are in bits. Tensors are dense and indexed ``[x1, x2, y]``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import ArgumentError, ValidationError

NORM_TOL = 1e-9
CONSISTENCY_TOL = 1e-6
DEFAULT_MAX_CELLS = 10**7

VARIABLES = ("x1", "x2", "y")
_AXIS = {name: i for i, name in enumerate(VARIABLES)}


def max_cells() -> int:
    """Cell cap for dense tensors, overridable through ``PIDQ_MAX_CELLS``."""
    raw = os.environ.get("PIDQ_MAX_CELLS")
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"PIDQ_MAX_CELLS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValidationError("PIDQ_MAX_CELLS must be positive")
    return value


@dataclass(frozen=True)
class Cardinalities:
    n1: int
    n2: int
    ny: int

    def __post_init__(self):
        for name in ("n1", "n2", "ny"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"cardinality {name} must be a positive integer, got {v!r}")
        cap = max_cells()
        if self.cells > cap:
            raise ValidationError(f"{self.cells} cells exceeds the cap of {cap}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.ny)

    @property
    def cells(self) -> int:
        return self.n1 * self.n2 * self.ny


def _check_distribution(arr: np.ndarray, what: str = "distribution") -> None:
    if not np.all(np.isfinite(arr)):
        idx = np.argwhere(~np.isfinite(arr))[0]
        raise ValidationError(f"{what} has a non-finite entry at index {tuple(int(i) for i in idx)}")
    if np.any(arr < 0):
        idx = np.argwhere(arr < 0)[0]
        raise ValidationError(
            f"{what} has a negative entry {arr[tuple(idx)]!r} at index {tuple(int(i) for i in idx)}"
        )
    total = arr.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValidationError(f"{what} sums to {total!r}, expected 1 within {NORM_TOL}")


@dataclass(frozen=True)
class JointDist:
    """Normalized probability tensor over (X1, X2, Y).

    Parameters
    ----------
    card : Cardinalities
    probs : ndarray, shape (n1, n2, ny)
        Non-negative masses summing to one. Stored as a read-only copy.
    """

    card: Cardinalities
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.shape != self.card.shape:
            raise ValidationError(f"probs has shape {probs.shape}, expected {self.card.shape}")
        _check_distribution(probs, "joint distribution")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_array(cls, probs) -> "JointDist":
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 3:
            raise ValidationError(f"expected a 3-d tensor indexed [x1, x2, y], got ndim={probs.ndim}")
        return cls(Cardinalities(*probs.shape), probs)

    @classmethod
    def from_table(cls, rows, shape=None, normalize: bool = False) -> "JointDist":
        """Build from ``(x1, x2, y, p)`` rows; unlisted cells are zero."""
        rows = list(rows)
        if shape is None:
            shape = tuple(max(int(r[k]) for r in rows) + 1 for k in range(3))
        probs = np.zeros(shape)
        for a, b, c, p in rows:
            probs[int(a), int(b), int(c)] += p
        if normalize:
            probs = probs / probs.sum()
        return cls.from_array(probs)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.card.shape

    def swap_modalities(self) -> "JointDist":
        """Exchange the X1 and X2 axes."""
        return JointDist.from_array(self.probs.transpose(1, 0, 2))


@dataclass(frozen=True)
class PairwiseMarginals:
    """Observable marginals p(x1,y), p(x2,y) and optionally p(x1,x2)."""

    m1y: np.ndarray
    m2y: np.ndarray
    m12: np.ndarray | None = None

    def __post_init__(self):
        m1y = np.array(self.m1y, dtype=float)
        m2y = np.array(self.m2y, dtype=float)
        if m1y.ndim != 2 or m2y.ndim != 2:
            raise ValidationError("m1y and m2y must be matrices")
        _check_distribution(m1y, "m1y")
        _check_distribution(m2y, "m2y")
        if m1y.shape[1] != m2y.shape[1]:
            raise ValidationError(f"label dimension mismatch: m1y has {m1y.shape[1]}, m2y has {m2y.shape[1]}")
        py1, py2 = m1y.sum(0), m2y.sum(0)
        if np.max(np.abs(py1 - py2)) > CONSISTENCY_TOL:
            j = int(np.argmax(np.abs(py1 - py2)))
            raise ValidationError(f"p(y) disagrees between m1y and m2y at y={j}: {py1[j]!r} vs {py2[j]!r}")
        m1y.setflags(write=False)
        m2y.setflags(write=False)
        object.__setattr__(self, "m1y", m1y)
        object.__setattr__(self, "m2y", m2y)
        if self.m12 is not None:
            m12 = np.array(self.m12, dtype=float)
            if m12.shape != (m1y.shape[0], m2y.shape[0]):
                raise ValidationError(f"m12 has shape {m12.shape}, expected {(m1y.shape[0], m2y.shape[0])}")
            _check_distribution(m12, "m12")
            for axis, (a, b, label) in enumerate(
                [(m12.sum(1), m1y.sum(1), "x1"), (m12.sum(0), m2y.sum(1), "x2")]
            ):
                if np.max(np.abs(a - b)) > CONSISTENCY_TOL:
                    j = int(np.argmax(np.abs(a - b)))
                    raise ValidationError(f"p({label}) disagrees between m12 and m{axis + 1}y at {label}={j}")
            m12.setflags(write=False)
            object.__setattr__(self, "m12", m12)
        Cardinalities(m1y.shape[0], m2y.shape[0], m1y.shape[1])

    @property
    def card(self) -> Cardinalities:
        return Cardinalities(self.m1y.shape[0], self.m2y.shape[0], self.m1y.shape[1])

    @property
    def py(self) -> np.ndarray:
        return 0.5 * (self.m1y.sum(0) + self.m2y.sum(0))

    @property
    def has_m12(self) -> bool:
        return self.m12 is not None


@dataclass(frozen=True)
class PIDResult:
    """Redundant, unique and synergistic information in bits.

    ``s`` is ``None`` when only pairwise marginals were available.
    """

    r: float
    u1: float
    u2: float
    s: float | None
    total_mi: float | None
    converged: bool = True
    iterations: int = 0

    def as_tuple(self) -> tuple:
        return (self.r, self.u1, self.u2, self.s)

    def to_dict(self) -> dict:
        return {
            "R": self.r,
            "U1": self.u1,
            "U2": self.u2,
            "S": self.s,
            "total_mi": self.total_mi,
            "converged": self.converged,
            "iterations": self.iterations,
        }


# --------------------------------------------------------------------------
# information measures
# --------------------------------------------------------------------------

ArrayOrDist = Union[JointDist, np.ndarray]


def _xlogx_sum(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy(dist: ArrayOrDist) -> float:
    """Shannon entropy in bits of a joint distribution or any marginal table."""
    if isinstance(dist, JointDist):
        return _xlogx_sum(dist.probs)
    arr = np.asarray(dist, dtype=float)
    _check_distribution(arr)
    return _xlogx_sum(arr)


def _axes(group) -> tuple[int, ...]:
    if isinstance(group, str):
        group = (group,)
    try:
        axes = tuple(sorted({_AXIS[g.lower()] for g in group}))
    except (KeyError, AttributeError) as exc:
        raise ArgumentError(f"unknown variable in {group!r}; use names from {VARIABLES}") from exc
    if not axes:
        raise ArgumentError("variable group must be non-empty")
    return axes


def marginalize(dist: JointDist, keep: Iterable[str] | str) -> np.ndarray:
    """Marginal table over ``keep``, axes kept in (x1, x2, y) order."""
    axes = _axes(keep)
    drop = tuple(i for i in range(3) if i not in axes)
    return dist.probs.sum(axis=drop) if drop else dist.probs.copy()


def _h(dist: JointDist, axes: tuple[int, ...]) -> float:
    drop = tuple(i for i in range(3) if i not in axes)
    return _xlogx_sum(dist.probs.sum(axis=drop) if drop else dist.probs)


def mutual_info(dist: JointDist, group_a, group_b) -> float:
    """I(A; B) = H(A) + H(B) - H(A, B) for disjoint variable groups."""
    a, b = _axes(group_a), _axes(group_b)
    if set(a) & set(b):
        raise ArgumentError(f"groups {group_a!r} and {group_b!r} overlap")
    ab = tuple(sorted(a + b))
    return _h(dist, a) + _h(dist, b) - _h(dist, ab)


def conditional_mutual_info(dist: JointDist, a: str = "x1", b: str = "x2", given: str = "y") -> float:
    """I(A; B | C) = H(A,C) + H(B,C) - H(C) - H(A,B,C); defaults to I(X1; X2 | Y)."""
    ia, ib, ic = _axes(a), _axes(b), _axes(given)
    if set(ia) & set(ib) or set(ia) & set(ic) or set(ib) & set(ic):
        raise ArgumentError("conditional mutual information needs disjoint groups")
    return (
        _h(dist, tuple(sorted(ia + ic)))
        + _h(dist, tuple(sorted(ib + ic)))
        - _h(dist, ic)
        - _h(dist, tuple(sorted(ia + ib + ic)))
    )


def co_information(dist: JointDist) -> float:
    """Signed three-way information I(X1; X2; Y) = I(X1; X2) - I(X1; X2 | Y)."""
    return mutual_info(dist, "x1", "x2") - conditional_mutual_info(dist)


def pairwise_marginals(dist: JointDist, include_m12: bool = True) -> PairwiseMarginals:
    p = dist.probs
    return PairwiseMarginals(p.sum(1), p.sum(0), p.sum(2) if include_m12 else None)
