"""Vectors, slabs and projections.

A slab is stored by its two anchors ``b`` (black side) and ``w`` (white side).
Everything is expressed through the projection parameter

    t(p) = (p - b) . (w - b) / |w - b|^2

so that ``t = 0`` and ``t = 1`` are the two bounding hyperplanes and
``t = 1/2`` is the middle hyperplane (the decision boundary).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import pdist

from .errors import (
    DegenerateSegment,
    DimensionMismatch,
    EmptyInput,
    EpsOutOfRange,
    MarginError,
)

Vector = NDArray[np.float64]

DEFAULT_TOL = 1e-12
EXACT_DIAMETER_MAX_POINTS = 2048


def as_vector(x: ArrayLike) -> Vector:
    """Coerce ``x`` to a finite 1-D float64 array with at least one coordinate."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise MarginError("vector coordinates must be finite")
    return v


def as_points(x: ArrayLike) -> NDArray[np.float64]:
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1) if pts.size else pts.reshape(0, 0)
    if pts.ndim != 2:
        raise DimensionMismatch(f"expected an (n, d) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise MarginError("point coordinates must be finite")
    return pts


def _same_dim(*vectors: Vector) -> None:
    d = vectors[0].shape[0]
    for v in vectors[1:]:
        if v.shape[0] != d:
            raise DimensionMismatch(f"dimension {v.shape[0]} != {d}")


class Side(enum.Enum):
    BLACK = "black"
    WHITE = "white"
    INTERIOR = "interior"


@dataclass(frozen=True, eq=False)
class Slab:
    """Open region between the hyperplanes through ``anchor_b`` and ``anchor_w``
    orthogonal to ``anchor_w - anchor_b``."""

    anchor_b: Vector
    anchor_w: Vector

    def __post_init__(self) -> None:
        b = as_vector(self.anchor_b)
        w = as_vector(self.anchor_w)
        _same_dim(b, w)
        object.__setattr__(self, "anchor_b", b)
        object.__setattr__(self, "anchor_w", w)
        if not np.any(b != w):
            raise DegenerateSegment("slab anchors coincide")

    @property
    def dim(self) -> int:
        return self.anchor_b.shape[0]

    @property
    def axis(self) -> Vector:
        return self.anchor_w - self.anchor_b

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.axis))

    @property
    def midpoint(self) -> Vector:
        return 0.5 * (self.anchor_b + self.anchor_w)

    def param(self, p: ArrayLike) -> float:
        """Projection parameter ``t(p)`` of a single point."""
        p = as_vector(p)
        _same_dim(p, self.anchor_b)
        axis = self.axis
        return float(np.dot(p - self.anchor_b, axis) / np.dot(axis, axis))

    def params(self, points: ArrayLike) -> NDArray[np.float64]:
        """Vectorised ``t`` over the rows of an ``(n, d)`` array."""
        pts = as_points(points)
        if pts.shape[0] and pts.shape[1] != self.dim:
            raise DimensionMismatch(f"points have dimension {pts.shape[1]} != {self.dim}")
        axis = self.axis
        return (pts - self.anchor_b) @ axis / np.dot(axis, axis)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Slab):
            return NotImplemented
        return bool(np.array_equal(self.anchor_b, other.anchor_b)
                    and np.array_equal(self.anchor_w, other.anchor_w))

    __hash__ = None  # type: ignore[assignment]

    def swapped(self) -> "Slab":
        return Slab(self.anchor_w, self.anchor_b)

    def __repr__(self) -> str:
        return f"Slab(b={self.anchor_b.tolist()}, w={self.anchor_w.tolist()})"


@dataclass(frozen=True, eq=False)
class StepGeometry:
    """Result of projecting a point onto a segment.

    ``cos_alpha`` is the cosine of the angle at ``u`` between ``a - u`` and
    ``v - u``.
    """

    foot: Vector
    t_unclamped: float
    t_clamped: float
    cos_alpha: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StepGeometry):
            return NotImplemented
        return (np.array_equal(self.foot, other.foot)
                and (self.t_unclamped, self.t_clamped, self.cos_alpha)
                == (other.t_unclamped, other.t_clamped, other.cos_alpha))

    __hash__ = None  # type: ignore[assignment]

    @property
    def clamped(self) -> bool:
        return self.t_unclamped != self.t_clamped


def project_onto_segment(a: ArrayLike, u: ArrayLike, v: ArrayLike) -> StepGeometry:
    """Nearest point to ``a`` on the closed segment ``[u, v]``."""
    a, u, v = as_vector(a), as_vector(u), as_vector(v)
    _same_dim(a, u, v)
    seg = v - u
    seg_sq = float(np.dot(seg, seg))
    if seg_sq == 0.0:
        raise DegenerateSegment("segment endpoints coincide")
    rel = a - u
    inner = float(np.dot(rel, seg))
    t = inner / seg_sq
    tc = min(1.0, max(0.0, t))
    foot = u + tc * seg
    rel_norm = float(np.linalg.norm(rel))
    if rel_norm == 0.0:
        cos_alpha = 0.0
    else:
        cos_alpha = inner / (rel_norm * math.sqrt(seg_sq))
        cos_alpha = min(1.0, max(-1.0, cos_alpha))
    return StepGeometry(foot=foot, t_unclamped=t, t_clamped=tc, cos_alpha=cos_alpha)


def shrink_slab(s: Slab, eps: float) -> Slab:
    """Shrink ``s`` by a factor ``1 - eps`` about its middle hyperplane."""
    if not 0.0 < eps < 1.0:
        raise EpsOutOfRange(f"epsilon must lie in (0, 1), got {eps}")
    b, w = s.anchor_b, s.anchor_w
    half = eps / 2.0
    return Slab((1.0 - half) * b + half * w, half * b + (1.0 - half) * w)


def slab_contains(s: Slab, p: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    t = s.param(p)
    return tol < t < 1.0 - tol


def mid_distance(s: Slab, p: ArrayLike) -> float:
    """Euclidean distance from ``p`` to the middle hyperplane of ``s``."""
    return abs(s.param(p) - 0.5) * s.length


def side_of(s: Slab, p: ArrayLike, tol: float = DEFAULT_TOL) -> Side:
    # boundary points belong to the side, not the interior
    t = s.param(p)
    if t <= tol:
        return Side.BLACK
    if t >= 1.0 - tol:
        return Side.WHITE
    return Side.INTERIOR


def diameter_upper_bound(points: Sequence[ArrayLike] | ArrayLike) -> float:
    """Exact diameter for up to 2048 points, bounding-box diagonal beyond.

    The diagonal is never below the diameter and at most ``sqrt(d)`` times it.
    """
    pts = as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise EmptyInput("diameter of an empty point set")
    if n == 1:
        return 0.0
    if n <= EXACT_DIAMETER_MAX_POINTS:
        return float(pdist(pts).max())
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
