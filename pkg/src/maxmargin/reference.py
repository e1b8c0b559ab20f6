"""Ground truth for tests: exact 2-D hull distance, margin certificates for
planted data, and a deliberately naive re-implementation of candidate
selection.

Nothing here is used by the trainer itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .dataset import Dataset, Label
from .engine import Candidate, CandidateKind
from .errors import EmptyClass, MarginError, MissingLabels, SingleClass, WrongDimension

Point2 = tuple[float, float]


@dataclass(frozen=True)
class MarginCertificate:
    lower: float
    upper: float
    exact: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.lower <= self.upper:
            raise MarginError(f"invalid certificate [{self.lower}, {self.upper}]")
        if self.exact and self.lower != self.upper:
            raise MarginError("exact certificate needs lower == upper")


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points: Iterable[Sequence[float]]) -> list[Point2]:
    """Andrew's monotone chain, counter-clockwise, collinear points dropped.

    Degenerate inputs come back as one vertex or the two ends of a segment.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return pts
    lower: list[Point2] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point2] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _edges(hull: list[Point2]) -> list[tuple[Point2, Point2]]:
    if len(hull) == 2:
        return [(hull[0], hull[1])]
    if len(hull) < 2:
        return []
    return [(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))]


def _point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    L = dx * dx + dy * dy
    t = 0.0 if L == 0 else ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def _on_segment(p: Point2, a: Point2, b: Point2) -> bool:
    return (_cross(a, b, p) == 0
            and min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _in_hull(p: Point2, hull: list[Point2]) -> bool:
    if len(hull) == 1:
        return p == hull[0]
    if len(hull) == 2:
        return _on_segment(p, hull[0], hull[1])
    return all(_cross(a, b, p) >= 0 for a, b in _edges(hull))


def _segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    return (_on_segment(p1, q1, q2) or _on_segment(p2, q1, q2)
            or _on_segment(q1, p1, p2) or _on_segment(q2, p1, p2))


def hull_distance_2d(black: ArrayLike, white: ArrayLike) -> float:
    """Distance between the convex hulls of two planar point sets (0 if they meet)."""
    B = np.asarray(black, dtype=np.float64)
    W = np.asarray(white, dtype=np.float64)
    for arr in (B, W):
        if arr.size == 0:
            raise EmptyClass("both point sets must be non-empty")
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise WrongDimension(f"hull_distance_2d needs (n, 2) arrays, got {arr.shape}")
    hb = convex_hull_2d(B.tolist())
    hw = convex_hull_2d(W.tolist())
    if any(_in_hull(p, hw) for p in hb) or any(_in_hull(p, hb) for p in hw):
        return 0.0
    eb, ew = _edges(hb), _edges(hw)
    if any(_segments_intersect(a, b, c, d) for a, b in eb for c, d in ew):
        return 0.0
    best = min(math.hypot(p[0] - q[0], p[1] - q[1]) for p in hb for q in hw)
    for p in hb:
        for a, b in ew:
            best = min(best, _point_segment_distance(p, a, b))
    for p in hw:
        for a, b in eb:
            best = min(best, _point_segment_distance(p, a, b))
    return best


def planted_margin_bounds(data: Dataset, planted_normal: ArrayLike) -> MarginCertificate:
    """Bracket the hull distance of a dataset with a known separating direction.

    The gap between the classes along the unit normal is a lower bound; the
    closest black/white pair is an upper bound.
    """
    labels = data.require_labels()
    black = data.points[labels == Label.BLACK]
    white = data.points[labels == Label.WHITE]
    if len(black) == 0 or len(white) == 0:
        raise SingleClass("both label classes must be non-empty")
    u = np.asarray(planted_normal, dtype=np.float64)
    norm = float(np.linalg.norm(u))
    if norm == 0:
        raise MarginError("planted normal must be non-zero")
    u = u / norm
    gap = float((white @ u).min() - (black @ u).max())
    diff = black[:, None, :] - white[None, :, :]
    upper = float(np.sqrt((diff ** 2).sum(axis=-1)).min())
    lower = min(max(0.0, gap), upper)
    return MarginCertificate(lower=lower, upper=upper, exact=False)


def brute_force_candidate(b: Sequence[float], w: Sequence[float], data: Dataset,
                          eps: float, tol: float) -> Candidate:
    """Plain-loop candidate selection used to cross-check the engine."""
    if data.labels is None:
        raise MissingLabels("candidate selection needs labels")
    b = [float(x) for x in b]
    w = [float(x) for x in w]
    d = len(b)
    lo = [(1 - eps / 2) * b[k] + (eps / 2) * w[k] for k in range(d)]
    hi = [(eps / 2) * b[k] + (1 - eps / 2) * w[k] for k in range(d)]
    axis = [hi[k] - lo[k] for k in range(d)]
    axis_sq = sum(a * a for a in axis)
    mid = [(lo[k] + hi[k]) / 2 for k in range(d)]
    axis_len = math.sqrt(axis_sq)

    best = None
    best_dist = math.inf
    ts = []
    for i, p in enumerate(data.points.tolist()):
        t = sum((p[k] - lo[k]) * axis[k] for k in range(d)) / axis_sq
        ts.append(t)
        if tol < t < 1 - tol:
            dist = abs(sum((p[k] - mid[k]) * axis[k] for k in range(d))) / axis_len
            if dist < best_dist:
                best, best_dist = i, dist
    if best is not None:
        return Candidate(CandidateKind.IN_SLAB, best)
    for i, t in enumerate(ts):
        lab = int(data.labels[i])
        if (lab == Label.WHITE and t <= tol) or (lab == Label.BLACK and t >= 1 - tol):
            return Candidate(CandidateKind.MISCLASSIFIED, i)
    return Candidate(CandidateKind.CONVERGED)
