"""Synthetic separable instances with a planted gap, and label-flip noise."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Label
from .errors import InfeasibleSpec

MAX_ATTEMPTS = 1_000_000


@dataclass(frozen=True)
class GenSpec:
    dim: int
    n: int
    margin: float
    diam: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InfeasibleSpec("dim must be >= 1")
        if self.n < 2:
            raise InfeasibleSpec("n must be >= 2")
        if not self.margin > 0:
            raise InfeasibleSpec("margin must be > 0")
        if not self.margin < self.diam:
            raise InfeasibleSpec(f"margin {self.margin} must be below diam {self.diam}")


def _ball_sample(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    g = rng.standard_normal(dim)
    g /= np.linalg.norm(g)
    return g * radius * rng.random() ** (1.0 / dim)


def _one_side_point(rng: np.random.Generator, u: np.ndarray, half_gap: float,
                    radius: float, sign: float) -> np.ndarray:
    """Uniform point of the ball with ``sign * u.x >= half_gap``.

    Rejection against the reflected half-ball; after MAX_ATTEMPTS the last
    draw is pushed onto the boundary plane and pulled back into the ball.
    """
    x = np.zeros_like(u)
    for _ in range(MAX_ATTEMPTS):
        x = _ball_sample(rng, u.shape[0], radius)
        h = float(x @ u)
        if h * sign < 0:
            x = x - 2.0 * h * u
            h = -h
        if h * sign >= half_gap:
            return x
    ortho = x - float(x @ u) * u
    room = math.sqrt(max(radius ** 2 - half_gap ** 2, 0.0))
    on = np.linalg.norm(ortho)
    if on > room:
        ortho *= room / on
    return sign * half_gap * u + ortho


def gen_planted(spec: GenSpec) -> tuple[Dataset, np.ndarray]:
    """Draw a separable instance and the unit normal it was planted along.

    White points satisfy ``u.x >= margin/2`` and black ``u.x <= -margin/2``;
    everything lies in the ball of diameter ``diam`` around the origin.
    The two anchors ``-(margin/2) u`` (black) and ``+(margin/2) u`` (white)
    are included at random positions recorded in ``meta["anchors"]``, so the
    lowest-index points of each class are ordinary draws. Half the points
    (rounded up) are white.
    """
    rng = np.random.default_rng(spec.seed)
    u = rng.standard_normal(spec.dim)
    u /= np.linalg.norm(u)
    half_gap = spec.margin / 2.0
    radius = spec.diam / 2.0

    n_white = (spec.n + 1) // 2
    n_black = spec.n // 2
    points = [-half_gap * u, half_gap * u]
    labels = [Label.BLACK, Label.WHITE]
    for lab in [Label.WHITE] * (n_white - 1) + [Label.BLACK] * (n_black - 1):
        sign = 1.0 if lab is Label.WHITE else -1.0
        points.append(_one_side_point(rng, u, half_gap, radius, sign))
        labels.append(lab)
    order = rng.permutation(spec.n)
    where = np.argsort(order)
    data = Dataset(np.vstack(points)[order], np.asarray(labels, dtype=np.int8)[order],
                   {"planted_normal": u.tolist(), "margin": spec.margin,
                    "diam": spec.diam, "seed": spec.seed,
                    "anchors": [int(where[0]), int(where[1])]})
    return data, u


def inject_mislabels(data: Dataset, rho: float, seed: int = 0) -> Dataset:
    """Flip ``ceil(rho * n)`` distinct labels chosen uniformly at random.

    The flipped indices, sorted, are stored under ``meta["flipped"]``.
    """
    labels = data.require_labels()
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    k = math.ceil(round(rho * data.n, 9))  # 0.07 * 100 must give 7, not 8
    rng = np.random.default_rng(seed)
    flipped = np.sort(rng.choice(data.n, size=k, replace=False)) if k else np.zeros(0, dtype=int)
    new = labels.astype(np.int8).copy()
    new[flipped] = -new[flipped]
    return data.with_labels(new, flipped=[int(i) for i in flipped])
