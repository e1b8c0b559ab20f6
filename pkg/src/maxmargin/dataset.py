"""Labels and indexed point sets."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionMismatch, IndexOutOfRange, MissingLabels, SingleClass
from .geometry import Side, as_points


class Label(enum.IntEnum):
    """Point colour. The integer values are the CSV encoding."""

    BLACK = -1
    WHITE = 1

    @property
    def side(self) -> Side:
        return Side.BLACK if self is Label.BLACK else Side.WHITE

    def flipped(self) -> "Label":
        return Label(-int(self))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Points with stable 0-based indices and optional +/-1 labels.

    ``labels`` is ``None`` for an unlabeled pool. ``meta`` carries free-form
    provenance such as the flipped index set from mislabel injection.
    """

    points: NDArray[np.float64]
    labels: Optional[NDArray[np.int8]] = None
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        pts = as_points(self.points)
        if pts.shape[0] and pts.shape[1] < 1:
            raise DimensionMismatch("points need at least one coordinate")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray([int(Label(int(x))) for x in np.ravel(self.labels)], dtype=np.int8)
            if lab.shape[0] != pts.shape[0]:
                raise DimensionMismatch(
                    f"{lab.shape[0]} labels for {pts.shape[0]} points")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @classmethod
    def from_lists(cls, points: ArrayLike, labels: Optional[ArrayLike] = None, **meta: Any) -> "Dataset":
        return cls(np.asarray(points, dtype=np.float64), None if labels is None else np.asarray(labels), dict(meta))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def label(self, i: int) -> Label:
        if self.labels is None:
            raise MissingLabels("dataset has no labels")
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"index {i} outside [0, {self.n})")
        return Label(int(self.labels[i]))

    def require_labels(self) -> NDArray[np.int8]:
        if self.labels is None:
            raise MissingLabels("operation needs a labeled dataset")
        return self.labels

    def require_both_classes(self) -> NDArray[np.int8]:
        labels = self.require_labels()
        if not (np.any(labels == Label.BLACK) and np.any(labels == Label.WHITE)):
            raise SingleClass("both label classes must be non-empty")
        return labels

    def class_points(self, label: Label) -> NDArray[np.float64]:
        return self.points[self.require_labels() == label]

    def unlabeled(self) -> "Dataset":
        return Dataset(self.points, None, dict(self.meta))

    def with_labels(self, labels: ArrayLike, **meta: Any) -> "Dataset":
        merged = dict(self.meta)
        merged.update(meta)
        return Dataset(self.points, np.asarray(labels), merged)

    def conflicting_duplicates(self) -> list[tuple[int, int]]:
        """Index pairs of identical points carrying different labels."""
        labels = self.require_labels()
        first: dict[bytes, int] = {}
        clashes = []
        for i, row in enumerate(self.points):
            key = (row + 0.0).tobytes()  # folds -0.0 onto 0.0
            j = first.setdefault(key, i)
            if j != i and labels[j] != labels[i]:
                clashes.append((j, i))
        return clashes
