"""Iterative slab-shrinking trainer.

Each iteration looks at the slab spanned by the current witness pair
``(b, w)``, shrunk by ``1 - eps`` about its middle. If some point sits inside
the shrunk slab, the one nearest the middle hyperplane is labeled and used;
otherwise a counterexample (a wrongly-sided point) is requested. Either way
the chosen point ``p`` drags the witness of its own colour towards the other
witness: for a white ``p`` the new ``w`` is the nearest point to ``b`` on the
segment ``[w, p]``, and symmetrically for black. No counterexample means the
shrunk slab separates the data and training stops.

Witnesses are tracked together with convex weights over the point indices of
their class, so hull membership of both witnesses can be checked at any step.
"""
from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, NamedTuple, Optional, Protocol, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dataset import Dataset, Label
from .errors import (
    CoincidentSeeds,
    EpsOutOfRange,
    MarginError,
    NonPositiveInput,
    OracleFailure,
    SingleClass,
)
from .geometry import (
    DEFAULT_TOL,
    Side,
    Slab,
    StepGeometry,
    Vector,
    _same_dim,
    as_points,
    as_vector,
    diameter_upper_bound,
    project_onto_segment,
    shrink_slab,
    side_of,
)

log = logging.getLogger(__name__)

# weight key standing for a seed vector that is not one of the indexed points
SEED = -1

DEFAULT_CAP_CONSTANT = 256.0

# witnesses closer than this fraction of the diameter are indistinguishable in
# float64; only inseparable data drives them there
COLLAPSE_RATIO = 2.0 ** -52


class CandidateKind(enum.Enum):
    IN_SLAB = "in_slab"
    MISCLASSIFIED = "misclassified"
    CONVERGED = "converged"


class Candidate(NamedTuple):
    kind: CandidateKind
    index: Optional[int] = None


class StepCase(enum.Enum):
    SLAB_POINT = "slab_point"
    COUNTEREXAMPLE = "counterexample"
    TERMINAL = "terminal"


@dataclass(frozen=True)
class EngineConfig:
    epsilon: float
    tol: float = DEFAULT_TOL
    cap_constant: float = DEFAULT_CAP_CONSTANT
    explicit_cap: Optional[int] = None
    rng_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise EpsOutOfRange(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.tol < 0:
            raise NonPositiveInput("tol must be >= 0")
        if self.cap_constant <= 0:
            raise NonPositiveInput("cap_constant must be > 0")
        if self.explicit_cap is not None and self.explicit_cap < 0:
            raise NonPositiveInput("explicit_cap must be >= 0")


@dataclass(frozen=True, eq=False)
class TrainerState:
    """Witness pair with convex-combination certificates.

    ``b_weights`` maps point indices (or :data:`SEED`) to convex coefficients
    reproducing ``b``; likewise ``w_weights`` for ``w``.
    """

    b: Vector
    w: Vector
    b_weights: Mapping[int, float]
    w_weights: Mapping[int, float]
    ell: float
    iteration: int = 0
    b_seed: Optional[Vector] = None
    w_seed: Optional[Vector] = None

    @property
    def slab(self) -> Slab:
        return Slab(self.b, self.w)

    def reconstruct(self, points: NDArray[np.float64], which: Label) -> Vector:
        weights, seed = ((self.b_weights, self.b_seed) if which is Label.BLACK
                         else (self.w_weights, self.w_seed))
        acc = np.zeros_like(self.b)
        for k, c in weights.items():
            acc = acc + c * (seed if k == SEED else points[k])
        return acc

    def certificate_errors(self, points: ArrayLike, labels: Optional[ArrayLike] = None) -> list[str]:
        """Return violated certificate conditions (empty when all hold).

        Checks min weight >= -1e-9, weight sum 1 +/- 1e-9, relative
        reconstruction error <= 1e-9 and, when ``labels`` is given, that every
        weighted index carries the witness's own label.
        """
        pts = as_points(points)
        problems = []
        if not self.ell > 0:
            problems.append(f"ell={self.ell} not positive")
        if abs(self.ell - float(np.linalg.norm(self.b - self.w))) > 1e-12 * max(self.ell, 1.0):
            problems.append("ell does not match |b - w|")
        for which, target, weights in ((Label.BLACK, self.b, self.b_weights),
                                       (Label.WHITE, self.w, self.w_weights)):
            vals = np.fromiter(weights.values(), dtype=np.float64)
            if vals.size == 0:
                problems.append(f"{which.name} weights empty")
                continue
            if vals.min() < -1e-9:
                problems.append(f"{which.name} weight {vals.min()} negative")
            if abs(vals.sum() - 1.0) > 1e-9:
                problems.append(f"{which.name} weights sum to {vals.sum()}")
            err = np.linalg.norm(self.reconstruct(pts, which) - target)
            scale = max(float(np.linalg.norm(target)), 1.0)
            if err > 1e-9 * scale:
                problems.append(f"{which.name} reconstruction error {err}")
            if labels is not None:
                lab = np.asarray(labels)
                wrong = [k for k in weights if k != SEED and lab[k] != which]
                if wrong:
                    problems.append(f"{which.name} weights on foreign indices {wrong}")
        return problems


@dataclass(frozen=True)
class StepRecord:
    iteration: int
    case: StepCase
    chosen_index: Optional[int]
    label: Optional[Label]
    ell_before: float
    ell_after: float
    # None for the terminal check, which moves nothing
    geometry: Optional[StepGeometry]

    @property
    def in_slab_unclamped(self) -> bool:
        return (self.case is StepCase.SLAB_POINT and self.geometry is not None
                and not self.geometry.clamped)


@dataclass(frozen=True)
class EpochRecord:
    """Iterations whose starting ell lies in (D/2**epoch, D/2**(epoch-1)]."""

    epoch: int
    first_iteration: int
    last_iteration: int
    ell_start: float
    ell_end: float

    @property
    def iterations(self) -> int:
        return self.last_iteration - self.first_iteration + 1


@dataclass(frozen=True)
class TrainReport:
    converged: bool
    final_slab: Slab
    final_ell: float
    width: float
    iterations: int
    case_b_count: int
    case_a_count: int
    labeling_calls: int
    counterexample_calls: int
    trace: tuple[StepRecord, ...]
    epsilon: float
    iteration_cap: int
    diam_ub: float
    final_state: TrainerState = field(compare=False)
    epochs: tuple[EpochRecord, ...] = ()

    @property
    def ell_history(self) -> list[float]:
        if not self.trace:
            return [self.final_ell]
        return [self.trace[0].ell_before] + [r.ell_after for r in self.trace]


class VerifyReport(NamedTuple):
    misclassified_count: int
    interior_count: int
    width: float

    @property
    def certified(self) -> bool:
        return self.misclassified_count == 0 and self.interior_count == 0


class LabelingOracle(Protocol):
    calls: int

    def query(self, index: int) -> Label: ...


class CounterexampleOracle(Protocol):
    calls: int

    def query(self, slab: Slab) -> Optional[int]: ...


StepCallback = Callable[[TrainerState, StepRecord], None]


def init_state(b1: ArrayLike, w1: ArrayLike,
               b1_index: Optional[int] = None, w1_index: Optional[int] = None) -> TrainerState:
    b, w = as_vector(b1), as_vector(w1)
    _same_dim(b, w)
    if not np.any(b != w):
        raise CoincidentSeeds("seed points coincide")
    return TrainerState(
        b=b, w=w,
        b_weights={SEED if b1_index is None else int(b1_index): 1.0},
        w_weights={SEED if w1_index is None else int(w1_index): 1.0},
        ell=float(np.linalg.norm(b - w)),
        iteration=0,
        b_seed=b, w_seed=w,
    )


def _closest_in_slab(sigma: Slab, points: NDArray[np.float64], tol: float) -> Optional[int]:
    t = sigma.params(points)
    inside = (t > tol) & (t < 1.0 - tol)
    if not inside.any():
        return None
    # |t - 1/2| orders points exactly as the distance to the middle hyperplane;
    # argmin returns the lowest index on ties
    gap = np.where(inside, np.abs(t - 0.5), np.inf)
    return int(np.argmin(gap))


def _first_wrongly_sided(sigma: Slab, points: NDArray[np.float64],
                         labels: NDArray[np.int8], tol: float) -> Optional[int]:
    t = sigma.params(points)
    wrong = ((labels == Label.WHITE) & (t <= tol)) | ((labels == Label.BLACK) & (t >= 1.0 - tol))
    hits = np.flatnonzero(wrong)
    return int(hits[0]) if hits.size else None


def select_candidate(state: TrainerState, data: Dataset, eps: float,
                     tol: float = DEFAULT_TOL) -> Candidate:
    labels = data.require_labels()
    sigma = shrink_slab(state.slab, eps)
    i = _closest_in_slab(sigma, data.points, tol)
    if i is not None:
        return Candidate(CandidateKind.IN_SLAB, i)
    i = _first_wrongly_sided(sigma, data.points, labels, tol)
    if i is not None:
        return Candidate(CandidateKind.MISCLASSIFIED, i)
    return Candidate(CandidateKind.CONVERGED)


def _mix(weights: Mapping[int, float], t: float, index: int) -> dict[int, float]:
    out = {k: (1.0 - t) * c for k, c in weights.items()}
    out[index] = out.get(index, 0.0) + t
    return {k: c for k, c in out.items() if c != 0.0}


def apply_update(state: TrainerState, p: ArrayLike, p_index: int, label: Label,
                 case: StepCase = StepCase.SLAB_POINT) -> tuple[TrainerState, StepRecord]:
    """Move the witness of ``label``'s colour towards ``p``.

    Raises :class:`DegenerateSegment` when ``p`` coincides with that witness.
    """
    p = as_vector(p)
    label = Label(label)
    if label is Label.WHITE:
        geo = project_onto_segment(state.b, state.w, p)
        b, w = state.b, geo.foot
        b_weights, w_weights = state.b_weights, _mix(state.w_weights, geo.t_clamped, p_index)
    else:
        geo = project_onto_segment(state.w, state.b, p)
        b, w = geo.foot, state.w
        b_weights, w_weights = _mix(state.b_weights, geo.t_clamped, p_index), state.w_weights
    ell = float(np.linalg.norm(b - w))
    new_state = TrainerState(b=b, w=w, b_weights=b_weights, w_weights=w_weights, ell=ell,
                             iteration=state.iteration + 1,
                             b_seed=state.b_seed, w_seed=state.w_seed)
    record = StepRecord(iteration=new_state.iteration, case=case, chosen_index=int(p_index),
                        label=label, ell_before=state.ell, ell_after=ell, geometry=geo)
    return new_state, record


def iteration_cap(diam_ub: float, ell_lower: float, eps: float,
                  cap_constant: float = DEFAULT_CAP_CONSTANT) -> int:
    """``ceil(cap_constant * (diam_ub / (eps * ell_lower))**2)``.

    Evaluated in exact rational arithmetic on the float inputs so that values
    such as ``(10 / (0.2 * 0.5))**2`` do not round up past an integer.
    """
    if diam_ub <= 0 or ell_lower <= 0 or eps <= 0 or cap_constant <= 0:
        raise NonPositiveInput("iteration_cap needs positive diam_ub, ell_lower, eps, cap_constant")
    if eps >= 1:
        raise EpsOutOfRange(f"epsilon must lie in (0, 1), got {eps}")
    exact = Fraction(cap_constant) * Fraction(diam_ub) ** 2 / (Fraction(eps) * Fraction(ell_lower)) ** 2
    return math.ceil(exact)


def epoch_of(diam_ub: float, ell: float) -> int:
    if ell <= 0 or diam_ub <= 0:
        raise NonPositiveInput("epoch_of needs positive arguments")
    return max(1, math.floor(math.log2(diam_ub / ell)) + 1)


def epoch_table(trace: Sequence[StepRecord], diam_ub: float) -> tuple[EpochRecord, ...]:
    out: list[EpochRecord] = []
    for rec in trace:
        j = epoch_of(diam_ub, rec.ell_before)
        if out and out[-1].epoch == j:
            last = out[-1]
            out[-1] = EpochRecord(j, last.first_iteration, rec.iteration, last.ell_start, rec.ell_after)
        else:
            out.append(EpochRecord(j, rec.iteration, rec.iteration, rec.ell_before, rec.ell_after))
    return tuple(out)


# A resolver turns the current shrunk slab into the next step: the case, the
# chosen index and its label (both None for the terminal check).
_Resolver = Callable[[TrainerState, Slab], tuple[StepCase, Optional[int], Optional[Label]]]


def _run(state: TrainerState, points: NDArray[np.float64], config: EngineConfig,
         diam_ub: float, resolve: _Resolver, callback: Optional[StepCallback]) -> dict[str, Any]:
    eps = config.epsilon
    if config.explicit_cap is not None:
        cap = config.explicit_cap
        epoch = 0
    else:
        cap = iteration_cap(diam_ub, state.ell, eps, config.cap_constant)
        epoch = epoch_of(diam_ub, state.ell)
    trace: list[StepRecord] = []
    case_a = case_b = 0
    converged = False
    while len(trace) < cap:
        sigma = shrink_slab(state.slab, eps)
        case, idx, label = resolve(state, sigma)
        if case is StepCase.TERMINAL:
            case_a += 1
            rec = StepRecord(state.iteration + 1, case, None, None, state.ell, state.ell, None)
            trace.append(rec)
            if callback is not None:
                callback(state, rec)
            converged = True
            break
        assert idx is not None and label is not None
        state, rec = apply_update(state, points[idx], idx, label, case)
        trace.append(rec)
        if case is StepCase.SLAB_POINT:
            case_b += 1
        else:
            case_a += 1
        if callback is not None:
            callback(state, rec)
        if state.ell <= COLLAPSE_RATIO * diam_ub:
            log.warning("witnesses met at iteration %d (ell=%g); the classes are not separable",
                        rec.iteration, state.ell)
            break
        if config.explicit_cap is None:
            j = epoch_of(diam_ub, state.ell)
            if j != epoch:
                epoch = j
                cap = max(cap, iteration_cap(diam_ub, state.ell, eps, config.cap_constant))
    if not converged:
        log.info("stopped without convergence after %d iterations (cap %d)", len(trace), cap)
    if state.ell > 0:
        final_slab = shrink_slab(state.slab, eps)
    else:
        final_slab = Slab(state.b_seed, state.w_seed)  # placeholder, run is not converged
    return dict(
        converged=converged,
        final_slab=final_slab,
        final_ell=state.ell,
        width=(1.0 - eps) * state.ell,
        iterations=len(trace),
        case_b_count=case_b,
        case_a_count=case_a,
        trace=tuple(trace),
        epsilon=eps,
        iteration_cap=cap,
        diam_ub=diam_ub,
        final_state=state,
        epochs=epoch_table(trace, diam_ub) if diam_ub > 0 else (),
    )


def train_offline(data: Dataset, config: EngineConfig,
                  seeds: Optional[tuple[int, int]] = None,
                  callback: Optional[StepCallback] = None) -> TrainReport:
    """Run the trainer on fully labeled data.

    ``seeds`` is a (black index, white index) pair; by default the lowest
    index of each class. ``callback(state, record)`` is invoked after every
    step. A run that hits the iteration cap returns ``converged=False``.
    """
    labels = data.require_both_classes()
    clashes = data.conflicting_duplicates()
    if clashes:
        warnings.warn(f"identical points with different labels {clashes[:5]}; "
                      "the data cannot be separated", RuntimeWarning, stacklevel=2)
    if seeds is None:
        bi = int(np.flatnonzero(labels == Label.BLACK)[0])
        wi = int(np.flatnonzero(labels == Label.WHITE)[0])
    else:
        bi, wi = (int(s) for s in seeds)
        if data.label(bi) is not Label.BLACK or data.label(wi) is not Label.WHITE:
            raise SingleClass(f"seed {bi} must be black and seed {wi} white")
    points = data.points
    state = init_state(points[bi], points[wi], bi, wi)
    diam_ub = diameter_upper_bound(points)
    tol = config.tol

    def resolve(state: TrainerState, sigma: Slab):
        i = _closest_in_slab(sigma, points, tol)
        if i is not None:
            return StepCase.SLAB_POINT, i, Label(int(labels[i]))
        i = _first_wrongly_sided(sigma, points, labels, tol)
        if i is not None:
            return StepCase.COUNTEREXAMPLE, i, Label(int(labels[i]))
        return StepCase.TERMINAL, None, None

    out = _run(state, points, config, diam_ub, resolve, callback)
    return TrainReport(labeling_calls=out["case_b_count"],
                       counterexample_calls=out["case_a_count"], **out)


def train_active(label_oracle: LabelingOracle, cex_oracle: CounterexampleOracle,
                 pool: ArrayLike, b1: Union[int, ArrayLike], w1: Union[int, ArrayLike],
                 config: EngineConfig, callback: Optional[StepCallback] = None) -> TrainReport:
    """Run the trainer on an unlabeled pool, acquiring labels through oracles.

    ``b1`` and ``w1`` are the given black and white seeds, either as pool
    indices or as explicit vectors. In-slab points are labeled through
    ``label_oracle`` (each index at most once, answers are cached); when the
    shrunk slab is empty ``cex_oracle`` is asked for a violator, whose label
    follows from the side it was found on.

    ``labeling_calls`` counts label requests by in-slab steps, cache hits
    included, so ``labeling_calls + counterexample_calls == iterations``.
    """
    points = as_points(pool)
    n = points.shape[0]
    cache: dict[int, Label] = {}

    def seed(x: Union[int, ArrayLike], colour: Label) -> tuple[Vector, Optional[int]]:
        if isinstance(x, (int, np.integer)):
            i = int(x)
            if not 0 <= i < n:
                raise MarginError(f"seed index {i} outside the pool")
            cache[i] = colour
            return points[i], i
        return as_vector(x), None

    b, bi = seed(b1, Label.BLACK)
    w, wi = seed(w1, Label.WHITE)
    state = init_state(b, w, bi, wi)
    diam_ub = diameter_upper_bound(np.vstack([points, b, w]) if n else np.vstack([b, w]))
    tol = config.tol

    def label_of(i: int) -> Label:
        if i not in cache:
            cache[i] = Label(label_oracle.query(i))
        return cache[i]

    def resolve(state: TrainerState, sigma: Slab):
        i = _closest_in_slab(sigma, points, tol) if n else None
        if i is not None:
            return StepCase.SLAB_POINT, i, label_of(i)
        r = cex_oracle.query(sigma)
        if r is None:
            return StepCase.TERMINAL, None, None
        r = int(r)
        if not 0 <= r < n:
            raise OracleFailure(f"counterexample oracle returned index {r} outside the pool")
        side = side_of(sigma, points[r], tol)
        if side is Side.BLACK:
            lab = Label.WHITE
        elif side is Side.WHITE:
            lab = Label.BLACK
        else:
            lab = label_of(r)
        cache.setdefault(r, lab)
        return StepCase.COUNTEREXAMPLE, r, lab

    out = _run(state, points, config, diam_ub, resolve, callback)
    return TrainReport(labeling_calls=out["case_b_count"],
                       counterexample_calls=out["case_a_count"], **out)


def verify_separation(data: Dataset, slab: Slab, tol: float = DEFAULT_TOL) -> VerifyReport:
    labels = data.require_labels()
    t = slab.params(data.points) if data.n else np.zeros(0)
    interior = (t > tol) & (t < 1.0 - tol)
    wrong = ((labels == Label.WHITE) & (t <= tol)) | ((labels == Label.BLACK) & (t >= 1.0 - tol))
    return VerifyReport(int(wrong.sum()), int(interior.sum()), slab.length)
