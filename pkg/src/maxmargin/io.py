"""Dataset CSV, slab/report JSON and trace CSV formats.

Dataset CSV: header ``x0,...,x{d-1},label``; the label column holds ``+1``
(white), ``-1`` (black), or is empty on every row for an unlabeled pool.
Floats are written with ``repr`` so that reading back gives identical values.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .dataset import Dataset, Label
from .engine import EpochRecord, StepCase, StepRecord, TrainerState, TrainReport, SEED
from .errors import MarginError
from .geometry import Slab, StepGeometry

PathLike = Union[str, Path]


class FormatError(MarginError):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{k}" for k in range(data.dim)] + ["label"])
    for i, row in enumerate(data.points.tolist()):
        if data.labels is None:
            lab = ""
        else:
            lab = "+1" if data.labels[i] == Label.WHITE else "-1"
        writer.writerow([_fmt(v) for v in row] + [lab])
    return buf.getvalue()


def dataset_from_csv(text: str) -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError("empty dataset file")
    header = [h.strip() for h in rows[0]]
    d = len(header) - 1
    if d < 1 or header[-1] != "label" or header[:-1] != [f"x{k}" for k in range(d)]:
        raise FormatError(f"bad header {header!r}; expected x0,...,x{{d-1}},label")
    points, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != d + 1:
            raise FormatError(f"line {lineno}: expected {d + 1} fields, got {len(row)}")
        try:
            points.append([float(v) for v in row[:-1]])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        lab = row[-1].strip()
        if lab in ("+1", "1"):
            labels.append(int(Label.WHITE))
        elif lab == "-1":
            labels.append(int(Label.BLACK))
        elif lab == "":
            labels.append(None)
        else:
            raise FormatError(f"line {lineno}: label must be +1, -1 or empty, got {lab!r}")
    pts = np.asarray(points, dtype=np.float64).reshape(len(points), d)
    if all(x is None for x in labels):
        return Dataset(pts, None)
    if any(x is None for x in labels):
        raise FormatError("either every row or no row may carry a label")
    return Dataset(pts, np.asarray(labels, dtype=np.int8))


def save_dataset(data: Dataset, path: PathLike) -> None:
    Path(path).write_text(dataset_to_csv(data), encoding="utf-8", newline="")


def load_dataset(path: PathLike) -> Dataset:
    return dataset_from_csv(Path(path).read_text(encoding="utf-8"))


def file_checksum(path: PathLike) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def slab_to_dict(slab: Slab, epsilon: Optional[float] = None) -> dict[str, Any]:
    out: dict[str, Any] = {"anchor_b": slab.anchor_b.tolist(), "anchor_w": slab.anchor_w.tolist()}
    if epsilon is not None:
        out["epsilon"] = epsilon
    return out


def slab_from_dict(obj: dict[str, Any]) -> Slab:
    if "final_slab" in obj:
        obj = obj["final_slab"]
    try:
        return Slab(np.asarray(obj["anchor_b"], dtype=np.float64),
                    np.asarray(obj["anchor_w"], dtype=np.float64))
    except KeyError as exc:
        raise FormatError(f"slab JSON lacks {exc}") from None


def _geometry_to_dict(g: Optional[StepGeometry]) -> Optional[dict[str, Any]]:
    if g is None:
        return None
    return {"foot": g.foot.tolist(), "t_unclamped": g.t_unclamped,
            "t_clamped": g.t_clamped, "cos_alpha": g.cos_alpha}


def _geometry_from_dict(obj: Optional[dict[str, Any]]) -> Optional[StepGeometry]:
    if obj is None:
        return None
    return StepGeometry(np.asarray(obj["foot"], dtype=np.float64), obj["t_unclamped"],
                        obj["t_clamped"], obj["cos_alpha"])


def step_to_dict(rec: StepRecord) -> dict[str, Any]:
    return {
        "iteration": rec.iteration,
        "case": rec.case.value,
        "chosen_index": rec.chosen_index,
        "label": None if rec.label is None else int(rec.label),
        "ell_before": rec.ell_before,
        "ell_after": rec.ell_after,
        "geometry": _geometry_to_dict(rec.geometry),
    }


def step_from_dict(obj: dict[str, Any]) -> StepRecord:
    return StepRecord(
        iteration=obj["iteration"],
        case=StepCase(obj["case"]),
        chosen_index=obj["chosen_index"],
        label=None if obj["label"] is None else Label(obj["label"]),
        ell_before=obj["ell_before"],
        ell_after=obj["ell_after"],
        geometry=_geometry_from_dict(obj["geometry"]),
    )


def _weights_to_dict(w: dict[int, float]) -> dict[str, float]:
    return {("seed" if k == SEED else str(k)): v for k, v in w.items()}


def _weights_from_dict(obj: dict[str, float]) -> dict[int, float]:
    return {(SEED if k == "seed" else int(k)): v for k, v in obj.items()}


def state_to_dict(s: TrainerState) -> dict[str, Any]:
    return {
        "b": s.b.tolist(), "w": s.w.tolist(),
        "b_weights": _weights_to_dict(dict(s.b_weights)),
        "w_weights": _weights_to_dict(dict(s.w_weights)),
        "ell": s.ell, "iteration": s.iteration,
        "b_seed": None if s.b_seed is None else s.b_seed.tolist(),
        "w_seed": None if s.w_seed is None else s.w_seed.tolist(),
    }


def state_from_dict(obj: dict[str, Any]) -> TrainerState:
    def vec(x):
        return None if x is None else np.asarray(x, dtype=np.float64)
    return TrainerState(b=vec(obj["b"]), w=vec(obj["w"]),
                        b_weights=_weights_from_dict(obj["b_weights"]),
                        w_weights=_weights_from_dict(obj["w_weights"]),
                        ell=obj["ell"], iteration=obj["iteration"],
                        b_seed=vec(obj["b_seed"]), w_seed=vec(obj["w_seed"]))


_SCALARS = ("converged", "final_ell", "width", "iterations", "case_b_count", "case_a_count",
            "labeling_calls", "counterexample_calls", "epsilon", "iteration_cap", "diam_ub")


def report_to_dict(report: TrainReport) -> dict[str, Any]:
    out: dict[str, Any] = {k: getattr(report, k) for k in _SCALARS}
    out["final_slab"] = slab_to_dict(report.final_slab, report.epsilon)
    out["final_state"] = state_to_dict(report.final_state)
    out["epochs"] = [vars(e).copy() for e in report.epochs]
    out["trace"] = [step_to_dict(r) for r in report.trace]
    return out


def report_from_dict(obj: dict[str, Any]) -> TrainReport:
    return TrainReport(
        final_slab=slab_from_dict(obj["final_slab"]),
        final_state=state_from_dict(obj["final_state"]),
        epochs=tuple(EpochRecord(**e) for e in obj["epochs"]),
        trace=tuple(step_from_dict(r) for r in obj["trace"]),
        **{k: obj[k] for k in _SCALARS},
    )


def dumps(obj: Any) -> str:
    # json writes floats with repr, the shortest string that reads back exactly
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def trace_to_csv(trace: tuple[StepRecord, ...]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration", "case", "index", "ell", "cos_alpha", "t_unclamped"])
    for r in trace:
        g = r.geometry
        writer.writerow([
            r.iteration, r.case.value, "" if r.chosen_index is None else r.chosen_index,
            _fmt(r.ell_after),
            "" if g is None else _fmt(g.cos_alpha),
            "" if g is None else _fmt(g.t_unclamped),
        ])
    return buf.getvalue()
