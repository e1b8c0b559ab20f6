"""Iteration-count scaling benchmark over (epsilon, diameter/margin) grids.

Every instance is a planted 2-D set with margin 1 and target diameter equal
to the ratio, so the ratio column is D/margin. The same instance is reused
across epsilons for a given (ratio, trial). Output columns:

    eps, ratio, trial, iterations, cap, converged, seconds, final_ell, hull_dist

``cap`` is ``ceil(256 * (D_ub / (eps * hull_dist))**2)`` with ``D_ub`` the
exact instance diameter. ``seconds`` is left empty unless timing is
requested, which keeps the file byte-for-byte reproducible.
"""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Label
from .datagen import GenSpec, gen_planted
from .engine import EngineConfig, iteration_cap, train_offline
from .geometry import diameter_upper_bound
from .reference import hull_distance_2d

COLUMNS = ("eps", "ratio", "trial", "iterations", "cap", "converged", "seconds",
           "final_ell", "hull_dist")

DEFAULT_EPSILONS = (0.4, 0.2, 0.1)
DEFAULT_RATIOS = (5.0, 10.0, 20.0)
DEFAULT_TRIALS = 5
DEFAULT_N = 200


@dataclass(frozen=True)
class BenchRow:
    eps: float
    ratio: float
    trial: int
    iterations: int
    cap: int
    converged: bool
    seconds: Optional[float]
    final_ell: float
    hull_dist: float

    @property
    def within_cap(self) -> bool:
        return self.iterations <= self.cap


def instance_seed(seed: int, ratio_index: int, trial: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(ratio_index, trial))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _run_cell(args: tuple[float, float, int, int, int, bool]) -> BenchRow:
    eps, ratio, trial, inst_seed, n, timing = args
    data, _ = gen_planted(GenSpec(dim=2, n=n, margin=1.0, diam=ratio, seed=inst_seed))
    dist = hull_distance_2d(data.class_points(Label.BLACK), data.class_points(Label.WHITE))
    d_ub = diameter_upper_bound(data.points)
    t0 = time.perf_counter()
    report = train_offline(data, EngineConfig(epsilon=eps))
    elapsed = time.perf_counter() - t0
    return BenchRow(eps=eps, ratio=ratio, trial=trial, iterations=report.iterations,
                    cap=iteration_cap(d_ub, dist, eps), converged=report.converged,
                    seconds=elapsed if timing else None, final_ell=report.final_ell,
                    hull_dist=dist)


def worker_count(jobs: int) -> int:
    limit = os.environ.get("MMC_THREADS")
    workers = os.cpu_count() or 1
    if limit:
        workers = min(workers, max(1, int(limit)))
    return max(1, min(workers, jobs))


def run_bench(epsilons: Sequence[float], ratios: Sequence[float], trials: int,
              seed: int = 0, n: int = DEFAULT_N, timing: bool = False,
              workers: Optional[int] = None) -> list[BenchRow]:
    if not epsilons or not ratios or trials < 1:
        raise ValueError("need at least one epsilon, one ratio and one trial")
    cells = [(float(eps), float(ratio), trial, instance_seed(seed, ri, trial), n, timing)
             for eps in epsilons
             for ri, ratio in enumerate(ratios)
             for trial in range(trials)]
    workers = worker_count(len(cells)) if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    rows.sort(key=lambda r: (r.eps, r.ratio, r.trial))
    return rows


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([repr(r.eps), repr(r.ratio), r.trial, r.iterations, r.cap,
                         int(r.converged), "" if r.seconds is None else repr(r.seconds),
                         repr(r.final_ell), repr(r.hull_dist)])
    return buf.getvalue()
