"""Approximate maximum-margin linear classification by iterative slab shrinking."""
from .dataset import Dataset, Label
from .datagen import GenSpec, gen_planted, inject_mislabels
from .engine import (
    Candidate,
    CandidateKind,
    EngineConfig,
    StepCase,
    StepRecord,
    TrainerState,
    TrainReport,
    VerifyReport,
    apply_update,
    init_state,
    iteration_cap,
    select_candidate,
    train_active,
    train_offline,
    verify_separation,
)
from .geometry import (
    Side,
    Slab,
    StepGeometry,
    diameter_upper_bound,
    mid_distance,
    project_onto_segment,
    shrink_slab,
    side_of,
    slab_contains,
)
from .oracles import exact_counterexample, pool_labeling_oracle, sampled_counterexample

__version__ = "0.1.0"

__all__ = [
    "Candidate", "CandidateKind", "Dataset", "EngineConfig", "GenSpec", "Label", "Side", "Slab",
    "StepCase", "StepGeometry", "StepRecord", "TrainReport", "TrainerState", "VerifyReport",
    "apply_update", "diameter_upper_bound", "exact_counterexample", "gen_planted",
    "init_state", "inject_mislabels", "iteration_cap", "mid_distance", "pool_labeling_oracle",
    "project_onto_segment", "sampled_counterexample", "select_candidate", "shrink_slab",
    "side_of", "slab_contains", "train_active", "train_offline", "verify_separation",
]
