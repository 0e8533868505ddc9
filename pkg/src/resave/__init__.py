"""Streaming sliced average variance estimation.

Estimates the directions along which a response changes the conditional
distribution of its predictors, from data arriving one observation at a
time (with a batch estimator on frozen samples as the baseline).
"""

from . import errors
from .checkpoint import load_checkpoint, save_checkpoint
from .experiments import (
    MODEL1,
    MODEL2,
    ModelSpec,
    ReplicationReport,
    TimingResult,
    generate,
    model_by_name,
    r_squared,
    r_squared_projected,
    run_replications,
    run_timing,
)
from .ingestion import Dataset, HoldoutReport, holdout_eval, load_csv
from .kernels import EPANECHNIKOV, QUARTIC4, Kernel, kernel_by_name
from .linalg import SymMatrix, inv_sqrt, sample_covariance, sym_eigen
from .recursive import (
    EvalPoint,
    Observation,
    RecursiveState,
    batch_estimate,
    batch_estimate_many,
)
from .save import (
    EdrEstimate,
    FitResult,
    RatioEstimates,
    RecursiveFit,
    SaveMatrix,
    Standardizer,
    assemble_save,
    compute_ratios,
    extract_directions,
    fit_batch,
    fit_recursive,
    truncate_density,
    update_fit,
)
from .selfcheck import CheckResult, run_selfcheck
from .sequences import (
    DEFAULT_PLAN,
    SequencePlan,
    WeightLedger,
    bandwidth,
    build_ledger,
    empty_ledger,
    step_size,
    truncation_level,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PLAN",
    "EPANECHNIKOV",
    "MODEL1",
    "MODEL2",
    "QUARTIC4",
    "CheckResult",
    "Dataset",
    "EdrEstimate",
    "EvalPoint",
    "FitResult",
    "HoldoutReport",
    "Kernel",
    "ModelSpec",
    "Observation",
    "RatioEstimates",
    "RecursiveFit",
    "RecursiveState",
    "ReplicationReport",
    "SaveMatrix",
    "SequencePlan",
    "Standardizer",
    "SymMatrix",
    "TimingResult",
    "WeightLedger",
    "assemble_save",
    "bandwidth",
    "batch_estimate",
    "batch_estimate_many",
    "build_ledger",
    "compute_ratios",
    "empty_ledger",
    "errors",
    "extract_directions",
    "fit_batch",
    "fit_recursive",
    "generate",
    "holdout_eval",
    "inv_sqrt",
    "kernel_by_name",
    "load_checkpoint",
    "load_csv",
    "model_by_name",
    "r_squared",
    "r_squared_projected",
    "run_replications",
    "run_selfcheck",
    "run_timing",
    "sample_covariance",
    "save_checkpoint",
    "step_size",
    "sym_eigen",
    "truncate_density",
    "truncation_level",
    "update_fit",
]
