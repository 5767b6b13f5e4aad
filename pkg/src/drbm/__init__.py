"""Discriminative RBM classifiers with generalised hidden-unit state sets.

The classifier models P(class | input) exactly, with per-hidden-unit closed
forms for four families of hidden states: {0,1}, {-1,+1}, integer 0..N, and
the non-negative-integer (rectified-linear) limit.  Training is plain SGD on
the conditional log-likelihood with validation-driven learning-rate control,
and a brute-force enumeration oracle backs every closed form.
"""

from .activations import (
    DomainError,
    StateKind,
    StateSet,
    enumerate_states,
    log_state_sum,
    mean_state,
)
from .data import (
    DataFormatError,
    Dataset,
    load_20news,
    load_csv_dataset,
    load_dataset_cache,
    load_mnist,
    load_usps,
    make_blobs_dataset,
    save_dataset_cache,
    toy_two_class,
)
from .evaluate import (
    ExperimentResult,
    GridSpec,
    aggregate_seeds,
    average_loss,
    grid_search,
)
from .model import (
    ClassConditional,
    DrbmParams,
    ModelFormatError,
    class_log_scores,
    gradient,
    load_model,
    log_proba_batch,
    nll,
    predict_batch,
    predict_log_proba,
    save_model,
)
from .oracle import EnumerationCapError, JointRbmView
from .training import (
    Action,
    NumericError,
    ScheduleState,
    TerminationReason,
    TrainConfig,
    TrainReport,
    early_stopping_step,
    init_params,
    sgd_epoch,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ClassConditional",
    "DataFormatError",
    "Dataset",
    "DomainError",
    "DrbmParams",
    "EnumerationCapError",
    "ExperimentResult",
    "GridSpec",
    "JointRbmView",
    "ModelFormatError",
    "NumericError",
    "ScheduleState",
    "StateKind",
    "StateSet",
    "TerminationReason",
    "TrainConfig",
    "TrainReport",
    "aggregate_seeds",
    "average_loss",
    "class_log_scores",
    "early_stopping_step",
    "enumerate_states",
    "gradient",
    "grid_search",
    "init_params",
    "load_20news",
    "load_csv_dataset",
    "load_dataset_cache",
    "load_mnist",
    "load_model",
    "load_usps",
    "log_proba_batch",
    "log_state_sum",
    "make_blobs_dataset",
    "mean_state",
    "nll",
    "predict_batch",
    "predict_log_proba",
    "save_dataset_cache",
    "save_model",
    "sgd_epoch",
    "toy_two_class",
    "train",
]
