"""Self-adaptive CCA for unsupervised auditory attention decoding."""

from ._kernels import BACKEND
from .covariance import StatsBlocks, build_single, build_soft, build_two
from .errors import (
    AadError,
    DegenerateFitWarning,
    DimensionMismatch,
    InvalidConfig,
    InvalidProbability,
    MalformedFile,
    NotPositiveDefinite,
    PlanInfeasible,
    SegmentTooShort,
)
from .experiment import ExperimentPlan, ExperimentReport, emit_csv, run_experiment, summarize
from .labeler import CorrelationModel, SoftLabels, fit_correlation_model, posterior, soft_labels
from .pencil import PencilPair, PencilSolution, apply_ridge, solve_pencil
from .scoring import CcaModel, ScorePair, classify_all, classify_segment, score_segment
from .signals import LagSpec, SegmentSet, TimeSeries, center, lag_embed, read_matrix, write_matrix
from .synth import SynthConfig, SynthDataset, generate
from .trainers import METHODS, TrainConfig, TrainResult, predict, train

__version__ = "0.1.0"
