"""safecut: safety verification for feed-forward perception networks.

The toolkit splits a network at a *cut layer*, characterizes the reachable
set of cut-layer activations from data, and verifies output-side safety
properties exactly with a MILP encoding over that envelope.  A runtime
monitor checks the same envelope online.
"""

from .bounds import ActivationBounds, dataset_bounds, static_bounds, widen
from .characterizer import Characterizer, TrainConfig, train_characterizer
from .errors import (
    DegenerateLabelsError,
    EmptyDatasetError,
    InvalidDeltaError,
    NumericalBreakdownError,
    ParseError,
    SafecutError,
    ShapeError,
    UnboundedBigMError,
    UnlabeledDataError,
    UnsupportedLayerError,
)
from .milp import RiskCondition, SafetyQuery, encode
from .monitor import MonitorReport, check_containment, monitor_stream
from .network import BatchNorm, Dataset, Dense, Network, Relu, load_network, save_network
from .stats import ConfusionEstimate, StatisticalGuarantee, estimate_confusion, guarantee
from .verifier import Budget, Verdict, verify

__version__ = "0.1.0"

__all__ = [
    "ActivationBounds",
    "BatchNorm",
    "Budget",
    "Characterizer",
    "ConfusionEstimate",
    "Dataset",
    "DegenerateLabelsError",
    "Dense",
    "EmptyDatasetError",
    "InvalidDeltaError",
    "MonitorReport",
    "Network",
    "NumericalBreakdownError",
    "ParseError",
    "Relu",
    "RiskCondition",
    "SafecutError",
    "SafetyQuery",
    "ShapeError",
    "StatisticalGuarantee",
    "TrainConfig",
    "UnboundedBigMError",
    "UnlabeledDataError",
    "UnsupportedLayerError",
    "Verdict",
    "check_containment",
    "dataset_bounds",
    "encode",
    "estimate_confusion",
    "guarantee",
    "load_network",
    "monitor_stream",
    "save_network",
    "static_bounds",
    "train_characterizer",
    "verify",
    "widen",
]
