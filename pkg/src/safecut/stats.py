"""Table-1 confusion estimates and the (1-gamma) statistical guarantee.

Cells are indexed (ground truth, characterizer decision): n11 alpha,
n10 gamma (missed analyses — the dangerous cell), n01 beta (false alarms),
n00 the remainder.  The point guarantee is 1 - gamma-hat; a Clopper-Pearson
exact upper bound on gamma is reported alongside it so small evaluation
sets cannot overstate the claim.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import beta as _beta_dist

from .characterizer import Characterizer
from .errors import EmptyDatasetError, InvalidDeltaError, UnlabeledDataError
from .milp import RiskCondition
from .network import Dataset, Network, forward_batch


@dataclass(frozen=True)
class ConfusionEstimate:
    n11: int
    n10: int
    n01: int
    n00: int

    def __post_init__(self) -> None:
        if min(self.n11, self.n10, self.n01, self.n00) < 0:
            raise ValueError("confusion counts must be nonnegative")
        if self.n == 0:
            raise EmptyDatasetError("confusion estimate needs at least one sample")

    @property
    def n(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00

    @property
    def alpha(self) -> float:
        return self.n11 / self.n

    @property
    def gamma(self) -> float:
        return self.n10 / self.n

    @property
    def beta(self) -> float:
        return self.n01 / self.n


@dataclass(frozen=True)
class StatisticalGuarantee:
    point_guarantee: float
    conservative_guarantee: float
    confidence: float
    premise_checked: bool


def estimate_confusion(
    net: Network, h: Characterizer, layer: int, eval_data: Dataset
) -> ConfusionEstimate:
    """Fill the four cells from (label, decide(h, f^(l)(in))) per sample."""
    if eval_data.labels is None:
        raise UnlabeledDataError("confusion estimation needs labeled data")
    if len(eval_data) == 0:
        raise EmptyDatasetError("confusion estimation needs at least one sample")
    feats = forward_batch(net, eval_data.inputs, 0, layer)
    logits = forward_batch(h.head, feats)[:, 0]
    pred = (logits >= 0.0).astype(np.int64)
    truth = eval_data.labels
    return ConfusionEstimate(
        n11=int(((truth == 1) & (pred == 1)).sum()),
        n10=int(((truth == 1) & (pred == 0)).sum()),
        n01=int(((truth == 0) & (pred == 1)).sum()),
        n00=int(((truth == 0) & (pred == 0)).sum()),
    )


def gamma_upper_bound(n10: int, n: int, delta: float) -> float:
    """Clopper-Pearson exact one-sided upper bound on gamma at level 1-delta."""
    if not 0.0 < delta < 1.0:
        raise InvalidDeltaError(f"delta must lie in (0, 1), got {delta}")
    if n <= 0:
        raise EmptyDatasetError("upper bound needs n >= 1")
    if n10 >= n:
        return 1.0
    return float(_beta_dist.ppf(1.0 - delta, n10 + 1, n - n10))


def guarantee(
    estimate: ConfusionEstimate, delta: float, premise: bool = False
) -> StatisticalGuarantee:
    """Point (1 - gamma-hat) and conservative (1 - gamma_upper) guarantees."""
    upper = gamma_upper_bound(estimate.n10, estimate.n, delta)
    return StatisticalGuarantee(
        point_guarantee=1.0 - estimate.gamma,
        conservative_guarantee=1.0 - upper,
        confidence=1.0 - delta,
        premise_checked=premise,
    )


def check_premise(
    net: Network, h: Characterizer, layer: int, data: Dataset, risk: RiskCondition
) -> bool:
    """The footnote premise: every omitted in-phi sample is itself output-safe.

    Samples with label 1 but h=0 slip past the verification envelope; the
    conditional claim needs each of them to avoid the risk set exactly.
    """
    if data.labels is None:
        raise UnlabeledDataError("premise check needs labeled data")
    feats = forward_batch(net, data.inputs, 0, layer)
    logits = forward_batch(h.head, feats)[:, 0]
    omitted = (data.labels == 1) & (logits < 0.0)
    if not omitted.any():
        return True
    outputs = forward_batch(net, data.inputs[omitted])
    return not any(risk.holds_exact(out) for out in outputs)


def stats_report_obj(
    estimate: ConfusionEstimate, g: StatisticalGuarantee
) -> dict:
    return {
        "counts": {
            "n11": estimate.n11,
            "n10": estimate.n10,
            "n01": estimate.n01,
            "n00": estimate.n00,
        },
        "alpha": estimate.alpha,
        "beta": estimate.beta,
        "gamma": estimate.gamma,
        "point_guarantee": g.point_guarantee,
        "conservative_guarantee": g.conservative_guarantee,
        "confidence": g.confidence,
        "premise_checked": g.premise_checked,
    }
