"""Runtime assume-guarantee monitor over cut-layer activations.

Proofs done under a dataset envelope hold only while every runtime
activation stays inside it; `check` tests one activation and reports every
index-level violation (box and adjacent-difference), `monitor_stream` drives
the check over a stream of network inputs, surviving malformed rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np

from .bounds import ActivationBounds
from .errors import ShapeError
from .network import Network, forward


@dataclass(frozen=True)
class Violation:
    kind: str  # "box" | "diff"
    index: int
    value: float
    bound_lo: float
    bound_hi: float


@dataclass(frozen=True)
class MonitorReport:
    contained: bool
    violations: tuple
    sample_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "violations", tuple(self.violations))
        if self.contained != (len(self.violations) == 0):
            raise ValueError("contained must hold exactly when violations is empty")


@dataclass(frozen=True)
class StreamError:
    sample_id: str
    message: str


def check(
    bounds: ActivationBounds,
    activation: Sequence[float],
    tolerance: float = 0.0,
    sample_id: str = "",
) -> MonitorReport:
    """List every box/diff violation beyond `tolerance` (all, not just first)."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    v = np.asarray(activation, dtype=np.float64)
    if v.shape != bounds.lo.shape:
        raise ShapeError(
            f"activation dim {v.shape} does not match bounds dim {bounds.lo.shape}"
        )
    violations: List[Violation] = []
    for i in range(v.shape[0]):
        if v[i] < bounds.lo[i] - tolerance or v[i] > bounds.hi[i] + tolerance:
            violations.append(
                Violation("box", i, float(v[i]), float(bounds.lo[i]), float(bounds.hi[i]))
            )
    if bounds.has_diffs:
        d = np.diff(v)
        for i in range(d.shape[0]):
            if d[i] < bounds.diff_lo[i] - tolerance or d[i] > bounds.diff_hi[i] + tolerance:
                violations.append(
                    Violation(
                        "diff", i, float(d[i]),
                        float(bounds.diff_lo[i]), float(bounds.diff_hi[i]),
                    )
                )
    return MonitorReport(
        contained=not violations, violations=tuple(violations), sample_id=sample_id
    )


# check_containment is the boolean convenience used by the public API
def check_containment(
    bounds: ActivationBounds, activation: Sequence[float], tolerance: float = 0.0
) -> bool:
    return check(bounds, activation, tolerance).contained


def monitor_stream(
    net: Optional[Network],
    bounds: ActivationBounds,
    rows: Iterable[Sequence[float]],
    tolerance: float = 0.0,
    precomputed: bool = False,
) -> Iterator[Union[MonitorReport, StreamError]]:
    """One report per row, in order; malformed rows yield StreamError.

    Rows are network inputs run through f^(l) unless `precomputed` marks them
    as cut-layer activations already.
    """
    for idx, row in enumerate(rows):
        sid = str(idx)
        try:
            v = np.asarray(row, dtype=np.float64)
            if precomputed:
                act = v
            else:
                if net is None:
                    raise ShapeError("a network is required to map inputs to the cut")
                act = forward(net, v, 0, bounds.layer)
            yield check(bounds, act, tolerance, sample_id=sid)
        except (ShapeError, ValueError) as exc:
            yield StreamError(sample_id=sid, message=str(exc))


def report_to_obj(report: Union[MonitorReport, StreamError]) -> dict:
    if isinstance(report, StreamError):
        return {"sample_id": report.sample_id, "error": report.message}
    return {
        "sample_id": report.sample_id,
        "contained": report.contained,
        "violations": [
            {
                "kind": v.kind,
                "index": v.index,
                "value": v.value,
                "bound_lo": v.bound_lo,
                "bound_hi": v.bound_hi,
            }
            for v in report.violations
        ],
    }
