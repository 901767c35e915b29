"""Dense bounded-variable two-phase simplex.

minimize c.x  subject to  A x (<=|=|>=) b,  lo <= x <= hi  (+-inf allowed)

Standardization: one slack per row turns every relation into an equality
(<= gives slack in [0,inf), >= in (-inf,0], = pinned at [0,0]); rows whose
initial residual the slack cannot absorb get a phase-1 artificial column.
Dantzig pricing switches to Bland's rule after 10*(m+n) iterations; feasibility
tolerance 1e-7, reduced-cost tolerance 1e-7, pivots below 1e-11 are never
taken (NumericalBreakdown when no alternative exists).  Optimal points are
re-checked against every constraint independently of the solver state —
a failed recheck raises rather than returning a silently wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import NumericalBreakdownError, ShapeError

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
STOP_SUM = 1e-9  # phase-1 early-exit infeasibility
TINY = 1e-11  # pivot magnitude floor
MAX_ITER = 50_000

REL_LE = -1
REL_EQ = 0
REL_GE = 1

_REL_OF_STR = {"<=": REL_LE, "=": REL_EQ, ">=": REL_GE}
_STR_OF_REL = {REL_LE: "<=", REL_EQ: "=", REL_GE: ">="}

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """Mutable LP builder; variables indexed 0..num_vars-1, default free."""

    num_vars: int
    names: Optional[List[str]] = None
    objective: np.ndarray = field(init=False)
    lo: np.ndarray = field(init=False)
    hi: np.ndarray = field(init=False)
    rows: List[Dict[int, float]] = field(init=False, default_factory=list)
    rels: List[int] = field(init=False, default_factory=list)
    rhs: List[float] = field(init=False, default_factory=list)

    def __post_init__(self) -> None:
        if self.num_vars < 0:
            raise ShapeError("num_vars must be >= 0")
        self.objective = np.zeros(self.num_vars)
        self.lo = np.full(self.num_vars, -np.inf)
        self.hi = np.full(self.num_vars, np.inf)

    def set_bounds(self, j: int, lo: float, hi: float) -> None:
        self.lo[j] = lo
        self.hi[j] = hi

    def add_constraint(
        self, coeffs: Union[Dict[int, float], Sequence[float]], rel: str, rhs: float
    ) -> None:
        if rel not in _REL_OF_STR:
            raise ValueError(f"relation must be one of <=, =, >=; got {rel!r}")
        if not isinstance(coeffs, dict):
            coeffs = {j: float(v) for j, v in enumerate(coeffs) if v != 0.0}
        for j, v in coeffs.items():
            if not 0 <= j < self.num_vars:
                raise ShapeError(f"constraint references variable {j} of {self.num_vars}")
            if np.isnan(v):
                raise ValueError("NaN constraint coefficient")
        if np.isnan(rhs):
            raise ValueError("NaN constraint rhs")
        self.rows.append(dict(coeffs))
        self.rels.append(_REL_OF_STR[rel])
        self.rhs.append(float(rhs))

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def to_dense(self) -> tuple:
        A = np.zeros((self.num_rows, self.num_vars))
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                A[i, j] = v
        return (
            self.objective.copy(),
            A,
            np.array(self.rels, dtype=np.int8),
            np.array(self.rhs, dtype=np.float64),
            self.lo.copy(),
            self.hi.copy(),
        )

    def name_of(self, j: int) -> str:
        if self.names is not None and j < len(self.names):
            return self.names[j]
        return f"x{j}"


@dataclass(frozen=True)
class LpOutcome:
    status: str
    point: Optional[np.ndarray] = None
    objective_value: Optional[float] = None


def _initial_state(c, A, rels, b, lo, hi):
    """Build tableau, basis, and statuses for the initial (slack) basis."""
    m, n = A.shape
    slack_lo = np.where(rels == REL_LE, 0.0, np.where(rels == REL_GE, -np.inf, 0.0))
    slack_hi = np.where(rels == REL_LE, np.inf, np.where(rels == REL_GE, 0.0, 0.0))

    vstat_x = np.where(np.isfinite(lo), 1, np.where(np.isfinite(hi), 2, 3))
    val = np.where(vstat_x == 1, lo, np.where(vstat_x == 2, hi, 0.0))
    resid = b - A @ val if n > 0 else b.copy()

    # rows whose slack can absorb the residual keep the slack basic; the
    # rest park the slack at its nearest bound and get an artificial
    feas = (resid >= slack_lo) & (resid <= slack_hi)
    s_val = np.minimum(np.maximum(resid, slack_lo), slack_hi)
    leftover = resid - s_val
    art_rows = np.nonzero(~feas)[0]
    n_art = art_rows.shape[0]
    sigma = np.where(leftover[art_rows] > 0, 1.0, -1.0)

    vstat_s = np.where(feas, 0, np.where(resid < slack_lo, 1, 2)).astype(np.int64)
    basis = np.where(feas, n + np.arange(m), 0).astype(np.int64)
    basis[art_rows] = n + m + np.arange(n_art)
    xB = np.where(feas, resid, np.abs(leftover))

    N = n + m + n_art
    T = np.zeros((m, N))
    T[:, :n] = A
    T[:, n : n + m] = np.eye(m)
    T[art_rows, basis[art_rows]] = sigma
    T[art_rows, :] *= sigma[:, None]  # B^-1 row scaling; artificial col -> +1

    lo_all = np.concatenate([lo, slack_lo, np.zeros(n_art)])
    hi_all = np.concatenate([hi, slack_hi, np.full(n_art, np.inf)])
    vstat_all = np.concatenate([vstat_x.astype(np.int64), vstat_s, np.zeros(n_art, dtype=np.int64)])
    return T, xB, basis, vstat_all, lo_all, hi_all, n_art


def _extract(vstat, lo_all, hi_all, basis, xB, n):
    x_all = np.where(vstat == 1, lo_all, np.where(vstat == 2, hi_all, 0.0))
    x_all[basis] = xB
    return x_all[:n]


def _recheck(x, A, rels, b, lo, hi) -> Optional[str]:
    if ((x < lo - FEAS_TOL) | (x > hi + FEAS_TOL)).any():
        return "variable bound violated beyond 1e-7"
    ax = A @ x if x.shape[0] > 0 else np.zeros(A.shape[0])
    for i in range(A.shape[0]):
        d = ax[i] - b[i]
        if rels[i] == REL_LE and d > FEAS_TOL:
            return f"row {i}: <= violated by {d:.3e}"
        if rels[i] == REL_GE and -d > FEAS_TOL:
            return f"row {i}: >= violated by {-d:.3e}"
        if rels[i] == REL_EQ and abs(d) > FEAS_TOL:
            return f"row {i}: = violated by {abs(d):.3e}"
    return None


def solve_dense(c, A, rels, b, lo, hi, kernel=None, check: bool = True) -> LpOutcome:
    """Solve one dense LP; raises NumericalBreakdownError, never lies."""
    run = kernels.run_phase if kernel is None else kernel
    c = np.ascontiguousarray(c, dtype=np.float64)
    A = np.ascontiguousarray(A, dtype=np.float64)
    rels = np.asarray(rels, dtype=np.int8)
    b = np.ascontiguousarray(b, dtype=np.float64)
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,) or rels.shape != (m,):
        raise ShapeError("objective/rhs/relation shapes do not match A")
    if lo.shape != (n,) or hi.shape != (n,):
        raise ShapeError("bound shapes do not match variable count")
    if np.isnan(c).any() or np.isnan(A).any() or np.isnan(b).any():
        raise ValueError("LP contains NaN data")
    if (lo > hi).any():
        return LpOutcome(INFEASIBLE)

    T, xB, basis, vstat, lo_all, hi_all, n_art = _initial_state(c, A, rels, b, lo, hi)
    N = T.shape[1]
    dantzig_limit = 10 * (m + N)

    if n_art > 0:
        c1 = np.zeros(N)
        c1[n + m :] = 1.0
        z = c1 - np.dot(c1[basis], T)
        z[basis] = 0.0
        status, _ = run(
            T, z, xB, basis, vstat, lo_all, hi_all,
            n + m, 1, STOP_SUM, dantzig_limit, MAX_ITER, OPT_TOL, TINY,
        )
        if status in (kernels.TINY_PIVOT, kernels.ITER_LIMIT):
            raise NumericalBreakdownError(f"phase 1 stalled (kernel status {status})")
        if status == kernels.UNBOUNDED:
            raise NumericalBreakdownError("phase-1 objective reported unbounded")
        infeas = 0.0
        for i in range(m):
            if basis[i] >= n + m:
                infeas += xB[i]
        if infeas > STOP_SUM:
            return LpOutcome(INFEASIBLE)
        # freeze artificials (basic or not) so phase 2 cannot reopen them
        lo_all[n + m :] = 0.0
        hi_all[n + m :] = 0.0

    if np.any(c != 0.0):
        c2 = np.concatenate([c, np.zeros(N - n)])
        z = c2 - np.dot(c2[basis], T)
        z[basis] = 0.0
        status, _ = run(
            T, z, xB, basis, vstat, lo_all, hi_all,
            n + m, 0, -1.0, dantzig_limit, MAX_ITER, OPT_TOL, TINY,
        )
        if status == kernels.UNBOUNDED:
            return LpOutcome(UNBOUNDED)
        if status != kernels.OPTIMAL:
            raise NumericalBreakdownError(f"phase 2 stalled (kernel status {status})")

    x = _extract(vstat, lo_all, hi_all, basis, xB, n)
    if check:
        msg = _recheck(x, A, rels, b, lo, hi)
        if msg is not None:
            raise NumericalBreakdownError(f"optimal point failed recheck: {msg}")
    return LpOutcome(OPTIMAL, x, float(np.dot(c, x)))


def lp_solve(lp: LinearProgram, kernel=None, check: bool = True) -> LpOutcome:
    return solve_dense(*lp.to_dense(), kernel=kernel, check=check)


def format_lp(lp: LinearProgram) -> str:
    """Plain-text dump, one constraint per line (for --debug-lp-dump)."""

    def term(j: int, v: float) -> str:
        return f"{v:+g}*{lp.name_of(j)}"

    lines = []
    obj = [term(j, v) for j, v in enumerate(lp.objective) if v != 0.0]
    lines.append("minimize " + (" ".join(obj) if obj else "0"))
    lines.append("subject to")
    for row, rel, rhs in zip(lp.rows, lp.rels, lp.rhs):
        body = " ".join(term(j, row[j]) for j in sorted(row))
        lines.append(f"  {body or '0'} {_STR_OF_REL[rel]} {rhs:g}")
    lines.append("bounds")
    for j in range(lp.num_vars):
        lines.append(f"  {lp.lo[j]:g} <= {lp.name_of(j)} <= {lp.hi[j]:g}")
    return "\n".join(lines) + "\n"
