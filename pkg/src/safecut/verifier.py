"""Branch-and-bound verification over ReLU indicator variables.

Each node relaxes the remaining binaries to [0,1] and solves the LP
feasibility problem (phase-1 only — the query asks existence, nothing is
optimized).  Infeasible nodes prune; a feasible point with all binaries
integral is replayed through the real network before being believed.
Feasibility vertices like to sit exactly on the logit = 0 face, where the
replay's exact decide() can flip on a one-ulp recompute, so a leaf whose
candidate fails replay is re-solved once with a logit-maximizing objective
to pull the candidate into the interior of the phi region.  A leaf that
still produces no replayable point poisons any Safe conclusion: the final
verdict degrades to unknown instead (never discard-and-certify).
Exploration is depth-first, branching on the binary nearest 0.5 (lowest
index on ties) with the closer phase first, so witnesses surface early.

Verdicts: safe — the tree was exhausted; unsafe — a replayed witness exists;
unknown — the node/time budget ran out or an LP broke down numerically
(an unsound prune must never masquerade as a safety proof).
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .bounds import contains
from .characterizer import decide
from .errors import NumericalBreakdownError, ShapeError
from .lp import INFEASIBLE, OPTIMAL, solve_dense
from .milp import INTEGRALITY_TOL, MilpProblem, SafetyQuery, encode
from .network import Network, forward

SAFE = "safe"
UNSAFE = "unsafe"
UNKNOWN = "unknown"

WITNESS_TOL = 1e-6


@dataclass(frozen=True)
class Budget:
    max_nodes: int = 200_000
    max_seconds: float = float("inf")


@dataclass
class Verdict:
    status: str
    conditional: bool
    witness: Optional[np.ndarray] = None
    witness_output: Optional[np.ndarray] = None
    stats: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


def replay_witness(
    net: Network, query: SafetyQuery, witness, tol: float = WITNESS_TOL
) -> dict:
    """Recompute the three membership facts independently of the solver."""
    w = np.asarray(witness, dtype=np.float64)
    if w.shape != (query.bounds.dim,):
        raise ShapeError(
            f"witness shape {w.shape} does not match cut dim {query.bounds.dim}"
        )
    output = forward(net, w, query.cut_layer, net.depth)
    return {
        "in_bounds": contains(query.bounds, w, tol),
        "characterizer": decide(query.characterizer, w),
        "risk_satisfied": query.risk.holds_relaxed(output, tol),
        "output": output,
    }


def _pick_branch(vals: np.ndarray, fixed: np.ndarray) -> int:
    """Unfixed binary nearest 0.5; lowest index breaks ties."""
    dist = np.abs(vals - 0.5)
    dist[fixed] = np.inf
    return int(np.argmin(dist))


class _Search:
    """Shared state for the node-processing loop (1 or more workers)."""

    def __init__(self, net, query, prob: MilpProblem, budget: Budget, kernel):
        self.net = net
        self.query = query
        self.prob = prob
        self.budget = budget
        self.kernel = kernel
        self.c, self.A, self.rels, self.b, self.lo0, self.hi0 = prob.lp.to_dense()
        self.bin_cols = np.array(prob.binaries, dtype=np.int64)
        self.cut_dim = len(prob.cut_cols)
        self.t0 = time.monotonic()
        self.nodes = 0
        self.lp_solves = 0
        self.warnings: List[str] = []
        self.witness: Optional[np.ndarray] = None
        self.witness_output: Optional[np.ndarray] = None
        self.exhausted_budget = False
        self.breakdown = False
        self.incomplete = False  # a feasible leaf yielded no replayable witness
        self._lock = threading.Lock()  # counters/witness under multi-worker runs

    def out_of_budget(self) -> bool:
        return (
            self.nodes >= self.budget.max_nodes
            or time.monotonic() - self.t0 > self.budget.max_seconds
        )

    def process(self, lo: np.ndarray, hi: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Solve one node; returns child nodes (near phase last = popped first)."""
        with self._lock:
            self.nodes += 1
            self.lp_solves += 1
        try:
            out = solve_dense(
                self.c, self.A, self.rels, self.b, lo, hi, kernel=self.kernel
            )
        except NumericalBreakdownError as exc:
            with self._lock:
                self.breakdown = True
                self.warnings.append(f"lp breakdown, node discarded: {exc}")
            return []
        if out.status == INFEASIBLE:
            return []
        x = out.point

        k = self.bin_cols.shape[0]
        if k:
            vals = x[self.bin_cols]
            fixed = lo[self.bin_cols] == hi[self.bin_cols]
            integral = np.abs(vals - np.round(vals)) <= INTEGRALITY_TOL
        else:
            vals = np.zeros(0)
            fixed = np.ones(0, dtype=bool)
            integral = np.ones(0, dtype=bool)

        if integral.all():
            w, rep, ok = self._try_witness(x[: self.cut_dim])
            if not ok and fixed.all():
                for cand in self._polish_candidates(x, lo, hi):
                    w, rep, ok = self._try_witness(cand)
                    if ok:
                        break
            if ok:
                with self._lock:
                    if self.witness is None:  # first witness wins
                        self.witness = w
                        self.witness_output = rep["output"]
                return []
            if fixed.all():
                with self._lock:
                    self.incomplete = True
                    self.warnings.append(
                        "unreplayable-leaf: feasible leaf produced no "
                        "replayable witness; Safe cannot be certified"
                    )
                return []
            # integral by luck but not yet fixed — keep branching

        j = _pick_branch(vals, fixed)
        near = 1.0 if vals[j] > 0.5 else 0.0
        col = self.bin_cols[j]
        children = []
        for phase in (1.0 - near, near):  # near pushed last, popped first
            clo, chi = lo.copy(), hi.copy()
            clo[col] = phase
            chi[col] = phase
            children.append((clo, chi))
        return children

    def _try_witness(self, cand: np.ndarray):
        w = np.clip(cand, self.query.bounds.lo, self.query.bounds.hi)
        rep = replay_witness(self.net, self.query, w)
        ok = rep["in_bounds"] and rep["characterizer"] == 1 and rep["risk_satisfied"]
        return w, rep, ok

    def _polish_candidates(self, x: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        """Fallback witness candidates for an all-fixed leaf that failed replay.

        The zero-objective solve lands on an arbitrary vertex, frequently on
        the logit = 0 face where replay's exact decide() is one rounding away
        from rejecting a genuine witness.  Two remedies, tried in order:
        decimal-snapping the candidate (simplex eliminations leave ~1e-15
        dirt on coordinates that are really short rationals), and re-solving
        the leaf with a logit-maximizing objective to move the candidate as
        deep into the phi region as the leaf allows.
        """
        for digits in (12, 9, 6):
            yield np.round(x[: self.cut_dim], digits)
        with self._lock:
            self.lp_solves += 1
        c = np.zeros_like(self.c)
        c[self.prob.logit_col] = -1.0  # minimize -logit
        try:
            out = solve_dense(
                c, self.A, self.rels, self.b, lo, hi, kernel=self.kernel
            )
        except NumericalBreakdownError as exc:
            with self._lock:
                self.breakdown = True
                self.warnings.append(f"lp breakdown during witness polish: {exc}")
            return
        if out.status != OPTIMAL:
            return
        polished = out.point[: self.cut_dim]
        yield polished
        for digits in (12, 9, 6):
            yield np.round(polished, digits)


def _run_serial(search: _Search) -> None:
    stack = [(search.lo0.copy(), search.hi0.copy())]
    while stack:
        if search.witness is not None:
            return
        if search.out_of_budget():
            search.exhausted_budget = True
            return
        lo, hi = stack.pop()
        stack.extend(search.process(lo, hi))


def _run_parallel(search: _Search, workers: int) -> None:
    lock = threading.Lock()
    cv = threading.Condition(lock)
    stack = [(search.lo0.copy(), search.hi0.copy())]
    active = [0]
    stop = [False]

    def loop() -> None:
        while True:
            with cv:
                while not stack and active[0] > 0 and not stop[0]:
                    cv.wait()
                if stop[0] or (not stack and active[0] == 0):
                    cv.notify_all()
                    return
                if search.witness is not None or search.out_of_budget():
                    search.exhausted_budget = search.witness is None
                    stop[0] = True
                    cv.notify_all()
                    return
                node = stack.pop()
                active[0] += 1
            children = search.process(*node)
            with cv:
                stack.extend(children)
                active[0] -= 1
                cv.notify_all()

    threads = [threading.Thread(target=loop, daemon=True) for _ in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


def verify(
    net: Network,
    query: SafetyQuery,
    budget: Budget = Budget(),
    workers: int = 1,
    kernel=None,
) -> Verdict:
    """Decide the safety query; see module docstring for semantics."""
    prob = encode(net, query)
    search = _Search(net, query, prob, budget, kernel)

    if workers <= 1:
        _run_serial(search)
    else:
        _run_parallel(search, workers)

    wall = time.monotonic() - search.t0
    stats = {
        "nodes_explored": search.nodes,
        "lp_solves": search.lp_solves,
        "wall_time": wall,
    }
    conditional = query.bounds.provenance == "dataset"

    if search.witness is not None:
        warnings = list(search.warnings)
        boundary = query.risk.boundary_clauses(search.witness_output)
        if boundary:
            warnings.append(
                "boundary_witness: witness sits exactly on the boundary of "
                f"strict clause(s) {boundary}"
            )
        return Verdict(
            status=UNSAFE,
            conditional=conditional,
            witness=search.witness,
            witness_output=search.witness_output,
            stats=stats,
            warnings=warnings,
        )
    if search.exhausted_budget:
        search.warnings.append("budget exhausted before the tree was closed")
        return Verdict(
            status=UNKNOWN, conditional=conditional, stats=stats,
            warnings=search.warnings,
        )
    if search.breakdown or search.incomplete:
        search.warnings.append(
            "search tree incomplete (numerical breakdown or unreplayable "
            "leaf); cannot certify"
        )
        return Verdict(
            status=UNKNOWN, conditional=conditional, stats=stats,
            warnings=search.warnings,
        )
    return Verdict(
        status=SAFE, conditional=conditional, stats=stats, warnings=search.warnings,
    )
