"""Column/row generation driver: alternate the restricted master LP, exact
per-anchor pricing, and triple separation until neither finds anything, then
extract a certified integral solution (or an anytime best-so-far one when an
iteration or time limit strikes first)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from . import accel
from .bounds import lagrangian_lower_bound, normalized_gap, round_upper_bound
from .master import RestrictedProblem, solve_restricted_ilp, solve_restricted_lp
from .model import CellColumn, DualValues, Instance, Triple, make_cell, triple_coefficient
from .pricing import _negative_member_sets, price_raw
from .separation import find_violated_triples

__all__ = ["SolveConfig", "IterationRecord", "SolveReport", "solve", "CERT_TOL"]

CERT_TOL = 1e-6


@dataclass(frozen=True)
class SolveConfig:
    eps_rc: float = 1e-9
    cut_tol: float = 1e-6
    max_cuts_per_iter: int = 1
    max_iterations: int = 1000
    thread_count: int = 0  # 0 means all available
    time_limit: Optional[float] = None
    # Weight kept on the stability center when pricing; 0 disables smoothing.
    # Vertex duals of the master LP oscillate badly on degenerate pools, so
    # pricing uses a convex combination with the best-bound duals seen so far
    # and falls back to the exact LP duals whenever the smoothed ones find
    # nothing (termination is always decided on exact duals).
    dual_smoothing: float = 0.9

    def __post_init__(self):
        if not self.eps_rc > 0 or not self.cut_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.max_cuts_per_iter < 1 or self.max_iterations < 1:
            raise ValueError("iteration limits must be positive")
        if self.thread_count < 0:
            raise ValueError("thread_count must be nonnegative")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if not 0.0 <= self.dual_smoothing < 1.0:
            raise ValueError("dual_smoothing must lie in [0, 1)")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    lp_value: float
    lagrangian_lb: float
    best_lb: float
    best_ub: float
    pool_size: int
    cut_count: int
    new_columns: int
    new_cuts: int
    wall_seconds: float


@dataclass(frozen=True)
class SolveReport:
    iterations: Tuple[IterationRecord, ...]
    cells: Tuple[CellColumn, ...]
    objective: float
    certified: bool
    converged: bool
    lower_bound: float
    upper_bound: float
    normalized_gap: float
    wall_seconds: float
    thread_count: int


def _feasible_center(instance: Instance) -> DualValues:
    # Closed-form multipliers that price every cell at >= omega: charge each
    # superpixel its unary gain plus half its negative pair gains.  A strong
    # starting point for the smoothing center (exactly dual feasible whenever
    # omega >= 0).
    indptr, _, data = instance.phi_csr()
    n = instance.n_superpixels
    lam = np.zeros(n)
    for d in range(n):
        s = instance.theta[d]
        for ptr in range(indptr[d], indptr[d + 1]):
            if data[ptr] < 0.0:
                s += 0.5 * data[ptr]
        lam[d] = max(0.0, -s)
    return DualValues(lam, {})


def _smooth_duals(center: DualValues, lp_duals: DualValues, alpha: float, cuts) -> DualValues:
    lam = alpha * center.lam + (1.0 - alpha) * lp_duals.lam
    kappa = {
        c: alpha * center.kappa.get(c, 0.0) + (1.0 - alpha) * lp_duals.kappa.get(c, 0.0)
        for c in cuts
    }
    return DualValues(lam, kappa)


def solve(
    instance: Instance,
    config: Optional[SolveConfig] = None,
    on_iteration: Optional[Callable[[IterationRecord], None]] = None,
) -> SolveReport:
    """Run column generation with triple cuts on ``instance``.

    Each iteration solves the restricted LP, prices every anchor (recording
    the Lagrangian lower bound and a rounded upper bound), and adds either
    new negative-reduced-cost columns or, when there are none, violated
    triples.  Convergence certifies the integral solution against the final
    LP value; hitting a limit yields an honest uncertified anytime result.
    """
    if config is None:
        config = SolveConfig()
    threads = config.thread_count if config.thread_count else accel.max_threads()
    effective_threads = accel.set_threads(threads) if accel.NUMBA_ENABLED else 1

    start = time.perf_counter()
    n = instance.n_superpixels
    pool: Dict[Tuple[int, ...], CellColumn] = {}
    cuts: List[Triple] = []
    records: List[IterationRecord] = []
    best_lb = -math.inf
    best_ub = 0.0
    best_cells: Tuple[CellColumn, ...] = ()
    priced_out = False  # exact pricing and separation both came up empty
    bound_closed = False
    solution = None
    duals = None
    lp_value = 0.0
    prev_lp: Optional[float] = None
    prev_added_cuts = False

    center: Optional[DualValues] = None
    center_lb = -math.inf
    smoothing_on = False
    alpha = config.dual_smoothing

    # Constraint matrix entries, grown as columns and cuts arrive.
    coo_rows: List[int] = []
    coo_cols: List[int] = []
    problem = RestrictedProblem((), ())
    problem_dirty = True
    ub_cells: Tuple[CellColumn, ...] = ()
    ub_value = 0.0

    iteration = 0
    while iteration < config.max_iterations:
        iteration += 1
        if problem_dirty:
            problem = RestrictedProblem(tuple(pool.values()), tuple(cuts))
            a_ub = sparse.csc_matrix(
                (
                    np.ones(len(coo_rows)),
                    (np.asarray(coo_rows, dtype=np.int64), np.asarray(coo_cols, dtype=np.int64)),
                ),
                shape=(n + len(cuts), len(pool)),
            )
            solution, duals, lp_value = solve_restricted_lp(instance, problem, a_ub=a_ub)
            ub_cells, ub_value = round_upper_bound(solution)
            problem_dirty = False

        # Degenerate pools stall the LP value while columns keep arriving;
        # from then on price against the smoothed best-bound duals instead of
        # the oscillating vertex duals.  A value jump right after adding a
        # cut is expected and does not count.
        if (
            not smoothing_on
            and config.dual_smoothing > 0
            and prev_lp is not None
            and not prev_added_cuts
            and lp_value >= prev_lp - 1e-9 * (1.0 + abs(prev_lp))
        ):
            smoothing_on = True
            if instance.omega >= 0:
                feas = _feasible_center(instance)
                feas_lb = -float(feas.lam.sum())
                if feas_lb > center_lb:
                    center_lb = feas_lb
                    center = feas
                best_lb = max(best_lb, feas_lb)
        prev_lp = lp_value

        exact_pricing = not (smoothing_on and center is not None and alpha > 0)
        price_duals = (
            duals if exact_pricing else _smooth_duals(center, duals, alpha, cuts)
        )
        raw = price_raw(instance, price_duals, cuts, thread_count=threads)
        lb = lagrangian_lower_bound(price_duals, raw.values)
        if lb > center_lb:
            center_lb = lb
            center = price_duals
        best_lb = max(best_lb, lb)

        new_cols = [
            make_cell(instance, ms)
            for ms in _negative_member_sets(raw, config.eps_rc)
            if ms not in pool
        ]
        if smoothing_on:
            if new_cols:
                alpha = min(config.dual_smoothing, alpha + 0.5 * (1.0 - alpha))
            elif not exact_pricing:
                # Misprice: the smoothed duals are fully feasible, so the
                # center advanced; step more boldly toward the LP duals next
                # time.  Columns and cuts wait for an exact pricing pass.
                alpha = max(0.0, alpha - 0.15)

        if ub_value < best_ub:
            best_ub = ub_value
            best_cells = ub_cells

        new_cuts: List[Triple] = []
        if not new_cols and exact_pricing:
            new_cuts = find_violated_triples(
                solution,
                existing=cuts,
                max_cuts=config.max_cuts_per_iter,
                tol=config.cut_tol,
            )
        for cell in new_cols:
            j = len(pool)
            pool[cell.members] = cell
            for d in cell.members:
                coo_rows.append(d)
                coo_cols.append(j)
            for i, cut in enumerate(cuts):
                if triple_coefficient(cut, cell.members):
                    coo_rows.append(n + i)
                    coo_cols.append(j)
        for cut in new_cuts:
            i = len(cuts)
            cuts.append(cut)
            for j, cell in enumerate(pool.values()):
                if triple_coefficient(cut, cell.members):
                    coo_rows.append(n + i)
                    coo_cols.append(j)
        if new_cols or new_cuts:
            problem_dirty = True
        prev_added_cuts = bool(new_cuts)

        record = IterationRecord(
            iteration=iteration,
            lp_value=lp_value,
            lagrangian_lb=lb,
            best_lb=best_lb,
            best_ub=best_ub,
            pool_size=len(pool),
            cut_count=len(cuts),
            new_columns=len(new_cols),
            new_cuts=len(new_cuts),
            wall_seconds=time.perf_counter() - start,
        )
        records.append(record)
        if on_iteration is not None:
            on_iteration(record)

        if not new_cols and not new_cuts and exact_pricing:
            priced_out = True
            break
        if best_ub <= best_lb + CERT_TOL * max(1.0, abs(best_lb)):
            # The anytime bounds already sandwich the incumbent; it is a
            # certified optimum even though pricing still churns.
            bound_closed = True
            break
        if config.time_limit is not None and time.perf_counter() - start > config.time_limit:
            break

    certified = False
    if priced_out:
        # All anchors price nonnegative and no cut is violated, so the final
        # LP value bounds the full problem from below.
        best_lb = max(best_lb, lp_value)
        integral = all(g <= 1e-9 or g >= 1.0 - 1e-9 for g in solution.gamma.values())
        if integral:
            cells = tuple(
                sorted(
                    (c for c, g in solution.gamma.items() if g >= 1.0 - 1e-9),
                    key=lambda c: c.members,
                )
            )
            value = 0.0
            for cell in cells:
                value += cell.cost
        else:
            problem = RestrictedProblem(tuple(pool.values()), tuple(cuts))
            cells, value = solve_restricted_ilp(instance, problem, lower_bound=lp_value)
        if value <= best_ub:
            best_ub = value
            best_cells = cells
        certified = best_ub <= lp_value + CERT_TOL * max(1.0, abs(lp_value))
    elif bound_closed:
        certified = True

    converged = priced_out or bound_closed
    gap = normalized_gap(best_ub, best_lb)
    return SolveReport(
        iterations=tuple(records),
        cells=best_cells,
        objective=best_ub,
        certified=certified,
        converged=converged,
        lower_bound=best_lb,
        upper_bound=best_ub,
        normalized_gap=gap,
        wall_seconds=time.perf_counter() - start,
        thread_count=effective_threads,
    )
