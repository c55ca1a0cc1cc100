"""Restricted master problem: LP relaxation over the pooled columns and
active triple cuts (primal and dual optima), plus the exact restricted ILP
used at termination.

The LP is handed to HiGHS via scipy.optimize.linprog; superpixel and triple
multipliers are recovered from the constraint marginals.  The dual objective
maximizes -(sum lam + sum kappa) subject to nonnegative reduced costs, so the
LP value equals -(sum lam + sum kappa) at optimality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .model import (
    CellColumn,
    DualValues,
    FractionalSolution,
    Instance,
    Triple,
    triple_coefficient,
)

__all__ = ["MasterSolverError", "RestrictedProblem", "solve_restricted_lp", "solve_restricted_ilp", "MASTER_TOL"]

MASTER_TOL = 1e-9


class MasterSolverError(RuntimeError):
    """The LP backend failed to reach verified optimality."""


@dataclass(frozen=True)
class RestrictedProblem:
    """Current column pool and active cuts of the master problem."""

    pool: Tuple[CellColumn, ...]
    cuts: Tuple[Triple, ...]

    def __post_init__(self):
        pool = tuple(self.pool)
        cuts = tuple(self.cuts)
        members_seen = set()
        for cell in pool:
            if cell.members in members_seen:
                raise ValueError(f"duplicate cell {cell.members} in pool")
            members_seen.add(cell.members)
        if len(set(cuts)) != len(cuts):
            raise ValueError("duplicate triple cut")
        object.__setattr__(self, "pool", pool)
        object.__setattr__(self, "cuts", cuts)


def _constraint_matrix(instance: Instance, problem: RestrictedProblem) -> sp.csc_matrix:
    n = instance.n_superpixels
    ncols = len(problem.pool)
    nrows = n + len(problem.cuts)
    rows: List[int] = []
    cols: List[int] = []
    for j, cell in enumerate(problem.pool):
        for d in cell.members:
            rows.append(d)
            cols.append(j)
        for i, cut in enumerate(problem.cuts):
            if triple_coefficient(cut, cell.members):
                rows.append(n + i)
                cols.append(j)
    data = np.ones(len(rows), dtype=np.float64)
    return sp.csc_matrix((data, (rows, cols)), shape=(nrows, ncols))


def solve_restricted_lp(
    instance: Instance,
    problem: RestrictedProblem,
    a_ub: Optional[sp.csc_matrix] = None,
) -> Tuple[FractionalSolution, DualValues, float]:
    """Primal and dual optima of the restricted LP relaxation.

    ``a_ub`` may carry a prebuilt constraint matrix for the same problem
    (callers that grow the pool incrementally keep it assembled).
    """
    n = instance.n_superpixels
    if not problem.pool:
        return (
            FractionalSolution({}, 0.0),
            DualValues(np.zeros(n), {c: 0.0 for c in problem.cuts}),
            0.0,
        )
    costs = np.array([cell.cost for cell in problem.pool], dtype=np.float64)
    if a_ub is None:
        a_ub = _constraint_matrix(instance, problem)
    b_ub = np.ones(a_ub.shape[0])
    res = linprog(
        costs,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=(0, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status != 0:
        raise MasterSolverError(f"LP solve failed (status {res.status}): {res.message}")
    gamma_values = np.clip(res.x, 0.0, 1.0)
    value = float(res.fun)
    marginals = np.asarray(res.ineqlin.marginals, dtype=np.float64)
    lam = np.maximum(-marginals[:n], 0.0)
    kappa = {cut: float(max(-marginals[n + i], 0.0)) for i, cut in enumerate(problem.cuts)}
    duals = DualValues(lam, kappa)
    dual_value = -float(lam.sum()) - float(sum(kappa.values()))
    if abs(dual_value - value) > 1e-7 * (1.0 + abs(value)):
        raise MasterSolverError(
            f"primal/dual mismatch: primal {value}, dual {dual_value}"
        )
    solution = FractionalSolution(
        {cell: float(gamma_values[j]) for j, cell in enumerate(problem.pool)}, value
    )
    return solution, duals, value


def solve_restricted_ilp(
    instance: Instance,
    problem: RestrictedProblem,
    lower_bound: Optional[float] = None,
) -> Tuple[Tuple[CellColumn, ...], float]:
    """Exact optimum of the packing ILP restricted to the pooled columns.

    Triple cuts are implied for integral packings, so only disjointness is
    enforced.  ``lower_bound`` (e.g. the final LP value) allows the search to
    stop once the incumbent provably matches the optimum within MASTER_TOL.
    """
    candidates = [cell for cell in problem.pool if cell.cost < 0]
    candidates.sort(key=lambda c: (c.cost, c.members))
    ncols = len(candidates)
    masks = []
    for cell in candidates:
        m = 0
        for d in cell.members:
            m |= 1 << instance.check_id(d)
        masks.append(m)
    costs = [cell.cost for cell in candidates]
    suffix = [0.0] * (ncols + 1)
    for i in range(ncols - 1, -1, -1):
        suffix[i] = suffix[i + 1] + costs[i]

    best = 0.0
    best_chain: Tuple[int, ...] = ()
    chain: List[int] = []
    save_cur: List[float] = []
    used = 0
    cur = 0.0
    ptr = 0
    while True:
        if lower_bound is not None and best <= lower_bound + MASTER_TOL:
            break
        while ptr < ncols:
            if cur + suffix[ptr] >= best:
                ptr = ncols
                break
            if used & masks[ptr] == 0:
                save_cur.append(cur)
                chain.append(ptr)
                used |= masks[ptr]
                cur += costs[ptr]
                if cur < best:
                    best = cur
                    best_chain = tuple(chain)
                    if lower_bound is not None and best <= lower_bound + MASTER_TOL:
                        break
            ptr += 1
        if not chain or (lower_bound is not None and best <= lower_bound + MASTER_TOL):
            break
        q = chain.pop()
        cur = save_cur.pop()
        used &= ~masks[q]
        ptr = q + 1

    cells = tuple(sorted((candidates[i] for i in best_chain), key=lambda c: c.members))
    total = 0.0
    for cell in cells:
        total += cell.cost
    return cells, float(total)
