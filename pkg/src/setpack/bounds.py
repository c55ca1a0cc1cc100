"""Anytime bounds: the Lagrangian lower bound computed from per-anchor
pricing minima, greedy rounding of a fractional solution to a feasible
packing, and the normalized gap statistic."""

from __future__ import annotations

import math
from typing import Dict, Iterable, List, Sequence, Tuple

from .model import CellColumn, DualValues, FractionalSolution

__all__ = ["lagrangian_lower_bound", "round_upper_bound", "normalized_gap"]

_INTEGRALITY_TOL = 1e-9


def lagrangian_lower_bound(duals: DualValues, pricing_values: Sequence[float]) -> float:
    """Valid lower bound on the optimal packing for any nonnegative duals.

    ``pricing_values`` holds the exact per-anchor pricing optimum for every
    superpixel under these duals (+inf for anchors that admit no cell).
    """
    total = 0.0
    for kap in duals.kappa.values():
        total -= kap
    for lam in duals.lam:
        total -= lam
    for nu in pricing_values:
        if nu < 0.0:
            total += nu
    return float(total)


def round_upper_bound(
    solution: FractionalSolution,
    pool=None,
    integrality_tol: float = _INTEGRALITY_TOL,
) -> Tuple[Tuple[CellColumn, ...], float]:
    """Greedy rounding of a fractional solution to a disjoint set of cells.

    Repeatedly commits the fractional cell with the lowest weighted cost after
    discounting the weighted cost of everything it would knock out, then zeros
    all overlapping cells.  Integral inputs pass through unchanged.
    """
    gamma: Dict[CellColumn, float] = {}
    for cell, g in solution.gamma.items():
        if g >= 1.0 - integrality_tol:
            gamma[cell] = 1.0
        elif g <= integrality_tol:
            gamma[cell] = 0.0
        else:
            gamma[cell] = float(g)

    member_sets = {cell: set(cell.members) for cell in gamma}

    while True:
        fractional = [cell for cell, g in gamma.items() if 0.0 < g < 1.0]
        if not fractional:
            break
        best_cell = None
        best_score = math.inf
        for cell in fractional:
            score = cell.cost * gamma[cell]
            for other, g in gamma.items():
                if other is cell or g <= 0.0:
                    continue
                if member_sets[cell] & member_sets[other]:
                    score -= other.cost * g
            if score < best_score or (
                score == best_score
                and best_cell is not None
                and cell.members < best_cell.members
            ):
                best_score = score
                best_cell = cell
        gamma[best_cell] = 1.0
        for other in list(gamma):
            if other is not best_cell and gamma[other] > 0.0:
                if member_sets[best_cell] & member_sets[other]:
                    gamma[other] = 0.0

    selected = sorted(
        (cell for cell, g in gamma.items() if g == 1.0), key=lambda c: c.members
    )
    total = 0.0
    for cell in selected:
        total += cell.cost
    return tuple(selected), float(total)


def normalized_gap(ub: float, lb: float) -> float:
    """(ub - lb) / |lb|; zero when both bounds are zero, +inf when only lb is."""
    if lb == 0.0:
        return 0.0 if ub == 0.0 else math.inf
    return (ub - lb) / abs(lb)
