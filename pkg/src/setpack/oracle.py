"""Brute-force reference solver: enumerate every feasible cell, then find the
exact optimal packing by branching on the lowest uncovered superpixel with
memoization on the remaining-superpixel mask.

Deliberately independent of the column-generation machinery so the two can
cross-check each other.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

from .model import CellColumn, Instance, make_cell

__all__ = ["OracleSizeError", "enumerate_feasible_cells", "oracle_solve", "DEFAULT_ENUM_LIMIT"]

DEFAULT_ENUM_LIMIT = 1_000_000
DEFAULT_STATE_LIMIT = 2_000_000


class OracleSizeError(RuntimeError):
    """Instance too large for exhaustive solving; never silently truncated."""


def _check_enumerable(instance: Instance, limit: int) -> None:
    indptr, _ = instance.neighborhoods()
    total = 0
    for d in range(instance.n_superpixels):
        total += 1 << int(indptr[d + 1] - indptr[d])
        if total > limit:
            raise OracleSizeError(
                f"subset enumeration needs > {limit} candidate sets; "
                "instance is too large for the oracle"
            )


def enumerate_feasible_cells(instance: Instance, limit: int = DEFAULT_ENUM_LIMIT) -> List[CellColumn]:
    """All feasible cells, sorted by member tuple.

    Every feasible cell has an anchor, so enumerating anchor-containing
    subsets of each superpixel's neighborhood covers all of them.
    """
    _check_enumerable(instance, limit)
    seen: Dict[Tuple[int, ...], None] = {}
    for d in range(instance.n_superpixels):
        others = [int(x) for x in instance.neighbors(d) if int(x) != d]
        base_vol = instance.volumes[d]
        if base_vol > instance.max_volume:
            continue
        m = len(others)
        for mask in range(1 << m):
            members = [d]
            vol = base_vol
            ok = True
            for i in range(m):
                if mask >> i & 1:
                    members.append(others[i])
                    vol += instance.volumes[others[i]]
                    if vol > instance.max_volume:
                        ok = False
                        break
            if ok:
                seen.setdefault(tuple(sorted(members)), None)
    return [make_cell(instance, ms) for ms in sorted(seen)]


def oracle_solve(
    instance: Instance,
    limit: int = DEFAULT_ENUM_LIMIT,
    state_limit: int = DEFAULT_STATE_LIMIT,
) -> Tuple[Tuple[CellColumn, ...], float]:
    """Globally optimal packing over all feasible cells, with its value.

    Raises OracleSizeError when enumeration or the packing search would
    exceed the given limits.
    """
    cells = enumerate_feasible_cells(instance, limit)
    n = instance.n_superpixels
    cells_by_lowest: List[List[Tuple[int, int, float]]] = [[] for _ in range(n)]
    for idx, cell in enumerate(cells):
        mask = 0
        for d in cell.members:
            mask |= 1 << d
        cells_by_lowest[cell.members[0]].append((idx, mask, cell.cost))

    full = (1 << n) - 1
    memo: Dict[int, Tuple[float, int]] = {}  # mask -> (value, chosen cell idx or -1)

    def children(m: int):
        d = (m & -m).bit_length() - 1
        yield m & ~(1 << d), -1, 0.0
        for idx, cmask, cost in cells_by_lowest[d]:
            if cmask & m == cmask:
                yield m & ~cmask, idx, cost

    stack = [full]
    while stack:
        m = stack[-1]
        if m == 0 or m in memo:
            stack.pop()
            continue
        pending = [c for c, _, _ in children(m) if c != 0 and c not in memo]
        if pending:
            stack.extend(pending)
            if len(memo) + len(stack) > state_limit:
                raise OracleSizeError(
                    f"packing search exceeded {state_limit} states; "
                    "instance is too large for the oracle"
                )
            continue
        best = None
        best_choice = -1
        for child, idx, cost in children(m):
            sub = 0.0 if child == 0 else memo[child][0]
            val = cost + sub
            if best is None or val < best:
                best = val
                best_choice = idx
        memo[m] = (best, best_choice)
        stack.pop()

    chosen: List[CellColumn] = []
    m = full
    while m:
        value, idx = memo[m]
        d = (m & -m).bit_length() - 1
        if idx < 0:
            m &= ~(1 << d)
        else:
            cell = cells[idx]
            chosen.append(cell)
            for dd in cell.members:
                m &= ~(1 << dd)
    chosen.sort(key=lambda c: c.members)
    total = 0.0
    for cell in chosen:
        total += cell.cost
    return tuple(chosen), float(total)
