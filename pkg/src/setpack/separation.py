"""Row generation: find triples violated by the current fractional solution.

Candidates are triangles of the co-occurrence graph over superpixels (an edge
where some positively weighted cell contains both endpoints); a triple can
only be violated when all three of its pairs are witnessed that way.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence, Set, Tuple

from .model import FractionalSolution, Triple, triple_coefficient

__all__ = ["find_violated_triples", "CUT_TOL"]

CUT_TOL = 1e-6
_GAMMA_EPS = 1e-12


def find_violated_triples(
    solution: FractionalSolution,
    pool=None,
    existing: Iterable[Triple] = (),
    max_cuts: int = 1,
    tol: float = CUT_TOL,
) -> List[Triple]:
    """Up to ``max_cuts`` most-violated triples not already in ``existing``.

    Violations are sorted descending, ties broken by member tuple.  Integral
    solutions never produce cuts.
    """
    if max_cuts < 1:
        raise ValueError("max_cuts must be at least 1")
    existing_set = set(existing)
    positive = [
        (cell.members, g) for cell, g in solution.gamma.items() if g > _GAMMA_EPS
    ]

    adj: Dict[int, Set[int]] = {}
    for members, _ in positive:
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]
                adj.setdefault(a, set()).add(b)
                adj.setdefault(b, set()).add(a)

    violated: List[Tuple[float, Tuple[int, int, int]]] = []
    for a in sorted(adj):
        for b in sorted(adj[a]):
            if b <= a:
                continue
            for c in sorted(adj[a] & adj[b]):
                if c <= b:
                    continue
                triple = (a, b, c)
                total = 0.0
                for members, g in positive:
                    if triple_coefficient(triple, members):
                        total += g
                violation = total - 1.0
                if violation > tol and Triple(triple) not in existing_set:
                    violated.append((violation, triple))

    violated.sort(key=lambda item: (-item[0], item[1]))
    return [Triple(t) for _, t in violated[:max_cuts]]
