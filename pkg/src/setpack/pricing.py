"""Exact per-anchor pricing: the minimum reduced-cost cell anchored at each
superpixel, found by depth-first branch and bound over the anchor's
neighborhood.

The search kernel is written in a numba-compatible subset of Python and is
JIT-compiled unless SETPACK_BACKEND=numpy (see accel).  Anchors are priced
independently, so the batch kernel parallelizes over anchors and merges
results deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import accel
from .accel import prange
from .model import CellColumn, DualValues, Instance, Members, Triple, make_cell

__all__ = [
    "PricingResult",
    "neighborhood",
    "price_anchor",
    "price_all_anchors",
    "generate_columns",
]

_EMPTY_TRIPLES = (
    np.zeros((0, 3), dtype=np.int64),
    np.zeros(0, dtype=np.float64),
)


@dataclass(frozen=True)
class PricingResult:
    """Best cell anchored at ``anchor`` and its reduced cost ``value``.

    An anchor whose own volume exceeds the cap admits no cell; it reports
    empty members and a +inf value.
    """

    anchor: int
    best_members: Members
    value: float

    @property
    def feasible(self) -> bool:
        return bool(self.best_members)


def neighborhood(instance: Instance, anchor: int) -> Members:
    """All superpixels within max_radius of ``anchor``, itself included."""
    return tuple(int(d) for d in instance.neighbors(anchor))


@accel.jit()
def _bisect(arr, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo < arr.shape[0] and arr[lo] == x:
        return lo
    return -1


@accel.jit()
def _sel_less(a, b, k):
    # Sorted-tuple order on the encoded member sets: a prefix precedes its
    # extensions.
    for p in range(k):
        if a[p] != b[p]:
            if a[p] == 1:
                for q in range(p + 1, k):
                    if b[q] == 1:
                        return True
                return False
            for q in range(p + 1, k):
                if a[q] == 1:
                    return False
            return True
    return False


@accel.jit()
def _price_one(
    a,
    nbr_indptr,
    nbr_indices,
    phi_indptr,
    phi_indices,
    phi_data,
    theta,
    lam,
    vol,
    omega,
    cap,
    trip_members,
    trip_kappa,
    sp_trip_indptr,
    sp_trip_ind,
    out_val,
    out_sel,
):
    s = nbr_indptr[a]
    e = nbr_indptr[a + 1]
    k = e - s
    if vol[a] > cap:
        out_val[a] = np.inf
        return
    cand = nbr_indices[s:e]
    pa = _bisect(cand, 0, k, a)

    # Local pairwise matrix over the neighborhood.
    P = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        row = cand[i]
        ci = 0
        for ptr in range(phi_indptr[row], phi_indptr[row + 1]):
            col = phi_indices[ptr]
            while ci < k and cand[ci] < col:
                ci += 1
            if ci >= k:
                break
            if cand[ci] == col:
                P[i, ci] = phi_data[ptr]

    # Triples reachable from this neighborhood (need >= 2 members in it),
    # ordered by global cut index, with a per-candidate adjacency list.
    t = trip_kappa.shape[0]
    tcount = np.zeros(t, dtype=np.int64)
    for i in range(k):
        d = cand[i]
        for ptr in range(sp_trip_indptr[d], sp_trip_indptr[d + 1]):
            tcount[sp_trip_ind[ptr]] += 1
    nloc = 0
    for tid in range(t):
        if tcount[tid] >= 2:
            nloc += 1
    ltid = np.zeros(nloc, dtype=np.int64)
    tlocal = np.full(t, -1, dtype=np.int64)
    li = 0
    for tid in range(t):
        if tcount[tid] >= 2:
            ltid[li] = tid
            tlocal[tid] = li
            li += 1
    ltk = np.zeros(nloc, dtype=np.float64)
    for li in range(nloc):
        ltk[li] = trip_kappa[ltid[li]]
    lt_indptr = np.zeros(k + 1, dtype=np.int64)
    for i in range(k):
        cnt = 0
        d = cand[i]
        for ptr in range(sp_trip_indptr[d], sp_trip_indptr[d + 1]):
            if tlocal[sp_trip_ind[ptr]] >= 0:
                cnt += 1
        lt_indptr[i + 1] = lt_indptr[i] + cnt
    lt_ind = np.zeros(lt_indptr[k], dtype=np.int64)
    for i in range(k):
        pos = lt_indptr[i]
        d = cand[i]
        for ptr in range(sp_trip_indptr[d], sp_trip_indptr[d + 1]):
            lj = tlocal[sp_trip_ind[ptr]]
            if lj >= 0:
                lt_ind[pos] = lj
                pos += 1

    tl = np.zeros(k, dtype=np.float64)
    volc = np.zeros(k, dtype=np.float64)
    for i in range(k):
        tl[i] = theta[cand[i]] + lam[cand[i]]
        volc[i] = vol[cand[i]]

    cur_sel = np.zeros(k, dtype=np.uint8)
    cur_sel[pa] = 1
    best_sel = cur_sel.copy()

    # Root test: when every candidate's best-case contribution (own gain plus
    # anchor pair plus half its negative pair partners) is strictly positive,
    # the anchor alone is uniquely optimal and the search machinery is
    # skipped entirely (the common case away from cell regions).
    improvable = False
    for j in range(k):
        if j == pa:
            continue
        g = tl[j] + P[j, pa]
        for e in range(k):
            if e != j and e != pa and P[j, e] < 0.0:
                g += 0.5 * P[j, e]
        if g <= 0.0:
            improvable = True
            break
    if improvable:
        _price_search(
            a, cand, k, pa, P, tl, volc, vol, omega, cap,
            nloc, ltk, lt_indptr, lt_ind, cur_sel, best_sel,
        )

    # Canonical reduced cost of the winner, term order mirroring the pure
    # model evaluation so values compare bit-exactly.
    s1 = 0.0
    for i in range(k):
        if best_sel[i] == 1:
            s1 += theta[cand[i]]
    s2 = 0.0
    for i in range(k):
        if best_sel[i] == 1:
            for j in range(i + 1, k):
                if best_sel[j] == 1:
                    s2 += P[i, j]
    rc = omega + s1 + s2
    for i in range(k):
        if best_sel[i] == 1:
            rc += lam[cand[i]]
    for li in range(nloc):
        tid = ltid[li]
        cnt = 0
        for m in range(3):
            pos = _bisect(cand, 0, k, trip_members[tid, m])
            if pos >= 0 and best_sel[pos] == 1:
                cnt += 1
        if cnt >= 2:
            rc += trip_kappa[tid]
    out_val[a] = rc
    for i in range(k):
        out_sel[s + i] = best_sel[i]


@accel.jit()
def _price_search(
    a, cand, k, pa, P, tl, volc, vol, omega, cap,
    nloc, ltk, lt_indptr, lt_ind, cur_sel, best_sel,
):
    # M[j, p]: sum of negative pair costs between j and undecided partners at
    # scan position p (anchor excluded; its costs live in incphi).
    M = np.zeros((k, k + 1), dtype=np.float64)
    for j in range(k):
        acc = 0.0
        for p in range(k - 1, -1, -1):
            if p != j and p != pa and P[j, p] < 0.0:
                acc += P[j, p]
            M[j, p] = acc

    incphi = np.zeros(k, dtype=np.float64)
    for j in range(k):
        incphi[j] = P[j, pa]
    cur = omega + tl[pa]
    curvol = vol[a]
    tc = np.zeros(nloc, dtype=np.int64)
    for ptr in range(lt_indptr[pa], lt_indptr[pa + 1]):
        tc[lt_ind[ptr]] += 1
    best_val = cur

    save_cur = np.zeros(k, dtype=np.float64)
    save_vol = np.zeros(k, dtype=np.float64)
    save_inc = np.zeros((k, k), dtype=np.float64)
    stack = np.zeros(k, dtype=np.int64)
    depth = 0
    p = 0
    while True:
        while p < k:
            if p == pa:
                p += 1
                continue
            bound = 0.0
            for j in range(p, k):
                if j == pa:
                    continue
                g = tl[j] + incphi[j] + 0.5 * M[j, p]
                if g < 0.0:
                    bound += g
            if cur + bound > best_val:
                break
            if curvol + volc[p] <= cap:
                save_cur[depth] = cur
                save_vol[depth] = curvol
                for j in range(k):
                    save_inc[depth, j] = incphi[j]
                cur += tl[p] + incphi[p]
                curvol += volc[p]
                for ptr in range(lt_indptr[p], lt_indptr[p + 1]):
                    lj = lt_ind[ptr]
                    tc[lj] += 1
                    if tc[lj] == 2:
                        cur += ltk[lj]
                for j in range(k):
                    incphi[j] += P[j, p]
                cur_sel[p] = 1
                stack[depth] = p
                depth += 1
                if cur < best_val:
                    best_val = cur
                    for j in range(k):
                        best_sel[j] = cur_sel[j]
                elif cur == best_val and _sel_less(cur_sel, best_sel, k):
                    for j in range(k):
                        best_sel[j] = cur_sel[j]
            p += 1
        if depth == 0:
            break
        depth -= 1
        q = stack[depth]
        cur = save_cur[depth]
        curvol = save_vol[depth]
        for j in range(k):
            incphi[j] = save_inc[depth, j]
        for ptr in range(lt_indptr[q], lt_indptr[q + 1]):
            tc[lt_ind[ptr]] -= 1
        cur_sel[q] = 0
        p = q + 1


@accel.jit(parallel=True)
def _price_batch(
    nbr_indptr,
    nbr_indices,
    phi_indptr,
    phi_indices,
    phi_data,
    theta,
    lam,
    vol,
    omega,
    cap,
    trip_members,
    trip_kappa,
    sp_trip_indptr,
    sp_trip_ind,
    out_val,
    out_sel,
):
    n = nbr_indptr.shape[0] - 1
    for a in prange(n):
        _price_one(
            a,
            nbr_indptr,
            nbr_indices,
            phi_indptr,
            phi_indices,
            phi_data,
            theta,
            lam,
            vol,
            omega,
            cap,
            trip_members,
            trip_kappa,
            sp_trip_indptr,
            sp_trip_ind,
            out_val,
            out_sel,
        )


def _triple_arrays(instance, duals, active_triples):
    if active_triples is None:
        active_triples = tuple(duals.kappa.keys())
    else:
        active_triples = tuple(active_triples)
    n = instance.n_superpixels
    t = len(active_triples)
    if t == 0:
        trip_members, trip_kappa = _EMPTY_TRIPLES
        sp_indptr = np.zeros(n + 1, dtype=np.int64)
        sp_ind = np.zeros(0, dtype=np.int64)
        return trip_members, trip_kappa, sp_indptr, sp_ind
    trip_members = np.zeros((t, 3), dtype=np.int64)
    trip_kappa = np.zeros(t, dtype=np.float64)
    per_sp: List[List[int]] = [[] for _ in range(n)]
    for i, c in enumerate(active_triples):
        for m in c.members:
            instance.check_id(m)
            per_sp[m].append(i)
        trip_members[i] = c.members
        trip_kappa[i] = float(duals.kappa.get(c, 0.0))
    sp_indptr = np.zeros(n + 1, dtype=np.int64)
    for d in range(n):
        sp_indptr[d + 1] = sp_indptr[d] + len(per_sp[d])
    sp_ind = np.asarray([i for lst in per_sp for i in lst], dtype=np.int64)
    return trip_members, trip_kappa, sp_indptr, sp_ind


def _kernel_inputs(instance: Instance, duals: DualValues, active_triples):
    nbr_indptr, nbr_indices = instance.neighborhoods()
    phi_indptr, phi_indices, phi_data = instance.phi_csr()
    lam = np.asarray(duals.lam, dtype=np.float64)
    if lam.shape != (instance.n_superpixels,):
        raise ValueError("duals.lam must have one entry per superpixel")
    trips = _triple_arrays(instance, duals, active_triples)
    return (
        nbr_indptr,
        nbr_indices,
        phi_indptr,
        phi_indices,
        phi_data,
        instance.theta,
        lam,
        instance.volumes,
        float(instance.omega),
        float(instance.max_volume),
        *trips,
    )


class RawPricing:
    """Batch pricing output kept in array form: per-anchor optimal values and
    selection flags aligned with the neighborhood CSR."""

    __slots__ = ("indptr", "indices", "values", "selected")

    def __init__(self, indptr, indices, values, selected):
        self.indptr = indptr
        self.indices = indices
        self.values = values
        self.selected = selected

    def members(self, anchor: int) -> Members:
        s, e = self.indptr[anchor], self.indptr[anchor + 1]
        return tuple(
            int(self.indices[s + i]) for i in range(e - s) if self.selected[s + i]
        )

    def result(self, anchor: int) -> PricingResult:
        value = float(self.values[anchor])
        if math.isinf(value):
            return PricingResult(anchor, (), math.inf)
        return PricingResult(anchor, self.members(anchor), value)


def price_raw(
    instance: Instance,
    duals: DualValues,
    active_triples: Optional[Sequence[Triple]] = None,
    thread_count: Optional[int] = None,
) -> RawPricing:
    """Price every anchor, returning the raw arrays (cheapest form)."""
    args = _kernel_inputs(instance, duals, active_triples)
    n = instance.n_superpixels
    out_val = np.zeros(n, dtype=np.float64)
    out_sel = np.zeros(args[1].shape[0], dtype=np.uint8)
    if accel.NUMBA_ENABLED:
        accel.set_threads(thread_count if thread_count else accel.max_threads())
    _price_batch(*args, out_val, out_sel)
    return RawPricing(args[0], args[1], out_val, out_sel)


def price_anchor(
    instance: Instance,
    duals: DualValues,
    active_triples: Optional[Sequence[Triple]] = None,
    anchor: int = 0,
) -> PricingResult:
    """Exact minimum of the per-anchor pricing problem for one anchor."""
    anchor = instance.check_id(anchor)
    args = _kernel_inputs(instance, duals, active_triples)
    out_val = np.zeros(instance.n_superpixels, dtype=np.float64)
    out_sel = np.zeros(args[1].shape[0], dtype=np.uint8)
    _price_one(anchor, *args, out_val, out_sel)
    return RawPricing(args[0], args[1], out_val, out_sel).result(anchor)


def price_all_anchors(
    instance: Instance,
    duals: DualValues,
    active_triples: Optional[Sequence[Triple]] = None,
    thread_count: Optional[int] = None,
) -> List[PricingResult]:
    """Price every superpixel as an anchor; results are indexed by anchor id.

    Anchors are independent, so the batch may run on several threads; the
    returned list is always in anchor order regardless of thread count.
    """
    raw = price_raw(instance, duals, active_triples, thread_count)
    return [raw.result(a) for a in range(instance.n_superpixels)]


def _negative_member_sets(raw: RawPricing, eps_rc: float) -> List[Members]:
    by_members = {}
    for a in range(raw.values.shape[0]):
        if raw.values[a] < -eps_rc:
            ms = raw.members(a)
            if ms and ms not in by_members:
                by_members[ms] = None
    return sorted(by_members)


def generate_columns(
    instance: Instance,
    duals: DualValues,
    active_triples: Optional[Sequence[Triple]] = None,
    eps_rc: float = 1e-9,
    thread_count: Optional[int] = None,
    results: Optional[Sequence[PricingResult]] = None,
    raw: Optional[RawPricing] = None,
) -> List[CellColumn]:
    """Cells with pricing value below -eps_rc, deduplicated and sorted.

    ``results`` or ``raw`` short-circuit re-pricing when the caller already
    holds the per-anchor output for these duals.
    """
    if not eps_rc > 0:
        raise ValueError("eps_rc must be positive")
    if results is not None:
        by_members = {}
        for r in results:
            if r.feasible and r.value < -eps_rc and r.best_members not in by_members:
                by_members[r.best_members] = None
        negatives = sorted(by_members)
    else:
        if raw is None:
            raw = price_raw(instance, duals, active_triples, thread_count)
        negatives = _negative_member_sets(raw, eps_rc)
    return [make_cell(instance, ms) for ms in negatives]
