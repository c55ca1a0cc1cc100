"""Core domain model: instances, cells, triples, duals, and the cost and
feasibility rules they obey.

Everything in this module is immutable and purely functional, so values can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Sequence, Tuple

import numpy as np

Members = Tuple[int, ...]

__all__ = [
    "Instance",
    "CellColumn",
    "Triple",
    "DualValues",
    "FractionalSolution",
    "CellCheck",
    "PackingCheck",
    "cell_cost",
    "feasible_cell",
    "make_cell",
    "triple_coefficient",
    "reduced_cost",
    "validate_packing",
]


def _as_members(members: Iterable[int]) -> Members:
    ms = tuple(sorted(int(d) for d in members))
    if len(set(ms)) != len(ms):
        raise ValueError(f"duplicate superpixel id in member set {ms}")
    return ms


@dataclass(frozen=True, eq=False)
class Instance:
    """A superpixel graph with unary/pairwise costs and cell size limits.

    ``centroids[d]``, ``volumes[d]`` and ``theta[d]`` are indexed by the dense
    superpixel id ``d``.  ``pairwise`` maps ``(a, b)`` with ``a < b`` to the
    cost of placing both in the same cell; absent pairs cost 0.  ``omega`` is
    the per-cell instancing cost, ``max_radius`` bounds the distance from a
    cell's anchor to each of its members, and ``max_volume`` bounds the summed
    member volume of a cell.
    """

    centroids: np.ndarray
    volumes: np.ndarray
    theta: np.ndarray
    pairwise: Mapping[Tuple[int, int], float]
    omega: float
    max_radius: float
    max_volume: float

    def __post_init__(self):
        centroids = np.ascontiguousarray(np.asarray(self.centroids, dtype=np.float64))
        volumes = np.ascontiguousarray(np.asarray(self.volumes, dtype=np.float64))
        theta = np.ascontiguousarray(np.asarray(self.theta, dtype=np.float64))
        if centroids.ndim != 2 or centroids.shape[1] not in (2, 3):
            raise ValueError("centroids must be an (n, 2) or (n, 3) array")
        n = centroids.shape[0]
        if n == 0:
            raise ValueError("instance needs at least one superpixel")
        if volumes.shape != (n,) or theta.shape != (n,):
            raise ValueError("volumes and theta must have one entry per superpixel")
        if not np.all(np.isfinite(centroids)):
            raise ValueError("centroids must be finite")
        if not np.all(np.isfinite(volumes)) or not np.all(volumes > 0):
            raise ValueError("volumes must be finite and positive")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        for name in ("omega", "max_radius", "max_volume"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.max_radius < 0:
            raise ValueError("max_radius must be nonnegative")
        if self.max_volume <= 0:
            raise ValueError("max_volume must be positive")

        pairs: Dict[Tuple[int, int], float] = {}
        for key, phi in dict(self.pairwise).items():
            a, b = (int(key[0]), int(key[1]))
            if a == b:
                raise ValueError(f"pairwise entry references superpixel {a} twice")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"pairwise entry ({a}, {b}) references unknown superpixel")
            if a > b:
                a, b = b, a
            if (a, b) in pairs:
                raise ValueError(f"duplicate pairwise entry for ({a}, {b})")
            phi = float(phi)
            if not np.isfinite(phi):
                raise ValueError(f"pairwise cost for ({a}, {b}) must be finite")
            pairs[(a, b)] = phi

        for arr in (centroids, volumes, theta):
            arr.flags.writeable = False
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "volumes", volumes)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "pairwise", pairs)
        object.__setattr__(self, "_cache", {})

    @property
    def n_superpixels(self) -> int:
        return self.centroids.shape[0]

    @property
    def dims(self) -> int:
        return self.centroids.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            np.array_equal(self.centroids, other.centroids)
            and np.array_equal(self.volumes, other.volumes)
            and np.array_equal(self.theta, other.theta)
            and self.pairwise == other.pairwise
            and self.omega == other.omega
            and self.max_radius == other.max_radius
            and self.max_volume == other.max_volume
        )

    def check_id(self, d: int) -> int:
        d = int(d)
        if not 0 <= d < self.n_superpixels:
            raise ValueError(f"unknown superpixel id {d}")
        return d

    def phi(self, a: int, b: int) -> float:
        if a > b:
            a, b = b, a
        return self.pairwise.get((a, b), 0.0)

    def neighbors(self, d: int) -> np.ndarray:
        """Ids within max_radius of ``d`` (inclusive), sorted; contains ``d``."""
        indptr, indices = self.neighborhoods()
        d = self.check_id(d)
        return indices[indptr[d] : indptr[d + 1]]

    def neighborhoods(self) -> Tuple[np.ndarray, np.ndarray]:
        """CSR (indptr, indices) of the radius-``max_radius`` neighborhoods."""
        cached = self._cache.get("nbr")
        if cached is None:
            n = self.n_superpixels
            rows = []
            for d in range(n):
                dist = np.linalg.norm(self.centroids - self.centroids[d], axis=1)
                rows.append(np.flatnonzero(dist <= self.max_radius).astype(np.int64))
            indptr = np.zeros(n + 1, dtype=np.int64)
            for d, r in enumerate(rows):
                indptr[d + 1] = indptr[d] + r.shape[0]
            indices = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
            indptr.flags.writeable = False
            indices.flags.writeable = False
            cached = (indptr, indices)
            self._cache["nbr"] = cached
        return cached

    def phi_csr(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR view (indptr, indices, data) of the pairwise costs."""
        cached = self._cache.get("phi_csr")
        if cached is None:
            n = self.n_superpixels
            adj: list = [[] for _ in range(n)]
            for (a, b), phi in self.pairwise.items():
                adj[a].append((b, phi))
                adj[b].append((a, phi))
            indptr = np.zeros(n + 1, dtype=np.int64)
            cols = []
            vals = []
            for d in range(n):
                adj[d].sort()
                indptr[d + 1] = indptr[d] + len(adj[d])
                for c, phi in adj[d]:
                    cols.append(c)
                    vals.append(phi)
            indices = np.asarray(cols, dtype=np.int64)
            data = np.asarray(vals, dtype=np.float64)
            for arr in (indptr, indices, data):
                arr.flags.writeable = False
            cached = (indptr, indices, data)
            self._cache["phi_csr"] = cached
        return cached


@dataclass(frozen=True)
class CellColumn:
    """A candidate cell: its member set, cached cost and anchor set."""

    members: Members
    cost: float
    anchors: FrozenSet[int]

    def __post_init__(self):
        members = _as_members(self.members)
        if not members:
            raise ValueError("a cell must have at least one member")
        anchors = frozenset(int(a) for a in self.anchors)
        if not anchors:
            raise ValueError("a cell must have at least one anchor")
        if not anchors <= set(members):
            raise ValueError("anchors must be members of the cell")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "cost", float(self.cost))


@dataclass(frozen=True, order=True)
class Triple:
    """An odd-set cut over exactly three distinct superpixels."""

    members: Tuple[int, int, int]

    def __post_init__(self):
        ms = tuple(sorted(int(d) for d in self.members))
        if len(ms) != 3 or len(set(ms)) != 3:
            raise ValueError(f"a triple needs exactly 3 distinct ids, got {self.members}")
        object.__setattr__(self, "members", ms)


@dataclass(frozen=True)
class DualValues:
    """Nonnegative multipliers: one per superpixel, one per active triple."""

    lam: np.ndarray
    kappa: Mapping[Triple, float]

    def __post_init__(self):
        lam = np.ascontiguousarray(np.asarray(self.lam, dtype=np.float64))
        if lam.ndim != 1:
            raise ValueError("lam must be a 1-d array")
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise ValueError("lam entries must be finite and nonnegative")
        kappa = dict(self.kappa)
        for c, k in kappa.items():
            if not isinstance(c, Triple):
                raise ValueError("kappa must be keyed by Triple")
            if not (np.isfinite(k) and k >= 0):
                raise ValueError("kappa entries must be finite and nonnegative")
        lam.flags.writeable = False
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "kappa", kappa)

    @staticmethod
    def zeros(instance: Instance) -> "DualValues":
        return DualValues(np.zeros(instance.n_superpixels), {})


@dataclass(frozen=True)
class FractionalSolution:
    """LP point: selection weight per pooled cell plus its objective value."""

    gamma: Mapping[CellColumn, float]
    objective: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", dict(self.gamma))
        object.__setattr__(self, "objective", float(self.objective))


@dataclass(frozen=True)
class CellCheck:
    feasible: bool
    anchors: FrozenSet[int]


@dataclass(frozen=True)
class PackingCheck:
    valid: bool
    violations: Tuple[int, ...]
    total_cost: float


def _checked_members(instance: Instance, members: Iterable[int]) -> Members:
    ms = _as_members(members)
    for d in ms:
        instance.check_id(d)
    return ms


def cell_cost(instance: Instance, members: Iterable[int]) -> float:
    """Cost of a cell: omega plus member unaries plus within-cell pair costs.

    Each unordered pair is counted exactly once.  The empty set costs omega.
    """
    ms = _checked_members(instance, members)
    total = instance.omega
    for d in ms:
        total += instance.theta[d]
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            total += instance.pairwise.get((ms[i], ms[j]), 0.0)
    return float(total)


def feasible_cell(instance: Instance, members: Iterable[int]) -> CellCheck:
    """Anchor set and feasibility of a member set.

    An anchor is a member within max_radius (inclusive) of every member.  A
    cell is feasible iff it is nonempty, has an anchor, and its summed volume
    is at most max_volume.
    """
    ms = _checked_members(instance, members)
    if not ms:
        return CellCheck(False, frozenset())
    pts = instance.centroids[np.asarray(ms)]
    dists = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    anchor_mask = np.all(dists <= instance.max_radius, axis=1)
    anchors = frozenset(ms[i] for i in range(len(ms)) if anchor_mask[i])
    total_volume = 0.0
    for d in ms:
        total_volume += instance.volumes[d]
    feasible = bool(anchors) and bool(total_volume <= instance.max_volume)
    return CellCheck(feasible, anchors)


def make_cell(instance: Instance, members: Iterable[int]) -> CellColumn:
    """Materialize a feasible member set as a CellColumn; raises if infeasible."""
    ms = _checked_members(instance, members)
    check = feasible_cell(instance, ms)
    if not check.feasible:
        raise ValueError(f"member set {ms} is not a feasible cell")
    return CellColumn(ms, cell_cost(instance, ms), check.anchors)


def triple_coefficient(triple, members: Iterable[int]) -> int:
    """1 if the cell contains at least two of the triple's members, else 0."""
    tm = triple.members if isinstance(triple, Triple) else tuple(triple)
    shared = len(set(tm) & set(members))
    return 1 if shared >= 2 else 0


def reduced_cost(cell: CellColumn, duals: DualValues) -> float:
    """Cell cost plus dual charges for its superpixels and active triples."""
    rc = cell.cost
    for d in cell.members:
        rc += duals.lam[d]
    for triple, kap in duals.kappa.items():
        rc += kap * triple_coefficient(triple, cell.members)
    return float(rc)


def validate_packing(instance: Instance, cells: Iterable) -> PackingCheck:
    """Check pairwise disjointness of a set of feasible cells.

    Accepts CellColumns or raw member iterables.  Violations list every
    superpixel covered more than once; total_cost sums the cell costs.
    """
    member_sets = []
    for c in cells:
        ms = _checked_members(instance, c.members if isinstance(c, CellColumn) else c)
        if not feasible_cell(instance, ms).feasible:
            raise ValueError(f"cell {ms} is infeasible")
        member_sets.append(ms)
    coverage: Dict[int, int] = {}
    total = 0.0
    for ms in member_sets:
        total += cell_cost(instance, ms)
        for d in ms:
            coverage[d] = coverage.get(d, 0) + 1
    violations = tuple(sorted(d for d, k in coverage.items() if k > 1))
    return PackingCheck(not violations, violations, float(total))
