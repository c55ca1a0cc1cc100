"""Synthetic instances with planted ground truth.

Superpixels sit on a jittered unit grid.  Planted cells are disks of
superpixels around well-separated centers; unary costs pull planted members
into cells and push background out, pairwise costs are attractive inside a
planted cell and repulsive across its boundary.  ``noise`` perturbs cost
magnitudes (never the signs), so at noise 0 the planted packing is the
unambiguous optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .model import Instance, Members

__all__ = ["PlantedTruth", "generate_instance"]

_JITTER = 0.25
_RAG_RADIUS = 1.6
_OMEGA = 0.25


@dataclass(frozen=True)
class PlantedTruth:
    """Ground-truth partition: disjoint planted cells plus background ids."""

    cells: Tuple[Members, ...]
    background: Members

    def __post_init__(self):
        seen = set()
        for cell in self.cells:
            for d in cell:
                if d in seen:
                    raise ValueError("planted cells must be disjoint")
                seen.add(d)
        object.__setattr__(self, "cells", tuple(tuple(sorted(c)) for c in self.cells))
        object.__setattr__(self, "background", tuple(sorted(self.background)))


def _plant_slots(grid: int, n: int, spacing: int) -> List[int]:
    offset = spacing // 2
    slots = []
    for row in range(offset, grid, spacing):
        for col in range(offset, grid, spacing):
            sid = row * grid + col
            if sid < n:
                slots.append(sid)
    return slots


def generate_instance(
    n_superpixels: int,
    n_planted_cells: int,
    cell_radius: float = 3.0,
    noise: float = 0.25,
    seed: int = 0,
) -> Tuple[Instance, PlantedTruth]:
    """Deterministic-in-seed instance with ``n_planted_cells`` planted cells."""
    if n_superpixels < 1:
        raise ValueError("n_superpixels must be positive")
    if n_planted_cells < 1:
        raise ValueError("n_planted_cells must be positive")
    if not cell_radius > 0:
        raise ValueError("cell_radius must be positive")
    if noise < 0:
        raise ValueError("noise must be nonnegative")

    rng = np.random.default_rng(seed)
    n = int(n_superpixels)
    grid = math.ceil(math.sqrt(n))

    base = np.zeros((n, 2))
    for k in range(n):
        base[k] = (k % grid, k // grid)
    centroids = base + rng.uniform(-_JITTER, _JITTER, size=(n, 2))
    volumes = np.maximum(1.0 + noise * rng.uniform(-0.2, 0.2, size=n), 0.1)

    spacing = 2 * math.ceil(cell_radius) + 3
    slots = _plant_slots(grid, n, spacing)
    if n_planted_cells > len(slots):
        raise ValueError(
            f"cannot plant {n_planted_cells} cells of radius {cell_radius} "
            f"in {n} superpixels (capacity {len(slots)})"
        )
    chosen = sorted(int(slots[i]) for i in rng.permutation(len(slots))[:n_planted_cells])

    owner = np.full(n, -1, dtype=np.int64)  # planted cell index per superpixel
    planted_cells: List[Members] = []
    for ci, center in enumerate(chosen):
        dist = np.linalg.norm(centroids - centroids[center], axis=1)
        members = tuple(int(d) for d in np.flatnonzero(dist <= cell_radius))
        for d in members:
            owner[d] = ci
        planted_cells.append(members)

    theta_scale = 1.0 + noise * rng.uniform(0.0, 1.0, size=n)
    theta = np.where(owner >= 0, -theta_scale, theta_scale)

    tree = cKDTree(centroids)
    pairs = sorted((int(a), int(b)) for a, b in tree.query_pairs(_RAG_RADIUS))
    phi_scale = 1.0 + noise * rng.uniform(0.0, 1.0, size=len(pairs))
    pairwise: Dict[Tuple[int, int], float] = {}
    for idx, (a, b) in enumerate(pairs):
        if owner[a] >= 0 and owner[a] == owner[b]:
            pairwise[(a, b)] = -0.5 * phi_scale[idx]
        elif owner[a] >= 0 or owner[b] >= 0:
            pairwise[(a, b)] = 0.75 * phi_scale[idx]
        else:
            pairwise[(a, b)] = 0.25 * phi_scale[idx]

    max_plant_volume = 0.0
    for members in planted_cells:
        v = 0.0
        for d in members:
            v += volumes[d]
        max_plant_volume = max(max_plant_volume, v)

    instance = Instance(
        centroids=centroids,
        volumes=volumes,
        theta=theta,
        pairwise=pairwise,
        omega=_OMEGA,
        max_radius=float(cell_radius),
        max_volume=max_plant_volume + 0.25,
    )
    background = tuple(int(d) for d in np.flatnonzero(owner < 0))
    truth = PlantedTruth(tuple(planted_cells), background)
    return instance, truth
