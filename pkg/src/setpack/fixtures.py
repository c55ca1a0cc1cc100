"""Tiny hand-checked instances used across the test suite and docs."""

from __future__ import annotations

import numpy as np

from .model import Instance

__all__ = ["line3", "triangle3"]


def line3() -> Instance:
    """Three unit-volume superpixels on a line at x = 0, 1, 2.

    All feasible cells: {0}, {1}, {2} at -0.8, {0,1} at -2.3, {1,2} at -1.8.
    The optimal packing is {{0,1},{2}} at -3.1.
    """
    return Instance(
        centroids=np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
        volumes=np.array([1.0, 1.0, 1.0]),
        theta=np.array([-1.0, -1.0, -1.0]),
        pairwise={(0, 1): -0.5},
        omega=0.2,
        max_radius=1.0,
        max_volume=2.0,
    )


def triangle3() -> Instance:
    """Three superpixels in a near-equilateral triangle, all pairs in range.

    The y coordinate is 0.866 rather than sqrt(3)/2 so every pairwise distance
    stays <= 1.0 in floating point.  Feasible cells: singletons at -0.25 and
    the three pairs at -1.0 each; the full triple exceeds max_volume.  Optimal
    packing is one pair plus the remaining singleton at -1.25, while the LP
    without cuts is -1.5 (all pairs at 0.5).
    """
    return Instance(
        centroids=np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.866]]),
        volumes=np.array([1.0, 1.0, 1.0]),
        theta=np.array([-0.25, -0.25, -0.25]),
        pairwise={(0, 1): -0.5, (0, 2): -0.5, (1, 2): -0.5},
        omega=0.0,
        max_radius=1.0,
        max_volume=2.0,
    )
