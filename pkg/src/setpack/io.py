"""Text serialization for instances, solve reports and planted ground truth.

Instances travel as JSON with a flat superpixel table and an explicit pair
list (a < b, each unordered pair at most once).  Floats are written with
repr-level precision so parse(write(x)) reproduces x exactly.
"""

from __future__ import annotations

import json
import math
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .engine import IterationRecord, SolveReport
from .model import Instance

__all__ = [
    "InstanceFormatError",
    "parse_instance",
    "write_instance",
    "report_to_dict",
    "write_report",
    "parse_report_cells",
    "write_truth",
    "parse_truth",
    "comparison_view",
]

_VOLATILE_KEYS = {"timestamp", "wall_seconds"}


class InstanceFormatError(ValueError):
    """Malformed or inconsistent instance text."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InstanceFormatError(message)


def _number(doc: dict, key: str, context: str) -> float:
    _require(key in doc, f"{context}: missing field '{key}'")
    value = doc[key]
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{context}: field '{key}' must be a number")
    return float(value)


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    _require(isinstance(doc, dict), "top level must be an object")
    dims = doc.get("dims")
    _require(dims in (2, 3), "field 'dims' must be 2 or 3")
    max_radius = _number(doc, "max_radius", "instance")
    max_volume = _number(doc, "max_volume", "instance")
    omega = _number(doc, "cell_cost", "instance")

    sps = doc.get("superpixels")
    _require(isinstance(sps, list) and sps, "field 'superpixels' must be a nonempty array")
    n = len(sps)
    centroids = np.zeros((n, dims))
    volumes = np.zeros(n)
    theta = np.zeros(n)
    seen_ids = set()
    for rec in sps:
        _require(isinstance(rec, dict), "each superpixel must be an object")
        _require("id" in rec and isinstance(rec["id"], int) and not isinstance(rec["id"], bool),
                 "superpixel: field 'id' must be an integer")
        k = rec["id"]
        _require(k not in seen_ids, f"duplicate id {k}")
        _require(0 <= k < n, f"superpixel id {k} out of range for {n} superpixels (ids must be dense)")
        seen_ids.add(k)
        cen = rec.get("centroid")
        _require(isinstance(cen, list) and len(cen) == dims,
                 f"superpixel {k}: field 'centroid' must have {dims} coordinates")
        for x in cen:
            _require(isinstance(x, (int, float)) and not isinstance(x, bool),
                     f"superpixel {k}: centroid coordinates must be numbers")
        vol = _number(rec, "volume", f"superpixel {k}")
        _require(vol > 0, f"nonpositive volume for superpixel {k}")
        th = _number(rec, "theta", f"superpixel {k}")
        centroids[k] = cen
        volumes[k] = vol
        theta[k] = th

    pairwise: Dict[Tuple[int, int], float] = {}
    for rec in doc.get("pairwise", []):
        _require(isinstance(rec, dict), "each pairwise entry must be an object")
        for key in ("a", "b"):
            _require(key in rec and isinstance(rec[key], int) and not isinstance(rec[key], bool),
                     f"pairwise: field '{key}' must be an integer")
        a, b = rec["a"], rec["b"]
        _require(a < b, f"pair ({a}, {b}) must satisfy a < b")
        _require(0 <= a < n and b < n, f"pair ({a}, {b}) references an unknown id")
        _require((a, b) not in pairwise, f"duplicate pair ({a}, {b})")
        pairwise[(a, b)] = _number(rec, "phi", f"pair ({a}, {b})")

    try:
        return Instance(
            centroids=centroids,
            volumes=volumes,
            theta=theta,
            pairwise=pairwise,
            omega=omega,
            max_radius=max_radius,
            max_volume=max_volume,
        )
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc


def write_instance(instance: Instance) -> str:
    doc = {
        "dims": int(instance.dims),
        "max_radius": float(instance.max_radius),
        "max_volume": float(instance.max_volume),
        "cell_cost": float(instance.omega),
        "superpixels": [
            {
                "id": d,
                "centroid": [float(x) for x in instance.centroids[d]],
                "volume": float(instance.volumes[d]),
                "theta": float(instance.theta[d]),
            }
            for d in range(instance.n_superpixels)
        ],
        "pairwise": [
            {"a": a, "b": b, "phi": float(phi)}
            for (a, b), phi in sorted(instance.pairwise.items())
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _record_to_dict(record: IterationRecord) -> dict:
    return {
        "iteration": record.iteration,
        "lp_value": record.lp_value,
        "lagrangian_lb": record.lagrangian_lb,
        "best_lb": record.best_lb,
        "best_ub": record.best_ub,
        "pool_size": record.pool_size,
        "cut_count": record.cut_count,
        "new_columns": record.new_columns,
        "new_cuts": record.new_cuts,
        "wall_seconds": record.wall_seconds,
    }


def report_to_dict(report: SolveReport, seed: Optional[int] = None) -> dict:
    doc = {
        "cells": [list(cell.members) for cell in report.cells],
        "objective": report.objective,
        "certified": report.certified,
        "converged": report.converged,
        "lower_bound": report.lower_bound,
        "upper_bound": report.upper_bound,
        "normalized_gap": report.normalized_gap,
        "iterations": [_record_to_dict(r) for r in report.iterations],
        "thread_count": report.thread_count,
        "wall_seconds": report.wall_seconds,
        "timestamp": time.time(),
    }
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def write_report(report: SolveReport, seed: Optional[int] = None) -> str:
    return json.dumps(report_to_dict(report, seed=seed), indent=2) + "\n"


def parse_report_cells(text: str) -> List[Tuple[int, ...]]:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "cells" not in doc:
        raise InstanceFormatError("report: missing field 'cells'")
    return [tuple(int(d) for d in cell) for cell in doc["cells"]]


def write_truth(cells: Sequence[Sequence[int]], background: Sequence[int]) -> str:
    doc = {
        "cells": [sorted(int(d) for d in cell) for cell in cells],
        "background": sorted(int(d) for d in background),
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_truth(text: str) -> Tuple[List[Tuple[int, ...]], Tuple[int, ...]]:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "cells" not in doc or "background" not in doc:
        raise InstanceFormatError("truth: expected fields 'cells' and 'background'")
    cells = [tuple(int(d) for d in cell) for cell in doc["cells"]]
    background = tuple(int(d) for d in doc["background"])
    return cells, background


def comparison_view(doc):
    """Copy of a report/JSON value with wall-clock fields removed, for
    byte-independent determinism comparisons."""
    if isinstance(doc, dict):
        return {k: comparison_view(v) for k, v in doc.items() if k not in _VOLATILE_KEYS}
    if isinstance(doc, list):
        return [comparison_view(v) for v in doc]
    return doc
