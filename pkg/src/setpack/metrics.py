"""Detection and segmentation scores against ground truth.

Predicted and true cells are matched by an exact minimum-cost assignment on
volume-weighted centroid distances, restricted to pairs sharing at least one
superpixel.  Detection reports precision/recall/F over that matching;
segmentation reports volume-weighted Dice and Jaccard means over matched
pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import CellColumn, Instance, Members

__all__ = ["DetectionMetrics", "SegmentationMetrics", "match_cells", "detection_metrics", "segmentation_metrics"]


@dataclass(frozen=True)
class DetectionMetrics:
    precision: float
    recall: float
    f_score: float
    matches: Tuple[Tuple[int, int], ...]  # (predicted index, truth index)


@dataclass(frozen=True)
class SegmentationMetrics:
    dice: Optional[float]
    jaccard: Optional[float]


def _member_sets(cells) -> List[Members]:
    out = []
    for c in cells:
        ms = c.members if isinstance(c, CellColumn) else c
        out.append(tuple(sorted(int(d) for d in ms)))
    return out


def _centroid(instance: Instance, members: Members) -> np.ndarray:
    idx = np.asarray(members)
    w = instance.volumes[idx]
    return (instance.centroids[idx] * w[:, None]).sum(axis=0) / w.sum()


def match_cells(predicted, truth, instance: Instance) -> Tuple[Tuple[int, int], ...]:
    """Assignment of predicted to true cells minimizing centroid distance.

    Only pairs sharing at least one superpixel are eligible; the assignment
    is solved exactly and ineligible pairs are dropped afterwards.
    """
    pred = _member_sets(predicted)
    true = _member_sets(truth)
    if not pred or not true:
        return ()
    pred_sets = [set(ms) for ms in pred]
    true_sets = [set(ms) for ms in true]
    dist = np.zeros((len(pred), len(true)))
    overlap = np.zeros((len(pred), len(true)), dtype=bool)
    pred_cen = [_centroid(instance, ms) for ms in pred]
    true_cen = [_centroid(instance, ms) for ms in true]
    for i in range(len(pred)):
        for j in range(len(true)):
            overlap[i, j] = bool(pred_sets[i] & true_sets[j])
            dist[i, j] = float(np.linalg.norm(pred_cen[i] - true_cen[j]))
    big = (dist.max() + 1.0) * 1e6
    cost = np.where(overlap, dist, big)
    rows, cols = linear_sum_assignment(cost)
    return tuple(
        (int(i), int(j)) for i, j in zip(rows, cols) if overlap[i, j]
    )


def detection_metrics(predicted, truth, instance: Instance) -> DetectionMetrics:
    """Precision/recall/F over the centroid matching.

    With no predictions there are no false positives, so precision is 1 by
    convention (and F stays 0 unless recall is also perfect).
    """
    pred = _member_sets(predicted)
    true = _member_sets(truth)
    matches = match_cells(pred, true, instance)
    tp = len(matches)
    precision = 1.0 if not pred else tp / len(pred)
    recall = 1.0 if not true else tp / len(true)
    f_score = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return DetectionMetrics(precision, recall, f_score, matches)


def segmentation_metrics(pairs, instance: Instance) -> SegmentationMetrics:
    """Mean volume-weighted Dice and Jaccard over matched region pairs.

    ``pairs`` holds (predicted members, true members) tuples, e.g. built from
    DetectionMetrics.matches.  An empty match set reports absent metrics.
    """
    dices = []
    jaccards = []
    for pred_members, true_members in pairs:
        a = set(int(d) for d in pred_members)
        b = set(int(d) for d in true_members)
        inter = sum(instance.volumes[d] for d in a & b)
        union = sum(instance.volumes[d] for d in a | b)
        vol_a = sum(instance.volumes[d] for d in a)
        vol_b = sum(instance.volumes[d] for d in b)
        jaccards.append(inter / union)
        dices.append(2.0 * inter / (vol_a + vol_b))
    if not dices:
        return SegmentationMetrics(None, None)
    return SegmentationMetrics(float(np.mean(dices)), float(np.mean(jaccards)))
