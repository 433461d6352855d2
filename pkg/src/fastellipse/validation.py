"""Candidate scoring, acceptance and duplicate clustering."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .ellipse import EllipseParams, angle_diff

TH_FIT = 0.7
TH_LEN = 0.4
FIT_TOL = 2.0

# similarity tolerances for clustering
CENTER_FRAC = 0.1
CENTER_PAD = 2.0
AXIS_REL = 0.1
ANGLE_TOL = math.radians(10.0)
ROUND_RATIO = 0.9


@dataclass(frozen=True, eq=False)
class CandidateEllipse:
    params: EllipseParams
    source: object
    fit_ratio: float = math.nan
    length_ratio: float = math.nan

    @property
    def support_length(self):
        return self.source.total_length if self.source is not None else 0

    @property
    def vote(self):
        return self.fit_ratio * self.support_length


def _points(triple):
    return np.concatenate([a.xy() for a in triple.arcs])


def fit_support(params: EllipseParams, triple, tol: float = FIT_TOL) -> float:
    """Share of the triple's edge points within ``tol`` px (first-order distance)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    xy = _points(triple)
    if len(xy) == 0:
        return 0.0
    d = np.abs(params.approx_distance(xy[:, 0], xy[:, 1]))
    return float(np.count_nonzero(d <= tol)) / len(xy)


def length_support(params: EllipseParams, triple) -> float:
    return triple.total_length / (3.0 * (params.a + params.b))


def score(params: EllipseParams, triple, tol: float = FIT_TOL) -> CandidateEllipse:
    return CandidateEllipse(params, triple, fit_support(params, triple, tol), length_support(params, triple))


def validate(cands, th_fit: float = TH_FIT, th_len: float = TH_LEN):
    return [c for c in cands if c.fit_ratio >= th_fit and c.length_ratio >= th_len]


def accept(fitted, th_fit: float = TH_FIT, th_len: float = TH_LEN, tol: float = FIT_TOL):
    """Score and filter ``(params, triple)`` pairs; same result as ``validate(map(score))``.

    The cheap length ratio is checked first so most rejects skip the distance pass.
    """
    out = []
    for params, triple in fitted:
        lr = length_support(params, triple)
        if lr < th_len:
            continue
        fr = fit_support(params, triple, tol)
        if fr >= th_fit:
            out.append(CandidateEllipse(params, triple, fr, lr))
    return out


def similar(p: EllipseParams, q: EllipseParams) -> bool:
    if math.hypot(p.cx - q.cx, p.cy - q.cy) > CENTER_FRAC * min(p.b, q.b) + CENTER_PAD:
        return False
    if abs(p.a - q.a) > AXIS_REL * max(p.a, q.a) or abs(p.b - q.b) > AXIS_REL * max(p.b, q.b):
        return False
    if p.b / p.a > ROUND_RATIO and q.b / q.a > ROUND_RATIO:
        return True
    return angle_diff(p.theta, q.theta) <= ANGLE_TOL


def cluster_duplicates(cands):
    """One representative per connected group of similar candidates.

    The representative has the largest ``fit_ratio * total arc length``;
    ties keep the earlier candidate.  Output follows first-member order.
    """
    cands = list(cands)
    n = len(cands)
    if n < 2:
        return cands
    groups = DisjointSet(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if not groups.connected(i, j) and similar(cands[i].params, cands[j].params):
                groups.merge(i, j)
    best = {}
    for i, c in enumerate(cands):
        root = groups[i]
        if root not in best or c.vote > cands[best[root]].vote:
            best[root] = i
    return [cands[i] for i in sorted(best.values())]
