"""The end-to-end detection pipeline with per-stage timing."""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field

from . import arcs as _arcs
from .candidates import SelectionConfig, pick_triples
from .edges import canny_map, to_grayscale
from .errors import ConfigError
from .fitting import N_D, fit_triples
from .validation import FIT_TOL, TH_FIT, TH_LEN, accept, cluster_duplicates

STAGES = (
    "edge detection",
    "pre-processing",
    "grouping",
    "estimation",
    "validation and clustering",
)


@dataclass(frozen=True)
class DetectorConfig:
    sigma: float = 1.0
    canny_low: float | None = None
    canny_high: float | None = None
    th_length: int = _arcs.TH_LENGTH
    th_cnl: float = _arcs.TH_CNL
    th_cnc: float = 0.2
    n_d: int = N_D
    th_fit: float = TH_FIT
    th_len: float = TH_LEN
    fit_tol: float = FIT_TOL
    th_overlap: float = 0.8
    seed: int = 0
    prune_lines: bool = True
    use_cnc: bool = True
    split_direction: bool = True

    def __post_init__(self):
        checks = (
            (self.sigma >= 0, "sigma must be >= 0"),
            (self.th_length >= 2, "th_length must be >= 2"),
            (self.th_cnl >= 0, "th_cnl must be >= 0"),
            (self.th_cnc >= 0, "th_cnc must be >= 0"),
            (self.n_d >= 4, "n_d must be >= 4"),
            (0 <= self.th_fit <= 1, "th_fit must be in [0, 1]"),
            (self.th_len >= 0, "th_len must be >= 0"),
            (self.fit_tol > 0, "fit_tol must be positive"),
            (0 <= self.th_overlap <= 1, "th_overlap must be in [0, 1]"),
        )
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        lo, hi = self.canny_low, self.canny_high
        if lo is not None and hi is not None and not 0 < lo < hi:
            raise ConfigError("need 0 < canny_low < canny_high")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass
class Detection:
    params: object
    score: float
    length_ratio: float

    def as_row(self):
        p = self.params
        return (p.cx, p.cy, p.a, p.b, p.theta_deg, self.score)


@dataclass
class DetectionReport:
    ellipses: list
    stage_times: dict
    total_time: float
    cc: int
    n_edges: int = 0
    n_arcs: int = 0
    n_arcs_pruned: int = 0
    n_arcs_kept: int = 0
    n_fitted: int = 0
    n_valid: int = 0
    linked_arcs: list = field(default_factory=list, repr=False)
    kept_arcs: list = field(default_factory=list, repr=False)

    @property
    def params(self):
        return [d.params for d in self.ellipses]

    def as_dict(self, timings=True):
        out = {
            "ellipses": [
                {
                    "cx": d.params.cx, "cy": d.params.cy, "a": d.params.a, "b": d.params.b,
                    "theta_deg": d.params.theta_deg, "score": d.score,
                }
                for d in self.ellipses
            ],
            "cc": self.cc,
            "counts": {
                "edge_points": self.n_edges, "arcs": self.n_arcs, "arcs_pruned": self.n_arcs_pruned, "arcs_kept": self.n_arcs_kept,
                "fitted": self.n_fitted, "validated": self.n_valid,
            },
        }
        if timings:
            out["stage_times_ms"] = dict(self.stage_times)
            out["total_ms"] = self.total_time
        return out


def detect(image, cfg: DetectorConfig | None = None, keep_arcs: bool = False) -> DetectionReport:
    """Run the full pipeline on an image (path, array or GrayImage)."""
    cfg = cfg or DetectorConfig()
    gray = to_grayscale(image)
    clock = time.perf_counter
    times = {}

    t0 = clock()
    edges = canny_map(gray, cfg.canny_low, cfg.canny_high, cfg.sigma)
    t1 = clock()
    linked = _arcs.link_edges(edges, cfg.split_direction)
    kept = _arcs.prune_short(linked, cfg.th_length)
    if cfg.prune_lines:
        kept = _arcs.prune_lines(kept, cfg.th_cnl)
    t2 = clock()
    labelled = _arcs.assign_quadrants(kept)
    th_cnc = cfg.th_cnc if cfg.use_cnc else math.inf
    triples = pick_triples(_arcs.quadrant_sets(labelled), SelectionConfig(th_cnc))
    t3 = clock()
    fitted = fit_triples(triples, cfg.n_d)
    t4 = clock()
    good = accept(fitted, cfg.th_fit, cfg.th_len, cfg.fit_tol)
    final = cluster_duplicates(good)
    t5 = clock()

    for name, (a, b) in zip(STAGES, ((t0, t1), (t1, t2), (t2, t3), (t3, t4), (t4, t5))):
        times[name] = (b - a) * 1000.0
    dets = [Detection(c.params, c.fit_ratio, c.length_ratio) for c in final]
    return DetectionReport(
        ellipses=dets,
        stage_times=times,
        total_time=(t5 - t0) * 1000.0,
        cc=len(triples),
        n_edges=len(edges),
        n_arcs=len(linked),
        n_arcs_pruned=len(kept),
        n_arcs_kept=len(labelled),
        n_fitted=len(fitted),
        n_valid=len(good),
        linked_arcs=linked if keep_arcs else [],
        kept_arcs=labelled if keep_arcs else [],
    )
