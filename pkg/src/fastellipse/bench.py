"""Scoring against ground truth, dataset runs, reports and threshold sweeps.

A detection is correct when its pixel-area overlap (intersection over union
of the filled ellipses) with an unmatched ground-truth ellipse is strictly
greater than ``th_o``.  Matching is greedy by descending overlap.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .detector import STAGES, DetectorConfig, detect
from .edges import read_image, to_grayscale
from .ellipse import EllipseParams
from .errors import DatasetFormatError
from .truth import SIDECAR_SUFFIX, read_truth

TH_O = 0.8
IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")

TH_CNL_GRID = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
TH_CNC_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0)


def _fill_mask(e: EllipseParams, x0, y0, x1, y1):
    yy, xx = np.mgrid[y0:y1, x0:x1]
    return e.implicit(xx, yy) <= 0


def overlap_ratio(d: EllipseParams, g: EllipseParams, frame) -> float:
    """IoU of the two filled ellipses sampled at pixel centers of a ``(w, h)`` frame."""
    w, h = frame
    boxes = (d.bbox(), g.bbox())
    x0 = max(0, int(math.floor(min(b[0] for b in boxes))))
    y0 = max(0, int(math.floor(min(b[1] for b in boxes))))
    x1 = min(w, int(math.ceil(max(b[2] for b in boxes))) + 1)
    y1 = min(h, int(math.ceil(max(b[3] for b in boxes))) + 1)
    if x0 >= x1 or y0 >= y1:
        return 0.0
    a = _fill_mask(d, x0, y0, x1, y1)
    b = _fill_mask(g, x0, y0, x1, y1)
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return np.count_nonzero(a & b) / union


def _bbox_disjoint(p, q):
    a, b = p.bbox(), q.bbox()
    return a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1]


def prf(n_match, n_det, n_truth):
    """Precision, recall and F-measure with the empty-set conventions."""
    if n_det == 0 and n_truth == 0:
        return 1.0, 1.0, 1.0
    p = n_match / n_det if n_det else 0.0
    r = n_match / n_truth if n_truth else 0.0
    if n_det == 0 or n_truth == 0 or p + r == 0:
        return p, r, 0.0
    return p, r, 2 * p * r / (p + r)


@dataclass
class EvalResult:
    precision: float
    recall: float
    f_measure: float
    cc: float = 0
    stage_times: dict = field(default_factory=dict)
    n_det: int = 0
    n_truth: int = 0
    n_match: int = 0
    name: str = ""
    n_arcs: float = 0
    total_time: float = 0.0

    def as_dict(self):
        return asdict(self)


def match(detections, truth, frame, th_o: float = TH_O):
    """Greedy one-to-one pairs ``(det_index, truth_index, overlap)`` with overlap > th_o."""
    cand = []
    for i, d in enumerate(detections):
        for j, g in enumerate(truth):
            if _bbox_disjoint(d, g):
                continue
            m = overlap_ratio(d, g, frame)
            if m > th_o:
                cand.append((-m, i, j))
    cand.sort()
    used_d, used_g, pairs = set(), set(), []
    for neg, i, j in cand:
        if i in used_d or j in used_g:
            continue
        used_d.add(i)
        used_g.add(j)
        pairs.append((i, j, -neg))
    return pairs


def match_and_score(detections, truth, th_o: float = TH_O, frame=(400, 400)) -> EvalResult:
    detections = list(detections)
    truth = list(truth)
    n = len(match(detections, truth, frame, th_o))
    p, r, f = prf(n, len(detections), len(truth))
    return EvalResult(p, r, f, n_det=len(detections), n_truth=len(truth), n_match=n)


def evaluate_image(image, truth, cfg: DetectorConfig | None = None, name: str = "") -> EvalResult:
    cfg = cfg or DetectorConfig()
    gray = to_grayscale(image)
    rep = detect(gray, cfg)
    res = match_and_score(rep.params, truth, cfg.th_overlap, (gray.width, gray.height))
    res.cc = rep.cc
    res.stage_times = dict(rep.stage_times)
    res.total_time = rep.total_time
    res.n_arcs = rep.n_arcs_pruned
    res.name = name
    return res


def aggregate(rows) -> EvalResult:
    """Pooled P/R/F over all images; CC, arc counts and times are per-image means."""
    rows = list(rows)
    if not rows:
        return EvalResult(1.0, 1.0, 1.0, name="aggregate")
    n_det = sum(r.n_det for r in rows)
    n_truth = sum(r.n_truth for r in rows)
    n_match = sum(r.n_match for r in rows)
    p, r, f = prf(n_match, n_det, n_truth)
    times = {s: float(np.mean([row.stage_times.get(s, 0.0) for row in rows])) for s in STAGES}
    return EvalResult(
        p, r, f,
        cc=float(np.mean([row.cc for row in rows])),
        stage_times=times,
        n_det=n_det, n_truth=n_truth, n_match=n_match, name="aggregate",
        n_arcs=float(np.mean([row.n_arcs for row in rows])),
        total_time=float(np.mean([row.total_time for row in rows])),
    )


# ---------------------------------------------------------------------------
# datasets on disk


def dataset_items(dataset):
    """Sorted ``(image_path, truth_path)`` pairs; every image needs a sidecar."""
    root = Path(dataset)
    if not root.is_dir():
        raise DatasetFormatError(root, 0, "not a directory")
    items = []
    for img in sorted(root.iterdir()):
        if img.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        truth = img.with_suffix(SIDECAR_SUFFIX)
        if not truth.exists():
            raise DatasetFormatError(truth, 0, f"missing ground truth for {img.name}")
        items.append((img, truth))
    return items


def _eval_item(args):
    img, truth, cfg = args
    return evaluate_image(read_image(img), read_truth(truth), cfg, img.name)


def run_benchmark(dataset, cfg: DetectorConfig | None = None, jobs: int = 1):
    """Detect and score every image of a dataset directory.

    Returns ``(aggregate, rows)``.  With ``jobs > 1`` images are processed in
    separate worker processes; stage times are then only indicative.
    """
    cfg = cfg or DetectorConfig()
    items = dataset_items(dataset)
    # parse all sidecars up front so format errors surface before any work
    for _, truth in items:
        read_truth(truth)
    work = [(img, truth, cfg) for img, truth in items]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_eval_item, work))
    else:
        rows = [_eval_item(w) for w in work]
    return aggregate(rows), rows


def evaluate_scenes(scenes, cfg: DetectorConfig | None = None):
    """Score in-memory ``(image, truth, name)`` triples; returns ``(aggregate, rows)``."""
    rows = [evaluate_image(img, truth, cfg, name) for img, truth, name in scenes]
    return aggregate(rows), rows


# ---------------------------------------------------------------------------
# sweeps


def ablation(scenes, base: DetectorConfig | None = None, cnl_grid=TH_CNL_GRID, cnc_grid=TH_CNC_GRID):
    """Line-pruning and CNC threshold sweeps over in-memory scenes.

    Returns a list of dict rows with the swept parameter, mean surviving arc
    count, mean CC, mean time and pooled F-measure.
    """
    base = base or DetectorConfig()
    scenes = list(scenes)
    out = []
    for name, key, grid in (("th_cnl", "th_cnl", cnl_grid), ("th_cnc", "th_cnc", cnc_grid)):
        for v in grid:
            agg, _ = evaluate_scenes(scenes, base.replace(**{key: float(v)}))
            out.append({
                "parameter": name, "value": float(v), "arcs": agg.n_arcs, "cc": agg.cc,
                "time_ms": agg.total_time, "f_measure": agg.f_measure,
            })
    return out


# ---------------------------------------------------------------------------
# reports


def report_dict(agg: EvalResult, rows, cfg: DetectorConfig | None = None, timings=True):
    def clean(r):
        d = r.as_dict()
        if not timings:
            d.pop("stage_times")
            d.pop("total_time")
        return d

    out = {"aggregate": clean(agg), "images": [clean(r) for r in rows]}
    if cfg is not None:
        out["config"] = {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in cfg.as_dict().items()}
    return out


def write_json(path, agg, rows, cfg=None):
    Path(path).write_text(json.dumps(report_dict(agg, rows, cfg), indent=2) + "\n")


CSV_FIELDS = ("image", "precision", "recall", "f_measure", "cc") + tuple(f"{s} (ms)" for s in STAGES)


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([r.name, r.precision, r.recall, r.f_measure, r.cc]
                       + [r.stage_times.get(s, 0.0) for s in STAGES])


def format_ablation(rows) -> str:
    lines = [f"{'parameter':<10}{'value':>8}{'arcs':>10}{'CC':>10}{'time ms':>10}{'F':>8}"]
    for r in rows:
        lines.append(
            f"{r['parameter']:<10}{r['value']:>8g}{r['arcs']:>10.1f}{r['cc']:>10.1f}"
            f"{r['time_ms']:>10.2f}{r['f_measure']:>8.3f}"
        )
    return "\n".join(lines)
