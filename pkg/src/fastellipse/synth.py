"""Synthetic test imagery: stroked ellipses and segments on white, plus salt and pepper."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .edges import GrayImage, write_image
from .ellipse import EllipseParams
from .errors import OutOfFrame
from .truth import write_truth

NOISE_DENSITIES = (0.03, 0.06, 0.09, 0.12, 0.15, 0.18)


@dataclass
class SceneSpec:
    width: int = 400
    height: int = 400
    ellipses: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    stroke_width: float = 1.0
    noise_density: float = 0.0
    seed: int = 0
    name: str = ""


def _stroke_coverage(dist, width):
    return np.clip(0.5 * width + 0.5 - np.abs(dist), 0.0, 1.0)


def _window(x0, y0, x1, y1, pad, w, h):
    c0 = max(int(math.floor(x0 - pad)), 0)
    r0 = max(int(math.floor(y0 - pad)), 0)
    c1 = min(int(math.ceil(x1 + pad)) + 1, w)
    r1 = min(int(math.ceil(y1 + pad)) + 1, h)
    return r0, r1, c0, c1


def _draw_ellipse(cov, e: EllipseParams, width):
    h, w = cov.shape
    pad = width + 2
    r0, r1, c0, c1 = _window(*e.bbox(), pad, w, h)
    if r0 >= r1 or c0 >= c1:
        return
    yy, xx = np.mgrid[r0:r1, c0:c1]
    d = e.approx_distance(xx, yy)
    np.maximum(cov[r0:r1, c0:c1], _stroke_coverage(d, width), out=cov[r0:r1, c0:c1])


def _segment_distance(xx, yy, p, q):
    px, py = p
    dx, dy = q[0] - px, q[1] - py
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return np.hypot(xx - px, yy - py)
    t = np.clip(((xx - px) * dx + (yy - py) * dy) / L2, 0.0, 1.0)
    return np.hypot(xx - (px + t * dx), yy - (py + t * dy))


def _draw_segment(cov, seg, width):
    h, w = cov.shape
    (x0, y0), (x1, y1) = seg
    r0, r1, c0, c1 = _window(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1), width + 2, w, h)
    if r0 >= r1 or c0 >= c1:
        return
    yy, xx = np.mgrid[r0:r1, c0:c1]
    d = _segment_distance(xx, yy, (x0, y0), (x1, y1))
    np.maximum(cov[r0:r1, c0:c1], _stroke_coverage(d, width), out=cov[r0:r1, c0:c1])


def add_salt_and_pepper(data, density, seed=0):
    """Flip each pixel to 0 or 255, each with probability ``density / 2``."""
    if not 0 <= density <= 1:
        raise ValueError("noise density must be in [0, 1]")
    out = np.array(data, copy=True)
    if density == 0:
        return out
    u = np.random.default_rng(seed).random(out.shape)
    out[u < density / 2] = 0
    out[(u >= density / 2) & (u < density)] = 255
    return out


def render(spec: SceneSpec) -> GrayImage:
    """Black anti-aliased strokes on white, then optional salt and pepper."""
    for e in spec.ellipses:
        x0, y0, x1, y1 = e.bbox()
        if x0 < 0 or y0 < 0 or x1 > spec.width - 1 or y1 > spec.height - 1:
            raise OutOfFrame(f"ellipse {e} leaves the {spec.width}x{spec.height} frame")
    cov = np.zeros((spec.height, spec.width))
    for e in spec.ellipses:
        _draw_ellipse(cov, e, spec.stroke_width)
    for seg in spec.lines:
        _draw_segment(cov, seg, spec.stroke_width)
    data = np.rint(255.0 * (1.0 - cov)).astype(np.uint8)
    data = add_salt_and_pepper(data, spec.noise_density, spec.seed)
    return GrayImage(data)


# ---------------------------------------------------------------------------
# sweeps


def sweep_ratio_orientation(ratios=None, degrees=None, size=400, semi_axis=100.0):
    """Fixed semi-axis 100; axes ratio 0.01..1.00 by 0.01 times orientation 1..90 degrees."""
    ratios = [k / 100 for k in range(1, 101)] if ratios is None else list(ratios)
    degrees = list(range(1, 91)) if degrees is None else list(degrees)
    c = size / 2
    specs = []
    for r in ratios:
        for deg in degrees:
            e = EllipseParams(c, c, semi_axis, semi_axis * r, math.radians(deg))
            specs.append(SceneSpec(size, size, [e], name=f"ratio{r:.2f}_deg{deg:g}"))
    return specs


def sweep_axis_ratio(axes=None, ratios=None, size=400, theta_deg=0.0):
    """Semi-axis 1..100 by 1 times axes ratio 0.01..1.00; center and orientation fixed."""
    axes = list(range(1, 101)) if axes is None else list(axes)
    ratios = [k / 100 for k in range(1, 101)] if ratios is None else list(ratios)
    c = size / 2
    specs = []
    for ax in axes:
        for r in ratios:
            e = EllipseParams(c, c, float(ax), ax * r, math.radians(theta_deg))
            specs.append(SceneSpec(size, size, [e], name=f"axis{ax:g}_ratio{r:.2f}"))
    return specs


def noise_series(specs, densities=NOISE_DENSITIES, include_clean=True):
    out = []
    levels = ((0.0,) if include_clean else ()) + tuple(densities)
    for spec in specs:
        for d in levels:
            out.append(
                SceneSpec(
                    spec.width, spec.height, list(spec.ellipses), list(spec.lines), spec.stroke_width,
                    d, spec.seed, f"{spec.name}_noise{round(d * 100):02d}",
                )
            )
    return out


def random_scene(seed, n_ellipses=(3, 6), n_lines=(5, 10), size=400, axis_range=(25.0, 80.0),
                 min_ratio=0.4, max_tries=500) -> SceneSpec:
    """Several non-touching ellipses plus random distractor segments."""
    rng = np.random.default_rng(seed)
    want = int(rng.integers(n_ellipses[0], n_ellipses[1] + 1))
    ellipses = []
    margin = 4.0
    tries = 0
    while len(ellipses) < want and tries < max_tries:
        tries += 1
        a = float(rng.uniform(*axis_range))
        b = a * float(rng.uniform(min_ratio, 1.0))
        th = float(rng.uniform(0, math.pi))
        cx = float(rng.uniform(a + margin, size - a - margin))
        cy = float(rng.uniform(a + margin, size - a - margin))
        e = EllipseParams(cx, cy, a, b, th)
        x0, y0, x1, y1 = e.bbox()
        if x0 < margin or y0 < margin or x1 > size - 1 - margin or y1 > size - 1 - margin:
            continue
        if any(math.hypot(cx - o.cx, cy - o.cy) < a + o.a + 6 for o in ellipses):
            continue
        ellipses.append(e)
    lines = []
    for _ in range(int(rng.integers(n_lines[0], n_lines[1] + 1))):
        length = float(rng.uniform(60, 250))
        ang = float(rng.uniform(0, math.pi))
        x0 = float(rng.uniform(5, size - 5))
        y0 = float(rng.uniform(5, size - 5))
        x1 = float(np.clip(x0 + length * math.cos(ang), 5, size - 5))
        y1 = float(np.clip(y0 + length * math.sin(ang), 5, size - 5))
        lines.append(((x0, y0), (x1, y1)))
    return SceneSpec(size, size, ellipses, lines, seed=seed, name=f"scene{seed:04d}")


def materialize(specs, out_dir, fmt="png"):
    """Render each spec to ``out_dir`` with a ground-truth sidecar; returns image paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, spec in enumerate(specs):
        stem = spec.name or f"img{i:05d}"
        img_path = out_dir / f"{stem}.{fmt}"
        write_image(render(spec), img_path)
        write_truth(out_dir / f"{stem}.txt", spec.ellipses)
        paths.append(img_path)
    return paths
