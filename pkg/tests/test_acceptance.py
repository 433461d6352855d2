"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``RESULTS`` and repeated in the pytest terminal
summary (see conftest.py).  Run ``python tests/test_acceptance.py`` to get
them without pytest.
"""

import math
import time

import numpy as np
import pytest

from fastellipse.bench import ablation, evaluate_scenes, overlap_ratio
from fastellipse.detector import DetectorConfig, detect
from fastellipse.ellipse import EllipseParams, angle_diff
from fastellipse.errors import DegenerateDecomposition, EllipseDetectError, IdenticalLines, ParallelChords
from fastellipse.geometry import cnc_from_six, cnl, pascal_collinearity_residual
from fastellipse.synth import SceneSpec, noise_series, random_scene, render, sweep_axis_ratio, sweep_ratio_orientation

RESULTS = {}
FRAME = (400, 400)


def report(n, ok, details):
    line = f"CRITERION {n} {'PASS' if ok else 'FAIL'}: {details}"
    RESULTS[n] = line
    print(line, flush=True)
    return ok


def _random_homography(rng):
    while True:
        H = np.eye(3) + rng.normal(0, 0.3, (3, 3))
        H[2, :2] = rng.normal(0, 1e-3, 2)
        if np.linalg.cond(H) < 1e4:
            return H


def _map(H, pts):
    v = np.column_stack((np.asarray(pts, float), np.ones(len(pts)))) @ H.T
    return [tuple(p) for p in v[:, :2] / v[:, 2:]]


def _conic_six(rng):
    a = rng.uniform(20, 150)
    b = a * rng.uniform(0.2, 1.0)
    e = EllipseParams(*rng.uniform(-200, 200, 2), a, b, rng.uniform(0, math.pi))
    ts = np.sort(rng.uniform(0, 2 * math.pi, 6))
    c, s = math.cos(e.theta), math.sin(e.theta)
    u, v = a * np.cos(ts), b * np.sin(ts)
    return [tuple(p) for p in np.column_stack((e.cx + c * u - s * v, e.cy + s * u + c * v))]


def _detected(e, params, th=0.8):
    return any(overlap_ratio(d, e, FRAME) > th for d in params)


# ---------------------------------------------------------------------------


def test_criterion_1_invariants():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    cnl_err = cnl_h = 0.0
    n_cnl = 0
    while n_cnl < 1000:
        P = rng.uniform(-100, 100, (3, 2))
        s, u = rng.uniform(0.1, 0.9, 2)
        q1 = P[0] + s * (P[1] - P[0])
        q2 = P[1] + u * (P[2] - P[1])
        q3 = np.cross(np.cross([*q1, 1], [*q2, 1]), np.cross([*P[2], 1], [*P[0], 1]))
        if abs(q3[2]) < 1e-9:
            continue
        pts = [tuple(P[0]), tuple(P[1]), tuple(P[2]), tuple(q1), tuple(q2), tuple(q3[:2] / q3[2])]
        try:
            v = cnl(*pts)
        except DegenerateDecomposition:
            continue
        n_cnl += 1
        cnl_err = max(cnl_err, abs(v + 1))
        cnl_h = max(cnl_h, abs(cnl(*_map(_random_homography(rng), pts)) - v) / abs(v))
    cnc_err = cnc_h = 0.0
    n_cnc = 0
    while n_cnc < 1000:
        pts = _conic_six(rng)
        try:
            v = cnc_from_six(pts)
        except (ParallelChords, IdenticalLines, DegenerateDecomposition):
            continue
        n_cnc += 1
        cnc_err = max(cnc_err, abs(v - 1))
        w = cnc_from_six(_map(_random_homography(rng), pts), guard_far=False)
        cnc_h = max(cnc_h, abs(w - v) / abs(v))
    dt = time.perf_counter() - t0
    ok = cnl_err <= 1e-9 and cnc_err <= 1e-6 and cnl_h <= 1e-6 and cnc_h <= 1e-6 and dt < 5
    assert report(1, ok, f"max|CNL+1|={cnl_err:.1e} max|CNC-1|={cnc_err:.1e} "
                         f"homography rel CNL={cnl_h:.1e} CNC={cnc_h:.1e} ({dt:.1f} s)")


def test_criterion_2_pascal():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    agree = total = 0
    while total < 1000:
        pts = _conic_six(rng) if total % 2 == 0 else [tuple(p) for p in rng.uniform(-200, 200, (6, 2))]
        try:
            v = cnc_from_six(pts, guard_far=False)
        except (ParallelChords, IdenticalLines, DegenerateDecomposition):
            continue
        total += 1
        agree += (abs(v - 1) < 1e-6) == (pascal_collinearity_residual(pts) < 1e-8)
    dt = time.perf_counter() - t0
    assert report(2, agree == total and dt < 5, f"{agree}/{total} agree ({dt:.1f} s)")


def _cnc_map(e, degs):
    fixed = [tuple(e.points(1, math.radians(d))[0]) for d in degs]

    def dis(q):
        try:
            return abs(cnc_from_six(fixed + [q]) - 1)
        except EllipseDetectError:
            return math.inf

    on = np.array([dis(tuple(p)) for p in e.points(720)]) <= 0.4
    area = np.array([[dis((x + 0.5, y + 0.5)) for x in range(FRAME[0])] for y in range(FRAME[1])]) <= 0.4
    return on.mean(), area.mean()


def test_criterion_3_cnc_map():
    t0 = time.perf_counter()
    e = EllipseParams(200, 200, 120, 70, math.radians(20))
    bd, area = _cnc_map(e, (0, 72, 144, 216, 288))
    dt = time.perf_counter() - t0
    # two clustered arcs leave the sixth point less constrained
    bd2, area2 = _cnc_map(e, (100, 135, 170, 10, 45))
    ok = bd >= 0.95 and area <= 0.10 and dt < 30
    assert report(3, ok, f"spread five points: boundary {bd:.3f}, area {area:.3f} ({dt:.1f} s); "
                         f"two-arc layout: boundary {bd2:.3f}, area {area2:.3f}")


def test_criterion_4_sweeps():
    t0 = time.perf_counter()
    ratios = [k / 20 for k in range(1, 21)]
    degs = [int(round(x)) for x in np.linspace(1, 90, 20)]
    axes = list(range(5, 101, 5))
    strict, soft = [], []
    for spec in sweep_ratio_orientation(ratios, degs):
        e = spec.ellipses[0]
        if e.b / e.a >= 0.25:
            strict.append(_detected(e, detect(render(spec)).params))
    n_ro = len(strict)
    for spec in sweep_axis_ratio(axes, ratios):
        e = spec.ellipses[0]
        ratio = e.b / e.a
        if ratio < 0.25 or e.a < 10:
            continue
        hit = _detected(e, detect(render(spec)).params)
        (strict if e.a >= 30 else soft).append(hit)
    dt = time.perf_counter() - t0
    s, w = np.mean(strict), np.mean(soft)
    ok = s >= 0.95 and w >= 0.70 and dt < 180
    assert report(4, ok, f"a>=30: {sum(strict)}/{len(strict)} = {s:.1%} (ratio-orientation {sum(strict[:n_ro])}/{n_ro}); "
                         f"10<=a<30: {sum(soft)}/{len(soft)} = {w:.1%} ({dt:.0f} s)")


def test_criterion_5_candidate_reduction():
    t0 = time.perf_counter()
    scenes = []
    for seed in range(50):
        spec = random_scene(seed)
        scenes.append((render(spec), spec.ellipses, spec.name))
    none, _ = evaluate_scenes(scenes, DetectorConfig(th_length=2, prune_lines=False, use_cnc=False))
    prune, _ = evaluate_scenes(scenes, DetectorConfig(use_cnc=False))
    both, _ = evaluate_scenes(scenes, DetectorConfig())
    dt = time.perf_counter() - t0
    r1 = 1 - prune.cc / none.cc
    r2 = 1 - both.cc / prune.cc
    ok = r1 >= 0.8 and r2 >= 0.6 and both.f_measure >= none.f_measure and dt < 120
    assert report(5, ok, f"CC {none.cc:.0f} -> {prune.cc:.0f} ({r1:.1%}) -> {both.cc:.1f} ({r2:.1%}); "
                         f"F {none.f_measure:.3f} -> {both.f_measure:.3f} ({dt:.0f} s)")


def test_criterion_6_threshold_sweeps():
    t0 = time.perf_counter()
    scenes = []
    for seed in range(100, 110):
        spec = random_scene(seed)
        scenes.append((render(spec), spec.ellipses, spec.name))
    rows = ablation(scenes)
    dt = time.perf_counter() - t0
    arcs = [r["arcs"] for r in rows if r["parameter"] == "th_cnl"]
    cnc = [r for r in rows if r["parameter"] == "th_cnc"]
    cc = [r["cc"] for r in cnc]
    f = {r["value"]: r["f_measure"] for r in cnc}
    mono_arcs = all(x >= y for x, y in zip(arcs, arcs[1:]))
    mono_cc = all(x <= y for x, y in zip(cc, cc[1:]))
    ok = mono_arcs and mono_cc and f[0.0] < f[0.2] and dt < 300
    assert report(6, ok, f"arcs {[round(a, 1) for a in arcs]} non-increasing={mono_arcs}; "
                         f"CC {cc[0]:.1f}..{cc[-1]:.1f} non-decreasing={mono_cc}; "
                         f"F(0)={f[0.0]:.3f} F(0.2)={f[0.2]:.3f} ({dt:.0f} s)")


def test_criterion_7_noise():
    t0 = time.perf_counter()
    specs = noise_series([random_scene(seed) for seed in range(30)])
    by_level = {}
    for spec in specs:
        by_level.setdefault(spec.noise_density, []).append((render(spec), spec.ellipses, spec.name))
    stats = {d: evaluate_scenes(sc)[0] for d, sc in sorted(by_level.items())}
    dt = time.perf_counter() - t0
    f0 = stats[0.0].f_measure
    t_clean = stats[0.0].total_time
    growth = max(a.total_time for a in stats.values()) / t_clean
    f18 = stats[0.18].f_measure
    ok = f18 >= 0.5 * f0 and growth <= 2 and dt < 180
    curve = " ".join(f"{round(d * 100)}%:{a.f_measure:.2f}" for d, a in stats.items())
    assert report(7, ok, f"F {curve}; F18/F0={f18 / f0:.2f}; time growth {growth:.2f}x ({dt:.0f} s)")


def _random_single(rng, amin, amax):
    while True:
        a = rng.uniform(amin, amax)
        e = EllipseParams(rng.uniform(a + 5, 395 - a), rng.uniform(a + 5, 395 - a), a, a * rng.uniform(0.25, 1),
                          rng.uniform(0, math.pi))
        x0, y0, x1, y1 = e.bbox()
        if x0 > 2 and y0 > 2 and x1 < 397 and y1 < 397:
            return e


def test_criterion_8_speed():
    rng = np.random.default_rng(8)
    imgs = [render(SceneSpec(400, 400, [_random_single(rng, 20, 100)])) for _ in range(100)]
    detect(imgs[0])  # warm-up
    times, dev = [], 0.0
    for img in imgs:
        t = time.perf_counter()
        rep = detect(img)
        times.append((time.perf_counter() - t) * 1e3)
        dev = max(dev, abs(sum(rep.stage_times.values()) - rep.total_time) / rep.total_time)
    mean = float(np.mean(times))
    assert report(8, mean < 50 and dev <= 0.05,
                  f"mean {mean:.1f} ms, max {max(times):.1f} ms over 100 images; stage-sum deviation {dev:.2%}")


def test_criterion_9_fitting_accuracy():
    rng = np.random.default_rng(9)
    t0 = time.perf_counter()
    center, axes, theta = [], [], []
    missed = 0
    for _ in range(200):
        e = _random_single(rng, 30, 100)
        params = detect(render(SceneSpec(400, 400, [e]))).params
        if not params:
            missed += 1
            center.append(math.inf)
            axes.append(math.inf)
            if e.b / e.a < 0.9:
                theta.append(math.inf)
            continue
        d = max(params, key=lambda p: overlap_ratio(p, e, FRAME))
        center.append(math.hypot(d.cx - e.cx, d.cy - e.cy))
        axes.append(max(abs(d.a - e.a), abs(d.b - e.b)))
        # orientation is only defined for visibly elongated ellipses
        if e.b / e.a < 0.9:
            theta.append(math.degrees(angle_diff(d.theta, e.theta)))
    dt = time.perf_counter() - t0

    def p95(v):
        return float(np.percentile(v, 95, method="higher"))

    def p95_found(v):
        return float(np.percentile([x for x in v if math.isfinite(x)], 95))

    pc, pa, pt = p95(center), p95(axes), p95(theta)
    ok = pc <= 2 and pa <= 2 and pt <= 2 and dt < 60
    assert report(9, ok, f"p95 center {pc:.2f} px, axes {pa:.2f} px, theta {pt:.2f} deg, {missed}/200 missed; "
                         f"detected only: center {p95_found(center):.2f}, axes {p95_found(axes):.2f}, "
                         f"theta {p95_found(theta):.2f} ({dt:.0f} s)")


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
