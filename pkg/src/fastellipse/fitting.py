"""Ellipse parameters from an arc triple.

The center comes from conjugate diameters: midpoints of parallel chords
between two adjacent arcs lie on a line through the center.  Two chord
families per arc pair and two pairs per triple give four such lines whose
pairwise intersections are averaged.  Axes and orientation then follow from
a least-squares fit of a conic centred on that point.
"""

from __future__ import annotations

import math

import numpy as np

from .ellipse import EllipseParams
from .errors import DegenerateCenter, FitError, IllConditioned, InsufficientSpan, NotAnEllipse
from .geometry import HomogeneousPoint

N_D = 16
MIN_CHORDS = 4
# a chord end is rejected when the crossings on one arc spread wider than this
CROSSING_SPREAD = 3.0
MIN_W = 1e-10
MAX_COND = 1e12


def _row_medians(a):
    a = np.sort(a, axis=-1)
    k = a.shape[-1]
    if k % 2:
        return a[..., k // 2]
    return 0.5 * (a[..., k // 2 - 1] + a[..., k // 2])


def repeated_median_line(v, u, max_pairs=None, seed=0):
    """Robust fit ``u = intercept + slope * v`` (Siegel's repeated median).

    With ``max_pairs`` set and more pairs than that available, each point's
    inner median uses a seeded random subset of partners.
    Returns ``(intercept, slope)``.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    n = len(v)
    if n < 2:
        raise ValueError("need at least two points")
    dv = v[None, :] - v[:, None]
    du = u[None, :] - u[:, None]
    off = ~np.eye(n, dtype=bool)
    valid = off & (np.abs(dv) > 1e-12)
    subsample = max_pairs is not None and n * (n - 1) > max_pairs
    if not subsample and valid.sum() == n * (n - 1):
        # distinct abscissae: plain medians over the off-diagonal
        inner = _row_medians((du[off] / dv[off]).reshape(n, n - 1))
    else:
        if subsample:
            k = max(2, int(max_pairs // n))
            rng = np.random.default_rng(seed)
            mask = np.zeros_like(valid)
            for i in range(n):
                mask[i, rng.choice(n, size=min(k, n), replace=False)] = True
            valid &= mask
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = np.where(valid, du / np.where(valid, dv, 1.0), np.nan)
        rows = valid.any(axis=1)
        if not rows.any():
            raise ValueError("all points share one abscissa")
        inner = np.nanmedian(slopes[rows], axis=1)
    slope = float(_row_medians(inner))
    intercept = float(_row_medians(u - slope * v))
    return intercept, slope


def _crossings(offsets, xy, levels):
    """Where a polyline crosses each ``offset == level``.

    Returns ``(points, ok)``; a level is not ok when the polyline misses it
    or its crossings spread wider than ``CROSSING_SPREAD``.
    """
    n_l = len(levels)
    s = offsets[:, None] - levels[None, :]
    neg = s <= 0
    lvl, seg = np.nonzero((neg[:-1] != neg[1:]).T)
    s0 = s[seg, lvl]
    t = s0 / (s0 - s[seg + 1, lvl])
    p0 = xy[seg]
    pts = p0 + t[:, None] * (xy[seg + 1] - p0)
    count = np.bincount(lvl, minlength=n_l)
    safe = np.maximum(count, 1)
    out = np.column_stack((
        np.bincount(lvl, pts[:, 0], n_l) / safe,
        np.bincount(lvl, pts[:, 1], n_l) / safe,
    ))
    ok = count > 0
    if (count > 1).any():
        starts = (np.cumsum(count) - count)[ok]
        spread = np.maximum(
            np.maximum.reduceat(pts[:, 0], starts) - np.minimum.reduceat(pts[:, 0], starts),
            np.maximum.reduceat(pts[:, 1], starts) - np.minimum.reduceat(pts[:, 1], starts),
        )
        ok[ok] = spread <= CROSSING_SPREAD
    return out, ok


def far_end(xa, target):
    """The endpoint of polyline ``xa`` farther from ``target``."""
    d0 = np.sum((xa[0] - target) ** 2)
    d1 = np.sum((xa[-1] - target) ** 2)
    return xa[0] if d0 >= d1 else xa[-1]


def chord_midpoints(arc_a, arc_b, n_d=N_D):
    """Midpoints of ``n_d`` chords parallel to (outer end of a) -> (middle of b).

    The outer end of ``a`` is the endpoint farther from the middle of ``b``.
    Returns ``(direction, normal, midpoints, levels)`` where ``midpoints``
    holds only the chords that cross both arcs cleanly.
    """
    xa = arc_a.xy()
    xb = arc_b.xy()
    fb = xb[len(xb) // 2]
    d = fb - far_end(xa, fb)
    norm = math.hypot(d[0], d[1])
    if norm < 1e-9:
        raise InsufficientSpan("base chord has zero length")
    d = d / norm
    nrm = np.array([-d[1], d[0]])
    oa = xa @ nrm
    ob = xb @ nrm
    lo = max(oa.min(), ob.min())
    hi = min(oa.max(), ob.max())
    if not hi - lo > 1e-6:
        raise InsufficientSpan("arcs do not overlap across the chord direction")
    levels = lo + (hi - lo) * np.arange(1, n_d + 1) / (n_d + 1)
    pa, oka = _crossings(oa, xa, levels)
    pb, okb = _crossings(ob, xb, levels)
    ok = oka & okb
    return d, nrm, 0.5 * (pa[ok] + pb[ok]), levels[ok]


def chord_midline(arc_a, arc_b, n_d: int = N_D):
    """Line through the midpoints of chords parallel to (start of a, middle of b).

    Returned as two homogeneous points on the line.
    """
    d, nrm, mids, levels = chord_midpoints(arc_a, arc_b, n_d)
    if len(mids) < MIN_CHORDS:
        raise InsufficientSpan(f"only {len(mids)} chords span both arcs")
    # along-chord position as a function of the offset level
    try:
        intercept, slope = repeated_median_line(levels, mids @ d)
    except ValueError as exc:
        raise InsufficientSpan(str(exc)) from exc
    l0, l1 = levels[0], levels[-1]
    p0 = (intercept + slope * l0) * d + l0 * nrm
    p1 = (intercept + slope * l1) * d + l1 * nrm
    return HomogeneousPoint(p0[0], p0[1], 1.0), HomogeneousPoint(p1[0], p1[1], 1.0)


def _cross3(p, q):
    return (
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    )


def _midline(a, b, n_d, cache):
    key = (id(a), id(b))
    if cache is not None and key in cache:
        return cache[key]
    try:
        p, q = chord_midline(a, b, n_d)
        line = _cross3(tuple(p), tuple(q))
    except InsufficientSpan:
        line = None
    if cache is not None:
        cache[key] = line
    return line


def center_lines(triple, n_d=N_D, cache=None):
    """Up to four center lines: both chord families for (arc1, arc2) and (arc1, arc3).

    ``cache`` (a dict) shares lines between triples with a common arc pair.
    """
    pairs = ((triple.arc1, triple.arc2), (triple.arc2, triple.arc1),
             (triple.arc1, triple.arc3), (triple.arc3, triple.arc1))
    lines = (_midline(a, b, n_d, cache) for a, b in pairs)
    return [ln for ln in lines if ln is not None]


def estimate_center(triple, n_d: int = N_D, cache=None):
    """Mean of the finite pairwise intersections of the center lines."""
    lines = center_lines(triple, n_d, cache)
    sx = sy = 0.0
    k = 0
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            x, y, w = _cross3(lines[i], lines[j])
            nrm = math.sqrt(x * x + y * y + w * w)
            if nrm == 0 or abs(w) / nrm < MIN_W:
                continue
            sx += x / w
            sy += y / w
            k += 1
    if k < 2:
        raise DegenerateCenter(f"only {k} finite center-line intersections")
    return sx / k, sy / k


def triple_points(triple):
    return np.concatenate([a.xy() for a in triple.arcs])


_P, _I = np.indices((5, 5))
_COMB = np.where(_I <= _P, np.vectorize(math.comb)(_P, _I), 0).astype(float)
_EXP = np.clip(_P - _I, 0, None)


def _binomial_shift(e):
    """Matrix ``B`` with ``B[p, i] = C(p, i) * e**(p - i)``, so (d + e)^p = sum_i B[p, i] d^i."""
    return _COMB * np.power(e, _EXP)


def arc_moments(arc):
    """Raw moments ``m[i, j] = sum dx^i dy^j`` (i, j <= 4) about the arc's first point.

    Cached on the arc, like its coordinates.
    """
    cached = arc.__dict__.get("_moments")
    if cached is None:
        xy = arc.xy()
        o = xy[0]
        d = xy - o
        px = d[:, 0, None] ** np.arange(5)
        py = d[:, 1, None] ** np.arange(5)
        cached = (float(o[0]), float(o[1]), px.T @ py)
        arc.__dict__["_moments"] = cached
    return cached


def _central_sums(moments, cx, cy):
    """``S[p, q] = sum (x - cx)^p (y - cy)^q`` over all arcs, from cached moments."""
    e = np.array([(ox - cx, oy - cy) for ox, oy, _ in moments])
    b = _COMB * np.power(e[:, :, None, None], _EXP)
    m = np.stack([mm for _, _, mm in moments])
    return np.einsum("kpi,kij,kqj->pq", b[:, 0], m, b[:, 1])


def _solve_central(S, cx, cy):
    N = np.array([
        [S[4, 0], S[3, 1], S[2, 2]],
        [S[3, 1], S[2, 2], S[1, 3]],
        [S[2, 2], S[1, 3], S[0, 4]],
    ])
    rhs = np.array([S[2, 0], S[1, 1], S[0, 2]])
    if not rhs[0] + rhs[2] > 0:
        raise NotAnEllipse("all points coincide with the center")
    # entries share one degree, so the condition number is scale-free
    ev, vec = np.linalg.eigh(N)
    if ev[0] <= 0 or ev[-1] / ev[0] > MAX_COND:
        raise IllConditioned("normal equations are ill-conditioned")
    A, B, C = vec @ ((vec.T @ rhs) / ev)
    if not (A > 0 and 4 * A * C - B * B > 0):
        raise NotAnEllipse("fitted central conic is not positive definite")
    mean = 0.5 * (A + C)
    rad = math.hypot(0.5 * (A - C), 0.5 * B)
    a = 1.0 / math.sqrt(mean - rad)
    b = 1.0 / math.sqrt(mean + rad)
    theta = 0.5 * math.atan2(B, A - C) + math.pi / 2 if rad > 0 else 0.0
    return EllipseParams(cx, cy, a, b, theta)


def fit_central_conic(xy, center):
    """Least-squares ``A x^2 + B xy + C y^2 = 1`` about ``center``; returns EllipseParams."""
    cx, cy = center
    pts = np.asarray(xy, dtype=float) - (cx, cy)
    px = pts[:, 0, None] ** np.arange(5)
    py = pts[:, 1, None] ** np.arange(5)
    return _solve_central(px.T @ py, cx, cy)


def fit_axes_orientation(triple, center) -> EllipseParams:
    cx, cy = center
    if not (math.isfinite(cx) and math.isfinite(cy)):
        raise DegenerateCenter("center is not finite")
    return _solve_central(_central_sums([arc_moments(a) for a in triple.arcs], cx, cy), cx, cy)


def fit_triple(triple, n_d: int = N_D, cache=None) -> EllipseParams:
    return fit_axes_orientation(triple, estimate_center(triple, n_d, cache))


def _solve_central_batch(S, centers):
    """Vectorised ``_solve_central``; rows that fail any check come back as None."""
    N = np.stack([
        np.stack([S[:, 4, 0], S[:, 3, 1], S[:, 2, 2]], axis=-1),
        np.stack([S[:, 3, 1], S[:, 2, 2], S[:, 1, 3]], axis=-1),
        np.stack([S[:, 2, 2], S[:, 1, 3], S[:, 0, 4]], axis=-1),
    ], axis=1)
    rhs = np.stack([S[:, 2, 0], S[:, 1, 1], S[:, 0, 2]], axis=-1)
    ev, vec = np.linalg.eigh(N)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        good = (rhs[:, 0] + rhs[:, 2] > 0) & (ev[:, 0] > 0) & (ev[:, -1] / ev[:, 0] <= MAX_COND)
        coef = np.einsum("tij,tj->ti", vec, np.einsum("tji,tj->ti", vec, rhs) / ev)
        A, B, C = coef.T
        good &= (A > 0) & (4 * A * C - B * B > 0)
        mean = 0.5 * (A + C)
        rad = np.hypot(0.5 * (A - C), 0.5 * B)
        a = 1.0 / np.sqrt(mean - rad)
        b = 1.0 / np.sqrt(mean + rad)
    theta = np.where(rad > 0, 0.5 * np.arctan2(B, A - C) + math.pi / 2, 0.0)
    return [
        EllipseParams(float(cx), float(cy), float(a[i]), float(b[i]), float(theta[i])) if good[i] else None
        for i, (cx, cy) in enumerate(centers)
    ]


def fit_triples(triples, n_d: int = N_D, cache=None):
    """``fit_triple`` over many triples at once.

    Returns ``(params, triple)`` pairs for the triples that fit; failures are
    dropped exactly where ``fit_triple`` would raise FitError.
    """
    if cache is None:
        cache = {}
    done, centers = [], []
    for tr in triples:
        try:
            c = estimate_center(tr, n_d, cache)
        except FitError:
            continue
        if math.isfinite(c[0]) and math.isfinite(c[1]):
            done.append(tr)
            centers.append(c)
    if not done:
        return []
    slot, origins, mats = {}, [], []
    idx = np.empty((len(done), 3), dtype=np.intp)
    for t, tr in enumerate(done):
        for k, arc in enumerate(tr.arcs):
            j = slot.get(id(arc))
            if j is None:
                ox, oy, m = arc_moments(arc)
                j = slot[id(arc)] = len(mats)
                origins.append((ox, oy))
                mats.append(m)
            idx[t, k] = j
    C = np.asarray(centers)
    e = np.asarray(origins)[idx] - C[:, None, :]
    B = _COMB * np.power(e[..., None, None], _EXP)
    S = np.einsum("tkpi,tkij,tkqj->tpq", B[:, :, 0], np.asarray(mats)[idx], B[:, :, 1])
    fits = _solve_central_batch(S, centers)
    return [(p, tr) for p, tr in zip(fits, done) if p is not None]


def direct_conic_center(xy):
    """Center of an unconstrained algebraic conic fit (reference only)."""
    xy = np.asarray(xy, dtype=float)
    m = xy.mean(axis=0)
    s = math.sqrt(float(np.mean(np.sum((xy - m) ** 2, axis=1))))
    x = (xy[:, 0] - m[0]) / s
    y = (xy[:, 1] - m[1]) / s
    D = np.column_stack((x * x, x * y, y * y, x, y, np.ones_like(x)))
    _, _, vt = np.linalg.svd(D)
    A, B, C, Dd, E, _ = vt[-1]
    det = 4 * A * C - B * B
    x0 = (B * E - 2 * C * Dd) / det
    y0 = (B * Dd - 2 * A * E) / det
    return float(x0 * s + m[0]), float(y0 * s + m[1])
