import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fastellipse.arcs import (
    ArcSegment,
    Quadrant,
    above_below,
    assign_quadrants,
    link_edges,
    prune_lines,
    prune_short,
    quadrant_of,
    quadrant_sets,
    straightness,
)
from fastellipse.edges import EdgePoint, canny_map
from fastellipse.ellipse import EllipseParams
from fastellipse.synth import random_scene, render


def chain(points):
    """Round a dense polyline to an 8-connected pixel chain without repeats."""
    out = []
    for x, y in points:
        p = (int(round(x)), int(round(y)))
        if not out or p != out[-1]:
            out.append(p)
    return out


def arc_from(points, sign):
    pts = chain(points)
    if pts[0] > pts[-1]:
        pts = pts[::-1]
    xs, ys = np.array(pts).T
    return ArcSegment(xs, ys, sign)


def quarter(e, k, n=2000):
    """Quarter ``k`` of an axis-aligned ellipse, counted from +x through screen-up."""
    t = np.linspace(-k * math.pi / 2, -(k + 1) * math.pi / 2, n)
    return np.column_stack((e.cx + e.a * np.cos(t), e.cy + e.b * np.sin(t)))


def is_chain(arc):
    d = np.abs(np.diff(np.column_stack((arc.xs, arc.ys)), axis=0))
    return bool(np.all(d.max(axis=1) == 1))


# --- linking -----------------------------------------------------------------


def test_empty_edges():
    assert link_edges([]) == []


def test_diagonal_line_is_one_arc():
    pts = [EdgePoint(i, i, -1.0) for i in range(20)]
    arcs = link_edges(pts)
    assert len(arcs) == 1
    assert len(arcs[0]) == 20
    assert arcs[0].first == (0.0, 0.0) and arcs[0].last == (19.0, 19.0)


def test_circle_splits_into_several_arcs(circle_image):
    _, img = circle_image
    arcs = link_edges(canny_map(img))
    assert len(arcs) >= 2
    assert len({a.sign for a in arcs}) == 2


def test_point_list_and_edge_map_agree_on_classes():
    pts = [EdgePoint(i, 0, 1.0) for i in range(5)] + [EdgePoint(i, 1, -1.0) for i in range(10, 15)]
    arcs = link_edges(pts)
    assert sorted(len(a) for a in arcs) == [5, 5]
    assert sorted(a.sign for a in arcs) == [-1, 1]


def test_zero_slope_points_are_not_linked():
    pts = [EdgePoint(i, 3, 0.0) for i in range(10)]
    assert link_edges(pts) == []


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_linking_is_a_partial_partition(seed):
    img = render(random_scene(seed))
    em = canny_map(img)
    arcs = link_edges(em)
    seen = set()
    for a in arcs:
        pts = set(zip(a.xs.tolist(), a.ys.tolist()))
        assert len(pts) == len(a)  # no repeats inside an arc
        assert not pts & seen  # arcs are disjoint
        seen |= pts
        assert len(a) >= 2
        assert is_chain(a)
        assert a.sign in (-1, 1)
        assert np.all(np.sign(a.tau) == a.sign)
        assert (a.xs[0], a.ys[0]) <= (a.xs[-1], a.ys[-1])
    assert seen <= set(zip(em.xs.tolist(), em.ys.tolist()))
    assert len(seen) / len(em) >= 0.85


def test_uids_follow_scan_order(single_ellipse):
    _, img = single_ellipse
    arcs = link_edges(canny_map(img))
    assert [a.uid for a in arcs] == list(range(len(arcs)))
    firsts = [min(zip(a.ys.tolist(), a.xs.tolist())) for a in arcs]
    assert firsts == sorted(firsts)


def test_linking_deterministic(single_ellipse):
    _, img = single_ellipse
    em = canny_map(img)
    a = link_edges(em)
    b = link_edges(em)
    assert [(x.xs.tolist(), x.ys.tolist()) for x in a] == [(x.xs.tolist(), x.ys.tolist()) for x in b]


# --- pruning -------------------------------------------------------------------


def _straight(n):
    return ArcSegment(np.arange(n), np.arange(n), -1)


def test_prune_short_boundary():
    arcs = [_straight(15), _straight(16)]
    kept = prune_short(arcs)
    assert [len(a) for a in kept] == [16]
    assert prune_short([]) == []


def test_straight_arc_removed():
    a = ArcSegment(np.arange(100), np.zeros(100, dtype=int), 1)
    assert straightness(a) == 0
    assert prune_lines([a]) == []


def test_quarter_circle_kept():
    e = EllipseParams(200, 200, 100, 100, 0)
    arc = arc_from(quarter(e, 0), -1)
    x1, y1 = arc.first
    xm, ym = arc.mid
    xt, yt = arc.last
    det = (xm - x1) * (yt - y1) - (xt - x1) * (ym - y1)
    assert straightness(arc) == pytest.approx(abs(det) / len(arc))
    # the chord triangle (100,0),(70.7,70.7),(0,100) has twice-area about 4142
    assert abs(det) == pytest.approx(2 * 0.5 * 100 * 100 * (math.sqrt(2) - 1), rel=0.05)
    assert straightness(arc) > 3
    assert prune_lines([arc]) == [arc]


def test_line_pruning_monotone(single_ellipse):
    img = render(random_scene(4))
    arcs = prune_short(link_edges(canny_map(img)))
    counts = [len(prune_lines(arcs, th)) for th in (0, 1, 2, 3, 4, 5)]
    assert counts == sorted(counts, reverse=True)
    assert counts[0] == len(arcs)


@given(st.lists(st.floats(0, 20), min_size=2, max_size=8))
def test_prune_lines_monotone_property(ths):
    rng = np.random.default_rng(len(ths))
    arcs = []
    for _ in range(20):
        n = int(rng.integers(5, 60))
        ys = np.cumsum(rng.integers(-1, 2, n))
        arcs.append(ArcSegment(np.arange(n), ys, 1))
    ths = sorted(ths)
    counts = [len(prune_lines(arcs, t)) for t in ths]
    assert counts == sorted(counts, reverse=True)


# --- quadrants ---------------------------------------------------------------------


@pytest.mark.parametrize("k, sign, expected", [
    (0, -1, Quadrant.I),    # top-right on screen
    (1, 1, Quadrant.II),    # top-left
    (2, -1, Quadrant.III),  # bottom-left
    (3, 1, Quadrant.IV),    # bottom-right
])
def test_circle_quadrants(k, sign, expected):
    e = EllipseParams(200, 200, 60, 60, 0)
    assert quadrant_of(arc_from(quarter(e, k), sign)) == expected


def test_above_below_oracle():
    # top-right quarter: area above the arc inside its box is r^2 (1 - pi/4)
    e = EllipseParams(200, 200, 60, 60, 0)
    arc = arc_from(quarter(e, 0), -1)
    above, below = above_below(arc)
    r = 60
    assert above == pytest.approx(r * r * (1 - math.pi / 4), rel=0.1)
    assert below == pytest.approx(r * r * math.pi / 4, rel=0.1)


def test_diagonal_is_discarded():
    a = ArcSegment(np.arange(30), np.arange(30), -1)
    assert quadrant_of(a) == Quadrant.UNASSIGNED
    assert assign_quadrants([a]) == []


def test_ellipse_gives_one_arc_per_set():
    e = EllipseParams(200, 150, 90, 50, 0)
    signs = (-1, 1, -1, 1)
    arcs = assign_quadrants([arc_from(quarter(e, k), s) for k, s in enumerate(signs)])
    sets = quadrant_sets(arcs)
    assert [len(sets[q]) for q in (Quadrant.I, Quadrant.II, Quadrant.III, Quadrant.IV)] == [1, 1, 1, 1]


def test_translated_arc_keeps_metadata():
    a = ArcSegment(np.arange(5), np.arange(5), -1, Quadrant.I, uid=3)
    b = a.translated(10, -2)
    assert b.first == (10.0, -2.0) and b.quadrant == Quadrant.I and b.uid == 3
