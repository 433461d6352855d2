"""Three-arc combination picking with coordinate and CNC constraints."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .arcs import ArcSegment, Quadrant
from .errors import DegenerateDecomposition, IdenticalLines, ParallelChords
from .geometry import MAX_REACH, _cnc, _cross

Q = Quadrant

TH_CNC = 0.2


class ComboKind(NamedTuple):
    """Quadrants of (middle arc, CNC-tested neighbour, third arc)."""

    middle: Quadrant
    pair: Quadrant
    third: Quadrant


# the four valid set patterns, middle set first
COMBO_KINDS = (
    ComboKind(Q.II, Q.I, Q.III),
    ComboKind(Q.III, Q.II, Q.IV),
    ComboKind(Q.IV, Q.III, Q.I),
    ComboKind(Q.I, Q.IV, Q.II),
)

_ADJACENT = {
    frozenset((Q.I, Q.II)), frozenset((Q.II, Q.III)),
    frozenset((Q.III, Q.IV)), frozenset((Q.IV, Q.I)),
}


def is_adjacent(q1, q2):
    return frozenset((q1, q2)) in _ADJACENT


@dataclass(frozen=True)
class SelectionConfig:
    th_cnc: float = TH_CNC

    def __post_init__(self):
        if not self.th_cnc >= 0:
            raise ValueError("th_cnc must be non-negative")


@dataclass(frozen=True, eq=False)
class ArcTriple:
    arc1: ArcSegment
    arc2: ArcSegment
    arc3: ArcSegment
    combo_kind: ComboKind
    dis_cnc: float = math.nan

    @property
    def arcs(self):
        return (self.arc1, self.arc2, self.arc3)

    @property
    def key(self):
        return frozenset(id(a) for a in self.arcs)

    @property
    def total_length(self):
        return len(self.arc1) + len(self.arc2) + len(self.arc3)


def coordinate_check(arc_a, arc_b, combo_kind, role="pair") -> bool:
    """Endpoint inequalities between the middle arc and a neighbour.

    ``role`` is ``"pair"`` for (arc1, arc2) and ``"third"`` for (arc1, arc3).
    Endpoints are in canonical order (smaller x first); y grows downward.
    """
    (a1x, a1y), (atx, aty) = arc_a.first, arc_a.last
    (b1x, b1y), (btx, bty) = arc_b.first, arc_b.last
    m = combo_kind.middle
    if role == "pair":
        if m == Q.II:
            return atx < b1x
        if m == Q.III:
            return a1y > b1y
        if m == Q.IV:
            return a1x > btx
        if m == Q.I:
            return aty < bty
    elif role == "third":
        if m == Q.II:
            return a1y < b1y
        if m == Q.III:
            return atx < b1x
        if m == Q.IV:
            return aty > bty
        if m == Q.I:
            return a1x > btx
    else:
        raise ValueError(f"unknown role {role!r}")
    raise ValueError(f"{combo_kind} is not a valid combination")


def _six_point_options(arc1, arc2):
    m1 = arc1.mid
    m2 = arc2.mid
    ends1 = (arc1.first, arc1.last)
    ends2 = (arc2.first, arc2.last)
    for x in range(2):
        for y in range(2):
            # Q1(1), Q1(2), Q2(1), Q2(2), Q3(1), Q3(2)
            yield (ends1[x], m1, ends1[1 - x], ends2[y], m2, ends2[1 - y])


def six_points(arc1, arc2):
    """Pick the endpoint roles whose chord triangle is the most compact.

    Returns the six points as homogeneous triples, or ``None`` when every
    assignment has a vertex at infinity.
    """
    best = None
    best_reach = math.inf
    for pts in _six_point_options(arc1, arc2):
        hp = [(p[0], p[1], 1.0) for p in pts]
        c1 = _cross(hp[0], hp[1])
        c2 = _cross(hp[2], hp[3])
        c3 = _cross(hp[4], hp[5])
        cx = sum(p[0] for p in pts) / 6.0
        cy = sum(p[1] for p in pts) / 6.0
        worst = 0.0
        for la, lb in ((c3, c1), (c1, c2), (c2, c3)):
            p = _cross(la, lb)
            if abs(p[2]) <= 1e-12 * (abs(p[0]) + abs(p[1])):
                worst = math.inf
                break
            d = math.hypot(p[0] / p[2] - cx, p[1] / p[2] - cy)
            worst = max(worst, d)
        if worst < best_reach:
            best_reach = worst
            best = hp
    return best


def arc_pair_cnc(arc1, arc2) -> float:
    """Dis_CNC = |CNC - 1| from the ends and middle point of two arcs.

    Raises :class:`ParallelChords` when no finite, compact chord triangle
    exists.
    """
    hp = six_points(arc1, arc2)
    if hp is None:
        raise ParallelChords("all chord assignments are parallel")
    xs = [p[0] for p in hp]
    ys = [p[1] for p in hp]
    reach = (
        0.5 * (max(xs) + min(xs)),
        0.5 * (max(ys) + min(ys)),
        MAX_REACH * math.hypot(max(xs) - min(xs), max(ys) - min(ys)),
    )
    return abs(_cnc(*hp, reach) - 1.0)


def dis_cnc_or_inf(arc1, arc2) -> float:
    try:
        return arc_pair_cnc(arc1, arc2)
    except (ParallelChords, IdenticalLines, DegenerateDecomposition):
        return math.inf


def pick_triples(sets, cfg: SelectionConfig | None = None) -> list[ArcTriple]:
    """Enumerate valid three-arc combinations.

    For each combination kind: every middle arc is paired with each arc of
    the first adjacent set that passes the coordinate check and whose
    Dis_CNC is within ``th_cnc``; each such pair is completed by every arc of
    the other adjacent set passing its coordinate check.  An infinite
    ``th_cnc`` skips the CNC test altogether.
    """
    cfg = cfg or SelectionConfig()
    use_cnc = math.isfinite(cfg.th_cnc)
    out = []
    seen = set()
    for kind in COMBO_KINDS:
        mids = sets.get(kind.middle, ())
        pairs = sets.get(kind.pair, ())
        thirds = sets.get(kind.third, ())
        if not mids or not pairs or not thirds:
            continue
        for a1 in mids:
            ok_thirds = [a3 for a3 in thirds if coordinate_check(a1, a3, kind, "third")]
            if not ok_thirds:
                continue
            for a2 in pairs:
                if not coordinate_check(a1, a2, kind, "pair"):
                    continue
                dis = math.nan
                if use_cnc:
                    dis = dis_cnc_or_inf(a1, a2)
                    if dis > cfg.th_cnc:
                        continue
                for a3 in ok_thirds:
                    key = (id(a1), id(a2), id(a3))
                    fkey = frozenset(key)
                    if fkey in seen:
                        continue
                    seen.add(fkey)
                    out.append(ArcTriple(a1, a2, a3, kind, dis))
    return out


def count_candidates(sets, cfg: SelectionConfig | None = None) -> int:
    return len(pick_triples(sets, cfg))
