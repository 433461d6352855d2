"""Edge linking, short/straight segment pruning and quadrant labelling."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .edges import EdgeMap, EdgePoint

TH_LENGTH = 16
TH_CNL = 3.0
# gradients this small carry no usable sign
GRAD_EPS = 1e-12


class Quadrant(enum.IntEnum):
    UNASSIGNED = 0
    I = 1
    II = 2
    III = 3
    IV = 4


@dataclass(eq=False)
class ArcSegment:
    """Ordered chain of edge pixels.

    ``xs``/``ys`` run from the endpoint with the smaller (x, y) to the other
    one.  ``sign`` is the sign of the gradient slope shared by every point
    (+1 for the II/IV group, -1 for I/III).
    """

    xs: np.ndarray
    ys: np.ndarray
    sign: int
    quadrant: Quadrant = Quadrant.UNASSIGNED
    uid: int = -1
    tau: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.xs)

    @property
    def length(self):
        return len(self.xs)

    @property
    def bbox(self):
        return int(self.xs.min()), int(self.ys.min()), int(self.xs.max()), int(self.ys.max())

    @property
    def first(self):
        return float(self.xs[0]), float(self.ys[0])

    @property
    def last(self):
        return float(self.xs[-1]), float(self.ys[-1])

    @property
    def mid(self):
        k = len(self.xs) // 2
        return float(self.xs[k]), float(self.ys[k])

    @property
    def points(self):
        tau = self.tau if self.tau is not None else np.full(len(self.xs), float(self.sign))
        return [EdgePoint(int(x), int(y), float(t)) for x, y, t in zip(self.xs, self.ys, tau)]

    def xy(self):
        """(t, 2) float coordinates; computed once and shared, so do not modify."""
        cached = self.__dict__.get("_xy")
        if cached is None:
            cached = np.column_stack((self.xs, self.ys)).astype(float)
            cached.flags.writeable = False
            self.__dict__["_xy"] = cached
        return cached

    def translated(self, dx, dy):
        return ArcSegment(self.xs + dx, self.ys + dy, self.sign, self.quadrant, self.uid, self.tau)


def _edge_arrays(edges):
    if isinstance(edges, EdgeMap):
        return edges.xs.astype(np.int64), edges.ys.astype(np.int64), edges.gx, edges.gy, None
    pts = list(edges)
    if not pts:
        z = np.zeros(0, dtype=np.int64)
        return z, z, None, None, np.zeros(0)
    xs = np.array([p.x for p in pts], dtype=np.int64)
    ys = np.array([p.y for p in pts], dtype=np.int64)
    tau = np.array([p.tau for p in pts], dtype=float)
    return xs, ys, None, None, tau


def _classes(gx, gy, tau, split_direction):
    """Linking class per point, -1 where the gradient slope has no sign."""
    if gx is not None:
        gx = np.asarray(gx, dtype=float)
        gy = np.asarray(gy, dtype=float)
        signed = (np.abs(gx) > GRAD_EPS) & (np.abs(gy) > GRAD_EPS)
        sign = np.sign(gx * gy).astype(np.int64)
        if split_direction:
            cls = (gx > 0).astype(np.int64) * 2 + (gy > 0).astype(np.int64)
        else:
            cls = (sign > 0).astype(np.int64)
        return np.where(signed, cls, -1), np.where(signed, sign, 0), slope_tau(gx, gy)
    sign = np.where(np.isnan(tau) | (tau == 0), 0, np.sign(tau)).astype(np.int64)
    return np.where(sign != 0, (sign > 0).astype(np.int64), -1), sign, tau


def slope_tau(gx, gy):
    from .edges import slope

    return slope(gx, gy)


def _far_points(graph, sources, labels, n_comp, tiebreak):
    dist = dijkstra(graph, directed=False, indices=sources, unweighted=True, min_only=True)
    order = np.lexsort((tiebreak, dist, labels))
    last = np.r_[np.nonzero(np.diff(labels[order]))[0], len(order) - 1]
    far = np.empty(n_comp, dtype=np.int64)
    far[labels[order[last]]] = order[last]
    return far


def _neighbour_graph(xs, ys, cls, active):
    """Undirected 8-neighbour graph between active points of equal class."""
    n = len(xs)
    idx = np.nonzero(active)[0]
    grid = np.full((int(ys.max()) + 3, int(xs.max()) + 3), -1, dtype=np.int64)
    grid[ys[idx] + 1, xs[idx] + 1] = idx
    rows, cols = [], []
    for dy, dx in ((0, 1), (1, -1), (1, 0), (1, 1)):
        nb = grid[ys[idx] + 1 + dy, xs[idx] + 1 + dx]
        ok = nb >= 0
        ok[ok] &= cls[nb[ok]] == cls[idx[ok]]
        rows.append(idx[ok])
        cols.append(nb[ok])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    return coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()


def _peel_chains(xs, ys, graph, active):
    """One round: the longest geodesic of every component, as ordered index arrays.

    Returns the chains and a mask of the points they use.
    """
    n = len(xs)
    idx = np.arange(n)
    n_comp, labels = connected_components(graph, directed=False)
    sizes = np.bincount(labels, minlength=n_comp)
    # seed of each component = its first point in row-major order
    seeds = np.full(n_comp, n, dtype=np.int64)
    np.minimum.at(seeds, labels, idx)
    keep = (sizes >= 2) & active[seeds]
    used = np.zeros(n, dtype=bool)
    if not keep.any():
        return [], used
    # double sweep for a (near-)diameter pair, then orient by smaller (x, y)
    u = _far_points(graph, seeds[keep], labels, n_comp, -idx)
    v = _far_points(graph, u[keep], labels, n_comp, -idx)
    w = int(ys.max()) + 1
    swap = xs[u] * w + ys[u] > xs[v] * w + ys[v]
    start = np.where(swap, v, u)[keep]
    end = np.where(swap, u, v)[keep]
    dist, pred, _ = dijkstra(
        graph, directed=False, indices=start, unweighted=True, min_only=True, return_predecessors=True
    )
    cur = end
    while cur.size:
        used[cur] = True
        cur = pred[cur]
        cur = cur[cur >= 0]
    on = np.nonzero(used)[0]
    order = on[np.lexsort((dist[on], labels[on]))]
    cuts = np.nonzero(np.diff(labels[order]))[0] + 1
    return np.split(order, cuts), used


def link_edges(edges, split_direction: bool = True, max_rounds: int = 64) -> list[ArcSegment]:
    """Group edge pixels into chains of 8-connected, same-class points.

    Classes follow the sign of the gradient slope; with ``split_direction``
    each class is further split by gradient direction so that the two
    opposite-facing contours of a thin stroke never merge.  Every connected
    component yields its longest shortest path as an arc; the points left
    over are linked again, round after round, so side branches become arcs
    of their own.  Points whose slope has no sign, and points left without
    a neighbour, belong to no arc.
    """
    xs, ys, gx, gy, tau = _edge_arrays(edges)
    n = len(xs)
    if n == 0:
        return []
    cls, sign, tau = _classes(gx, gy, tau, split_direction)
    active = cls >= 0
    chains = []
    for _ in range(max_rounds):
        if np.count_nonzero(active) < 2:
            break
        graph = _neighbour_graph(xs, ys, cls, active)
        found, used = _peel_chains(xs, ys, graph, active)
        if not found:
            break
        chains.extend(found)
        active &= ~used
    # arcs in order of their first point in row-major scan
    chains.sort(key=lambda c: int(c.min()))
    arcs = [ArcSegment(xs[c], ys[c], int(sign[c[0]]), uid=i, tau=tau[c]) for i, c in enumerate(chains)]
    return arcs


def prune_short(arcs, th_length: int = TH_LENGTH) -> list[ArcSegment]:
    return [a for a in arcs if len(a) >= th_length]


def straightness(arc) -> float:
    """|det(e_1, e_mid, e_t)| / t: twice the chord-triangle area per point."""
    x1, y1 = arc.first
    xm, ym = arc.mid
    xt, yt = arc.last
    det = (xm - x1) * (yt - y1) - (xt - x1) * (ym - y1)
    return abs(det) / len(arc)


def prune_lines(arcs, th_cnl: float = TH_CNL) -> list[ArcSegment]:
    return [a for a in arcs if straightness(a) >= th_cnl]


def above_below(arc) -> tuple[int, int]:
    """Pixel counts of the bounding box strictly above / below the arc."""
    x0, y0, x1, y1 = arc.bbox
    ncol = x1 - x0 + 1
    top = np.full(ncol, y1 + 1, dtype=np.int64)
    bot = np.full(ncol, y0 - 1, dtype=np.int64)
    col = arc.xs - x0
    np.minimum.at(top, col, arc.ys)
    np.maximum.at(bot, col, arc.ys)
    present = bot >= top
    above = int((top[present] - y0).sum())
    below = int((y1 - bot[present]).sum())
    return above, below


def quadrant_of(arc) -> Quadrant:
    above, below = above_below(arc)
    delta = above - below
    if delta == 0 or arc.sign == 0:
        return Quadrant.UNASSIGNED
    if arc.sign < 0:
        return Quadrant.III if delta > 0 else Quadrant.I
    return Quadrant.IV if delta > 0 else Quadrant.II


def assign_quadrants(arcs) -> list[ArcSegment]:
    """Label each arc I..IV; arcs with a zero above/below balance are dropped."""
    out = []
    for arc in arcs:
        q = quadrant_of(arc)
        if q != Quadrant.UNASSIGNED:
            arc.quadrant = q
            out.append(arc)
    return out


def quadrant_sets(arcs) -> dict:
    sets = {q: [] for q in (Quadrant.I, Quadrant.II, Quadrant.III, Quadrant.IV)}
    for arc in arcs:
        if arc.quadrant in sets:
            sets[arc.quadrant].append(arc)
    return sets
