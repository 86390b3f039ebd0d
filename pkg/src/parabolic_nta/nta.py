"""Finite-scale certification of the parabolic NTA conditions.

Three clauses are checked on a declared lattice of boundary anchors and
scales: interior corkscrews (forward and backward in time), exterior
corkscrews, and Harnack chains between interior points that are separated
enough in time.  Every "none" returned by a search is a statement about the
searched candidate lattice, whose spacing is recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .errors import PreconditionError, RejectedQueryError, WindowError
from .geometry import (DomainModel, ParaCylinder, ParaPoint, boundary_sample_array, para_dist,
                       signed_distance, signed_distance_array)

FORWARD, BACKWARD = "forward", "backward"
INTERIOR, EXTERIOR = "interior", "exterior"
CLAUSE_INTERIOR, CLAUSE_EXTERIOR, CLAUSE_HARNACK = "1", "2", "3"


def minimal_gamma(lam):
    return math.sqrt(2 * lam) + 1


@dataclass(frozen=True)
class NtaParams:
    lam: float = 2.0
    gamma: float | None = None
    c_gamma: float = 10.0

    def __post_init__(self):
        if not self.lam >= 2:
            raise PreconditionError(f"lambda must be >= 2, got {self.lam}")
        if self.gamma is None:
            object.__setattr__(self, "gamma", minimal_gamma(self.lam))
        if self.gamma < minimal_gamma(self.lam) - 1e-12:
            raise PreconditionError(
                f"gamma must be >= sqrt(2 lambda) + 1 = {minimal_gamma(self.lam):.6g}")
        if not self.c_gamma >= 1:
            raise PreconditionError("c_gamma must be >= 1")


@dataclass(frozen=True)
class CorkscrewWitness:
    anchor: ParaPoint
    scale: float
    direction: str
    side: str
    point: ParaPoint
    distance: float
    lam: float

    def check(self, dom: DomainModel) -> bool:
        """Re-validate the defining inequalities from scratch."""
        r, lam = self.scale, self.lam
        if not ParaCylinder(self.anchor, r).contains(self.point):
            return False
        dt = self.point.t - self.anchor.t
        if self.direction == BACKWARD:
            dt = -dt
        tol = 4e-16 * max(1.0, abs(self.anchor.t), abs(self.point.t))  # rounding of anchor.t + dt
        if not (r * r / lam - tol <= dt <= r * r + tol):
            return False
        sd = signed_distance(dom, self.point)
        return sd >= r / lam if self.side == INTERIOR else sd <= -r / lam


def _check_anchor(dom, anchor, r):
    box = ParaCylinder(anchor, 2 * r).box()
    if not dom.window.covers(box):
        raise WindowError(f"window does not cover C_2r around ({anchor.x:g}, {anchor.t:g}) "
                          f"at r={r:g}")
    tol = max(dom.resolution, 1e-9 * r)
    if abs(signed_distance(dom, anchor)) > tol:
        raise PreconditionError(f"anchor ({anchor.x:g}, {anchor.t:g}) is not on the boundary")


def _corkscrew_lattice(r, lam, refine):
    # spacing 1/(8 lam) in the normalised coordinates (x / r, t / r**2)
    step = 1.0 / (8 * lam) / (2 if refine else 1)
    kx = int(math.ceil(1.0 / step)) - 1
    dx = np.arange(-kx, kx + 1) * step
    dx = dx[np.abs(dx) < 1.0]
    dts = 1.0 / lam + np.arange(0, int(math.ceil((1 - 1 / lam) / step)) + 1) * step
    dts = dts[dts < 1.0]
    return dx * r, dts * r * r, step * r


def _search(dom, anchor, r, direction, side, lam, refine):
    dxs, dts, spacing = _corkscrew_lattice(r, lam, refine)
    sign = 1.0 if direction == FORWARD else -1.0
    thresh = r / lam
    batch = max(1, 4096 // dxs.size)
    for b0 in range(0, dts.size, batch):
        rows = dts[b0:b0 + batch]
        X = (anchor.x + dxs[None, :] + 0 * rows[:, None]).ravel()
        T = (anchor.t + sign * rows[:, None] + 0 * dxs[None, :]).ravel()
        sd = signed_distance_array(dom, X, T, cap=thresh)
        ok = sd >= thresh if side == INTERIOR else sd <= -thresh
        if not ok.any():
            continue
        # first time row with a qualifying candidate; deepest, then closest in x
        first = int(np.flatnonzero(ok)[0]) // dxs.size
        sel = np.flatnonzero(ok.reshape(rows.size, dxs.size)[first]) + first * dxs.size
        depth = np.abs(signed_distance_array(dom, X[sel], T[sel]))
        key = np.lexsort((X[sel] - anchor.x, np.abs(X[sel] - anchor.x), -depth))
        k = sel[key[0]]
        point = ParaPoint(X[k], T[k])
        sd_true = float(depth[key[0]]) * (1 if side == INTERIOR else -1)
        return CorkscrewWitness(anchor, r, direction, side, point, sd_true, lam), spacing
    return None, spacing


def find_corkscrew(dom: DomainModel, anchor: ParaPoint, r: float, direction=FORWARD,
                   side=INTERIOR, lam=2.0):
    """Search the candidate lattice in ``C_r(anchor)`` for a corkscrew point.

    The lattice has spacing ``r / (8 lam)`` in space and ``r**2 / (8 lam)`` in
    time (spacing ``1/(8 lam)`` in coordinates normalised by the scale) and is
    refined once before giving up.  Returns a :class:`CorkscrewWitness` or None.
    """
    return _find_corkscrew(dom, anchor, r, direction, side, lam)[0]


def _find_corkscrew(dom, anchor, r, direction, side, lam):
    if direction not in (FORWARD, BACKWARD) or side not in (INTERIOR, EXTERIOR):
        raise PreconditionError("direction must be forward/backward, side interior/exterior")
    if not r > 0:
        raise PreconditionError("scale must be positive")
    _check_anchor(dom, anchor, r)
    w, spacing = _search(dom, anchor, r, direction, side, lam, refine=False)
    if w is None:
        w, spacing = _search(dom, anchor, r, direction, side, lam, refine=True)
    return w, spacing


# --------------------------------------------------------------------------
# Harnack chains


@dataclass(frozen=True, eq=False)
class HarnackChain:
    centers: np.ndarray  # (l, 2) rows (Y_j, s_j)
    radii: np.ndarray
    start: ParaPoint
    end: ParaPoint
    eps: float
    c_gamma: float

    def __len__(self):
        return len(self.radii)

    def without(self, j):
        keep = np.arange(len(self)) != j
        return HarnackChain(self.centers[keep], self.radii[keep], self.start, self.end,
                            self.eps, self.c_gamma)

    def with_radii(self, radii):
        return HarnackChain(self.centers, np.asarray(radii, dtype=float), self.start, self.end,
                            self.eps, self.c_gamma)


@dataclass(frozen=True)
class HarnackReport:
    start_stop: bool
    overlap: bool
    comparable: bool
    spread: bool
    short: bool
    c_used: float
    c_needed: float

    @property
    def valid(self):
        return self.start_stop and self.overlap and self.comparable and self.spread and self.short

    def as_dict(self):
        return {"3a": self.start_stop, "3b": self.overlap, "3c": self.comparable,
                "3d": self.spread, "3e": self.short}


def _chain_constants(centers, radii, dists, p1, p2, eps):
    """Smallest c making (comparability, time spread, length) hold."""
    with np.errstate(divide="ignore", invalid="ignore"):
        comp = np.max(np.maximum(dists / radii, radii / dists))
    if np.any(dists <= 0):
        comp = np.inf
    ds = np.diff(centers[:, 1])
    spread = 1.0
    if ds.size:
        spread = np.inf if np.any(ds <= 0) else float(np.max(radii[:-1] ** 2 / ds))
    length = len(radii) / math.log(2 + para_dist(p1, p2) / eps)
    return float(comp), float(spread), float(length)


def verify_harnack_chain(chain: HarnackChain, dom: DomainModel, params: NtaParams | None = None,
                         c_gamma: float | None = None) -> HarnackReport:
    """Evaluate the five chain conditions independently."""
    c = c_gamma if c_gamma is not None else (params.c_gamma if params else chain.c_gamma)
    Y, s = chain.centers[:, 0], chain.centers[:, 1]
    r = chain.radii
    p1, p2 = chain.start, chain.end
    a = (abs(p1.x - Y[0]) < r[0] and abs(p1.t - s[0]) < r[0] ** 2
         and abs(p2.x - Y[-1]) < r[-1] and abs(p2.t - s[-1]) < r[-1] ** 2)
    b = bool(np.all((np.abs(np.diff(Y)) < r[1:] + r[:-1])
                    & (np.abs(np.diff(s)) < r[1:] ** 2 + r[:-1] ** 2)))
    d = signed_distance_array(dom, Y, s)
    comp, spread, length = _chain_constants(chain.centers, r, d, p1, p2, chain.eps)
    cc = bool(np.all(d > 0) and np.all(d / c <= r) and np.all(r <= c * d))
    ds = np.diff(s)
    sp = bool(np.all(ds >= r[:-1] ** 2 / c))
    sh = len(r) <= c * math.log(2 + para_dist(p1, p2) / chain.eps)
    return HarnackReport(bool(a), b, cc, sp, bool(sh), c, max(1.0, comp, spread, length))


def _lattice_range(box, p1, h):
    x_lo, x_hi, t_lo, t_hi = box
    kx = (math.ceil((x_lo - p1.x) / h), math.floor((x_hi - p1.x) / h))
    kt = (max(1, math.ceil((t_lo - p1.t) / (h * h))), math.floor((t_hi - p1.t) / (h * h)))
    return kx, kt


def _lattice_size(box, p1, h):
    (a, b), (c, d) = _lattice_range(box, p1, h)
    return max(0, b - a + 1) * max(0, d - c + 1)


def _lattice(box, p1, h):
    """Points of the lattice anchored at ``p1`` with steps ``(h, h**2)`` inside ``box``."""
    (a, b), (c, d) = _lattice_range(box, p1, h)
    X = p1.x + h * np.arange(a, b + 1)
    T = p1.t + h * h * np.arange(c, d + 1)
    XX, TT = np.meshgrid(X, T)
    return XX.ravel(), TT.ravel()


def _whitney_nodes(dom, p1, p2, d1, d2, budget=20000):
    """Lattice points between the endpoints, one dyadic band of boundary distance per level."""
    L = para_dist(p1, p2)
    w = dom.window
    x_lo = max(w.x_min, min(p1.x, p2.x) - L)
    x_hi = min(w.x_max, max(p1.x, p2.x) + L)
    h = min(d1, d2) / 4
    h_top = (L + max(d1, d2)) / 2
    xs_all, ts_all, ds_all = [], [], []
    while h <= h_top:
        boxes = [(x_lo, x_hi, p1.t, p2.t)]
        if _lattice_size(boxes[0], p1, h) > budget:
            # too fine for the whole region: keep neighbourhoods of the endpoints
            reach = 16 * h
            boxes = [(max(x_lo, p.x - reach), min(x_hi, p.x + reach),
                      max(p1.t, p.t - reach * reach), min(p2.t, p.t + reach * reach))
                     for p in (p1, p2)]
        for box in boxes:
            if _lattice_size(box, p1, h) > budget:
                continue
            XX, TT = _lattice(box, p1, h)
            if XX.size == 0:
                continue
            inside = (TT > p1.t) & (TT < p2.t) & w.contains(XX, TT)
            XX, TT = XX[inside], TT[inside]
            d = signed_distance_array(dom, XX, TT, cap=8 * h)
            keep = (d >= 2 * h) & (d < 8 * h)
            xs_all.append(XX[keep])
            ts_all.append(TT[keep])
            ds_all.append(d[keep])
        h *= 2
    if not xs_all:
        return np.empty(0), np.empty(0), np.empty(0)
    return np.concatenate(xs_all), np.concatenate(ts_all), np.concatenate(ds_all)


def _single(p, d, eps):
    centers = np.array([[p.x, p.t]])
    radii = np.array([d / 2])
    comp, spread, length = _chain_constants(centers, radii, np.array([d]), p, p, eps)
    return HarnackChain(centers, radii, p, p, eps, max(1.0, comp, spread, length))


def build_harnack_chain(dom: DomainModel, p1: ParaPoint, p2: ParaPoint, params: NtaParams,
                        eps: float | None = None, c_build: float = 4.0):
    """Hop-count-shortest chain of overlapping cylinders from ``p1`` to ``p2``.

    Nodes are the endpoints plus dyadic lattice points whose boundary distance
    ``d`` falls in the band of their level; each node carries the cylinder of
    radius ``d / 2``.  Edges join overlapping cylinders whose centres advance
    in time by at least ``r_j**2 / c_build``.  Returns None when the endpoints
    are not connected in this graph.
    """
    d1 = signed_distance(dom, p1)
    d2 = signed_distance(dom, p2)
    if d1 <= 0 or d2 <= 0:
        raise PreconditionError("Harnack chain endpoints must lie inside the domain")
    if eps is None:
        eps = min(d1, d2)
    if d1 < eps or d2 < eps:
        raise PreconditionError("endpoint closer to the boundary than eps")
    if p1 == p2:
        return _single(p1, d1, eps)
    dt = p2.t - p1.t
    if not (dt > 0 and math.sqrt(dt) > para_dist(p1, p2) / params.gamma):
        raise RejectedQueryError("endpoints are not separated enough in time for a Harnack chain")

    xs, ts, ds = _whitney_nodes(dom, p1, p2, d1, d2)
    xs = np.concatenate([[p1.x], xs, [p2.x]])
    ts = np.concatenate([[p1.t], ts, [p2.t]])
    ds = np.concatenate([[d1], ds, [d2]])
    rad = ds / 2
    n = xs.size
    order = np.argsort(ts, kind="stable")
    xs, ts, ds, rad = xs[order], ts[order], ds[order], rad[order]
    src = int(np.flatnonzero(order == 0)[0])
    dst = int(np.flatnonzero(order == n - 1)[0])

    rmax = rad.max()
    rows, cols = [], []
    for i in range(n):
        lo = np.searchsorted(ts, ts[i] + rad[i] ** 2 / c_build, "left")
        hi = np.searchsorted(ts, ts[i] + rad[i] ** 2 + rmax ** 2, "right")
        if lo >= hi:
            continue
        j = np.arange(lo, hi)
        ok = ((np.abs(xs[j] - xs[i]) < rad[i] + rad[j])
              & (ts[j] - ts[i] < rad[i] ** 2 + rad[j] ** 2))
        j = j[ok]
        rows.append(np.full(j.size, i))
        cols.append(j)
    if not rows:
        return None
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    adj = csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    _, pred = breadth_first_order(adj, src, directed=True, return_predecessors=True)
    if dst != src and pred[dst] < 0:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(int(pred[path[-1]]))
    path = path[::-1]
    centers = np.column_stack([xs[path], ts[path]])
    radii = rad[path]
    comp, spread, length = _chain_constants(centers, radii, ds[path], p1, p2, eps)
    return HarnackChain(centers, radii, p1, p2, eps, max(1.0, comp, spread, length))


def monotone_path_from_chain(chain: HarnackChain, dom: DomainModel | None = None):
    """Polyline from start to end with strictly increasing time.

    Vertices are the start, each cylinder centre and the centre of each
    consecutive overlap box (restricted to times between the two centres),
    then the end.  With ``dom`` given, the polyline is checked to stay inside
    the domain by membership sampling at a quarter of the smallest radius.
    """
    c, r = chain.centers, chain.radii
    if np.any(np.diff(c[:, 1]) <= 0):
        raise PreconditionError("chain centres do not advance in time")
    p1, p2 = chain.start, chain.end
    verts = [(p1.x, p1.t)]
    if len(chain) == 1 and p1 != p2 and p2.t <= p1.t:
        raise PreconditionError("endpoints are not ordered in time")
    for j in range(len(chain)):
        verts.append((c[j, 0], c[j, 1]))
        if j + 1 < len(chain):
            ya, sa, ra = c[j, 0], c[j, 1], r[j]
            yb, sb, rb = c[j + 1, 0], c[j + 1, 1], r[j + 1]
            x_lo, x_hi = max(ya - ra, yb - rb), min(ya + ra, yb + rb)
            t_lo, t_hi = max(sa, sb - rb * rb), min(sb, sa + ra * ra)
            if not (x_lo < x_hi and t_lo < t_hi):
                raise PreconditionError(f"cylinders {j} and {j + 1} do not overlap")
            verts.append(((x_lo + x_hi) / 2, (t_lo + t_hi) / 2))
    verts.append((p2.x, p2.t))
    out = [verts[0]]
    for v in verts[1:]:
        if v[1] > out[-1][1]:
            out.append(v)
        elif v == out[-1]:
            continue
    path = np.array(out)
    if dom is not None and len(path) > 1:
        step = r.min() / 4
        for (xa, ta), (xb, tb) in zip(path[:-1], path[1:]):
            n = max(2, int(math.ceil((abs(xb - xa) + math.sqrt(tb - ta)) / step)) + 1)
            u = np.linspace(0, 1, n)
            if not np.all(dom.contains(xa + u * (xb - xa), ta + u * (tb - ta))):
                raise PreconditionError("monotone path leaves the domain")
    return path


# --------------------------------------------------------------------------
# certification


@dataclass
class Failure:
    clause: str
    anchor: ParaPoint
    scale: float
    direction: str
    side: str
    spacing: float
    detail: str = ""
    critical: bool = False


@dataclass
class NtaCertificate:
    params: NtaParams
    anchors: list
    scales: list
    witnesses: list
    chains: list
    c_gamma_found: float
    ok: bool = True

    def revalidate(self, dom):
        return (all(w.check(dom) for w in self.witnesses)
                and all(verify_harnack_chain(ch, dom, self.params).valid for ch in self.chains))


@dataclass
class NtaRefutation:
    params: NtaParams
    clause: str
    anchor: ParaPoint
    scale: float
    direction: str
    side: str
    spacing: float
    detail: str
    failures: list = field(default_factory=list)
    anchors: list = field(default_factory=list)
    scales: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    chains: list = field(default_factory=list)
    ok: bool = False

    @property
    def exhaustiveness(self):
        return (f"candidate lattice spacing {self.spacing:.6g} (space) within C_r, "
                f"refined once; none qualified")


def time_extremal_points(dom: DomainModel, window: ParaCylinder | None = None):
    """Time-maximal and time-minimal cell-boundary midpoints of each boundary component.

    Components are 8-connected sets of cells adjacent to a cell of the other
    occupancy.  Components touching the first or last row of the grid are
    cut by the window in time and contribute no extremum on that side.
    """
    if not dom.is_grid:
        return []
    occ = dom.occupancy
    nt, nx = occ.shape
    bcell = np.zeros_like(occ)
    dv = occ[:, 1:] != occ[:, :-1]
    dh = occ[1:, :] != occ[:-1, :]
    bcell[:, 1:] |= dv
    bcell[:, :-1] |= dv
    bcell[1:, :] |= dh
    bcell[:-1, :] |= dh
    labels, count = ndimage.label(bcell, structure=np.ones((3, 3)))
    jh, ih = np.nonzero(dh)  # edge between rows j and j+1 at column i
    lab = labels[jh, ih]
    out = []
    for k in range(1, count + 1):
        sel = lab == k
        if not sel.any():
            continue
        rows = labels == k
        touched = np.flatnonzero(rows.any(axis=1))
        for extreme, edge in ((jh[sel].max(), touched[-1] < nt - 1),
                              (jh[sel].min(), touched[0] > 0)):
            if not edge:
                continue
            cols = np.sort(ih[sel][jh[sel] == extreme])
            i = cols[len(cols) // 2]
            p = ParaPoint(dom.x0 + i * dom.hx, dom.t0 + (extreme + 0.5) * dom.ht)
            if window is None or window.contains(p):
                out.append(p)
    return out


def _interior_pairs(wit_by_key, params, rng, n_pairs):
    interior = [w for w in wit_by_key.values() if w.side == INTERIOR]
    pairs = []
    # one deterministic backward/forward pair per scale
    seen = set()
    for w in interior:
        if w.direction != BACKWARD or w.scale in seen:
            continue
        fwd = wit_by_key.get((w.anchor, w.scale, FORWARD, INTERIOR))
        if fwd is not None:
            pairs.append((w.point, fwd.point))
            seen.add(w.scale)
    pts = sorted({w.point for w in interior}, key=lambda p: (p.t, p.x))
    tries = 0
    extra = []
    while len(extra) < n_pairs and len(pts) >= 2 and tries < 50 * n_pairs:
        tries += 1
        i, j = rng.choice(len(pts), size=2, replace=False)
        a, b = sorted((pts[i], pts[j]), key=lambda p: p.t)
        dt = b.t - a.t
        if dt > 0 and math.sqrt(dt) > para_dist(a, b) / params.gamma:
            extra.append((a, b))
    return pairs + extra


def fit_window(dom: DomainModel, scales, center: ParaPoint | None = None) -> ParaCylinder:
    """Largest cylinder at ``center`` whose anchors keep ``C_2r`` inside the model window."""
    w = dom.window
    if center is None:
        center = ParaPoint((w.x_min + w.x_max) / 2, (w.t_min + w.t_max) / 2)
    r2 = 2 * max(scales)
    half_x = min(center.x - w.x_min, w.x_max - center.x) - r2
    half_t = min(center.t - w.t_min, w.t_max - center.t) - r2 * r2
    if half_x <= 0 or half_t <= 0:
        raise WindowError("model window too small for the requested scales")
    return ParaCylinder(center, (1 - 1e-9) * min(half_x, math.sqrt(half_t)))


def certify_nta(dom: DomainModel, window: ParaCylinder, scales, params: NtaParams | None = None,
                n_anchors: int = 33, n_pairs: int = 8, seed: int = 0):
    """Check the three NTA clauses on a finite lattice of anchors and scales.

    Anchors are ``n_anchors`` evenly spread boundary points in ``window``;
    for grid models the time-extremal points of each boundary component are
    added ("critical" anchors).  Harnack chains are built between the interior
    backward/forward corkscrew points of one anchor per scale and between
    ``n_pairs`` random admissible pairs of interior corkscrew points.

    Returns an :class:`NtaCertificate` if every check passes, otherwise an
    :class:`NtaRefutation`.  The reported failure is the first failing clause;
    within it a critical anchor is preferred, then the first in
    (anchor time, anchor x, scale) order.  All failures are listed.
    """
    params = params or NtaParams()
    scales = sorted(float(s) for s in scales)
    xs, ts = boundary_sample_array(dom, window, n_anchors)
    critical = set(time_extremal_points(dom, window))
    anchors = {ParaPoint(x, t) for x, t in zip(xs, ts)} | critical
    anchors = sorted(anchors, key=lambda p: (p.t, p.x))
    failures, witnesses = [], {}
    for a in anchors:
        for r in scales:
            for side, clause in ((INTERIOR, CLAUSE_INTERIOR), (EXTERIOR, CLAUSE_EXTERIOR)):
                for direction in (FORWARD, BACKWARD):
                    w, spacing = _find_corkscrew(dom, a, r, direction, side, params.lam)
                    if w is None:
                        failures.append(Failure(clause, a, r, direction, side, spacing,
                                                "no corkscrew candidate qualifies",
                                                a in critical))
                    else:
                        witnesses[(a, r, direction, side)] = w

    rng = np.random.default_rng(seed)
    chains, c_found = [], 1.0
    for p, q in _interior_pairs(witnesses, params, rng, n_pairs):
        chain = build_harnack_chain(dom, p, q, params)
        if chain is None or chain.c_gamma > params.c_gamma:
            detail = ("no chain in the node graph" if chain is None
                      else f"chain needs c_gamma={chain.c_gamma:.4g} > {params.c_gamma:g}")
            failures.append(Failure(CLAUSE_HARNACK, p, para_dist(p, q), FORWARD, INTERIOR,
                                    0.0, detail))
            continue
        chains.append(chain)
        c_found = max(c_found, chain.c_gamma)

    wits = [witnesses[k] for k in sorted(witnesses, key=lambda k: (k[0].t, k[0].x, k[1],
                                                                     k[2], k[3]))]
    if not failures:
        return NtaCertificate(params, anchors, scales, wits, chains, c_found)
    first_clause = min(f.clause for f in failures)
    in_clause = [f for f in failures if f.clause == first_clause]
    crit = [f for f in in_clause if f.critical]
    f = (crit or in_clause)[0]
    return NtaRefutation(params, f.clause, f.anchor, f.scale, f.direction, f.side, f.spacing,
                         f.detail, failures, anchors, scales, wits, chains)
