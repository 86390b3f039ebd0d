"""Boundary decomposition into graphs of time and monotone accessibility on grids.

Boundary cells are occupied cells with an unoccupied 4-neighbour; connected
components of the boundary use 8-adjacency of these cells.  The edge of the
model window is not part of the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import AmbiguityError, DegenerateInputError, PreconditionError
from .geometry import Box, DomainModel, ParaCylinder, ParaPoint, SampledFunction, rasterize
from .nta import NtaCertificate, NtaParams, certify_nta

FORWARD, BACKWARD, BOTH = "forward", "backward", "both"
EIGHT = np.ones((3, 3), dtype=bool)


def _as_grid(dom, box=None, hx=None):
    if dom.is_grid:
        return dom
    box = box or dom.window
    hx = hx or box.x_width / 256
    return rasterize(dom, box, hx)


# --------------------------------------------------------------------------
# accessibility


@dataclass(frozen=True, eq=False)
class AccessibleSet:
    seed: ParaPoint
    direction: str
    mask: np.ndarray = field(repr=False)
    grid: DomainModel = field(repr=False)
    t_sup: float
    t_inf: float
    sup_infinite: bool
    inf_infinite: bool

    @property
    def cells(self):
        """``(j, i)`` indices (row = time) of the reached cells."""
        return np.argwhere(self.mask)

    def __len__(self):
        return int(self.mask.sum())

    def contains(self, p: ParaPoint) -> bool:
        j, i = self.grid.cell_index(p.x, p.t)
        nt, nx = self.mask.shape
        return bool(0 <= j < nt and 0 <= i < nx and self.mask[j, i])


def _runs_touching(row_occ, hit):
    """Occupied runs of ``row_occ`` that contain at least one ``hit`` cell."""
    labels, _ = ndimage.label(row_occ)
    ids = np.unique(labels[hit & row_occ])
    ids = ids[ids > 0]
    return np.isin(labels, ids)


def _sweep(occ, j0, i0, step):
    nt, nx = occ.shape
    mask = np.zeros_like(occ)
    seed = np.zeros(nx, dtype=bool)
    seed[i0] = True
    cur = _runs_touching(occ[j0], seed)
    mask[j0] = cur
    j = j0
    while cur.any():
        j += step
        if not 0 <= j < nt:
            break
        grown = cur.copy()
        grown[1:] |= cur[:-1]
        grown[:-1] |= cur[1:]
        cur = _runs_touching(occ[j], grown)
        mask[j] = cur
    return mask


def accessible_set(dom: DomainModel, seed: ParaPoint, direction: str = FORWARD,
                   box: Box | None = None, hx: float | None = None) -> AccessibleSet:
    """Cells reachable from ``seed`` by cell paths whose time never decreases (forward).

    Within a time row the path moves freely through occupied cells; between
    rows it may step to the cell directly above/below or diagonally.
    Graph and slab models are rasterized on ``box`` at spacing ``hx`` first.
    """
    if direction not in (FORWARD, BACKWARD, BOTH):
        raise PreconditionError("direction must be forward, backward or both")
    grid = _as_grid(dom, box, hx)
    grid.check_window(seed.x, seed.t)
    if not grid.contains_point(seed):
        raise PreconditionError(f"seed ({seed.x:g}, {seed.t:g}) is not inside the domain")
    occ = grid.occupancy
    nt = occ.shape[0]
    j0, i0 = (int(v) for v in grid.cell_index(seed.x, seed.t))
    mask = np.zeros_like(occ)
    if direction in (FORWARD, BOTH):
        mask |= _sweep(occ, j0, i0, 1)
    if direction in (BACKWARD, BOTH):
        mask |= _sweep(occ, j0, i0, -1)
    rows = np.flatnonzero(mask.any(axis=1))
    t_sup = grid.t0 + (rows[-1] + 0.5) * grid.ht
    t_inf = grid.t0 + (rows[0] - 0.5) * grid.ht
    return AccessibleSet(seed, direction, mask, grid, float(t_sup), float(t_inf),
                         bool(rows[-1] == nt - 1), bool(rows[0] == 0))


# --------------------------------------------------------------------------
# graph decomposition


@dataclass(frozen=True, eq=False)
class GraphDecomposition:
    verdict: str  # graph | slab | witness
    components: list  # (SampledFunction, orientation) per graph component
    grid: DomainModel = field(repr=False)
    labels: np.ndarray = field(repr=False)
    n_components: int = 0
    witness: tuple | None = None
    witness_component: int | None = None
    validated: bool | None = None

    def reassemble(self) -> DomainModel:
        """Graph or slab model built from the extracted components."""
        if self.verdict == "witness":
            raise PreconditionError("a witness decomposition has no graph model")
        w = self.grid.window
        if self.verdict == "graph":
            f, o = self.components[0]
            return DomainModel.graph(f, (w.x_min, w.x_max), orientation=o)
        (f, _), (g, _) = self.components
        return DomainModel.slab(f, g, (w.x_min, w.x_max))


def _boundary_cells(occ):
    out = np.zeros_like(occ)
    out[:, 1:] |= occ[:, 1:] & ~occ[:, :-1]
    out[:, :-1] |= occ[:, :-1] & ~occ[:, 1:]
    out[1:, :] |= occ[1:, :] & ~occ[:-1, :]
    out[:-1, :] |= occ[:-1, :] & ~occ[1:, :]
    return out


def _transitions(occ, labels):
    """Per horizontal occupancy change: row, inside column, x side (+1 = inside right), label."""
    jj, ii = np.nonzero(occ[:, 1:] != occ[:, :-1])
    right_inside = occ[jj, ii + 1]
    inside_col = np.where(right_inside, ii + 1, ii)
    lab = labels[jj, inside_col]
    return jj, ii, inside_col, np.where(right_inside, 1, -1), lab


def _check_necks(occ, jj, ii):
    """Row of a one-cell-wide occupied channel bounded by one component.

    A channel is a vertical chain (8-adjacent) of single-cell runs lasting at
    least 3 rows whose ends both continue into occupied cells or the window
    edge; tips of thin spikes end in unoccupied cells and do not count.
    """
    nt, nx = occ.shape
    narrow = np.zeros_like(occ)
    for j in np.unique(jj):
        cols = np.sort(ii[jj == j])
        gaps = np.flatnonzero(np.diff(cols) == 1)
        cells = cols[gaps] + 1
        narrow[j, cells[occ[j, cells]]] = True
    if not narrow.any():
        return None
    labels, count = ndimage.label(narrow, structure=EIGHT)
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        j0, j1 = sl[0].start, sl[0].stop - 1
        if j1 - j0 < 2:
            continue
        cells = np.argwhere(labels == k)

        def continues(j, end_row):
            i = cells[cells[:, 0] == end_row, 1]
            if j < 0 or j >= nt:
                return True
            lo, hi = max(0, i.min() - 1), min(nx, i.max() + 2)
            return bool(occ[j, lo:hi].any())

        if continues(j0 - 1, j0) and continues(j1 + 1, j1):
            return j0
    return None


def graphize(dom: DomainModel, window: Box | None = None, resolution: float | None = None):
    """Split the boundary into graphs of time, or find two same-time points of one component.

    Graph and slab models are rasterized on ``window`` at ``resolution``
    first.  A component is a graph of time when every time row it meets holds
    exactly one of its horizontal occupancy changes and its boundary cells in
    a row stay within one cell of the changes in the neighbouring rows.
    """
    if dom.is_grid:
        grid = dom
        if window is not None:
            grid = _crop(dom, window)
    else:
        box = window or dom.window
        grid = rasterize(dom, box, resolution or box.x_width / 256)
    occ = grid.occupancy
    if not occ.any():
        raise DegenerateInputError("domain is empty in the window")
    _, n_omega = ndimage.label(occ)
    if n_omega > 1:
        raise PreconditionError(f"domain is not connected in the window ({n_omega} components)")
    bcells = _boundary_cells(occ)
    labels, count = ndimage.label(bcells, structure=EIGHT)
    if count == 0:
        raise DegenerateInputError("no boundary in the window")
    jj, ii, icol, side, lab = _transitions(occ, labels)
    xs_edge = grid.x0 + (ii + 0.5) * grid.hx

    comps, bad = [], None
    for k in range(1, count + 1):
        cells = np.argwhere(labels == k)
        rows = np.unique(cells[:, 0])
        sel = lab == k
        j_k, x_k, c_k, s_k = jj[sel], xs_edge[sel], icol[sel], side[sel]
        per_row = np.bincount(j_k - rows[0], minlength=rows.size) if j_k.size else None
        neck = _check_necks(occ, j_k, ii[sel])
        if neck is not None:
            raise AmbiguityError(f"slice t={grid.t0 + neck * grid.ht:.6g}: occupied neck one cell "
                                 "wide; refine the resolution")
        if per_row is None or per_row.size != rows.size or np.any(per_row != 1):
            bad = bad or (k, _pair_from_row(grid, cells, j_k, x_k))
            continue
        order = np.argsort(j_k)
        j_k, x_k, c_k, s_k = j_k[order], x_k[order], c_k[order], s_k[order]
        lo = np.minimum.reduce([c_k, np.r_[c_k[:1], c_k[:-1]], np.r_[c_k[1:], c_k[-1:]]]) - 1
        hi = np.maximum.reduce([c_k, np.r_[c_k[:1], c_k[:-1]], np.r_[c_k[1:], c_k[-1:]]]) + 1
        cj, ci = cells[:, 0] - rows[0], cells[:, 1]
        if np.any(ci < lo[cj]) or np.any(ci > hi[cj]) or np.any(s_k != s_k[0]):
            bad = bad or (k, _pair_from_span(grid, cells, j_k, x_k))
            continue
        if rows.size < 2:
            continue
        comps.append((SampledFunction(grid.t0 + j_k * grid.ht, x_k), int(s_k[0])))

    if bad is not None:
        k, pair = bad
        return GraphDecomposition("witness", comps, grid, labels, count, pair, k)
    comps.sort(key=lambda c: -c[1])
    if len(comps) == 1:
        dec = GraphDecomposition("graph", comps, grid, labels, count)
    elif len(comps) == 2 and comps[0][1] == 1 and comps[1][1] == -1:
        dec = GraphDecomposition("slab", comps, grid, labels, count)
    else:
        raise PreconditionError(f"boundary has {len(comps)} graph components; not a graph or slab")
    return _validate(dec)


def _pair_from_row(grid, cells, j_k, x_k):
    """Two same-row changes of one component, taken from the widest such row."""
    rows, counts = np.unique(j_k, return_counts=True)
    multi = rows[counts >= 2]
    if multi.size == 0:
        return _pair_from_span(grid, cells, j_k, x_k)
    spread = np.array([np.ptp(x_k[j_k == j]) for j in multi])
    best = multi[spread == spread.max()]
    mid = 0.5 * (cells[:, 0].min() + cells[:, 0].max())
    j = best[np.argmin(np.abs(best - mid))]
    xr = x_k[j_k == j]
    t = grid.t0 + j * grid.ht
    return ParaPoint(xr.min(), t), ParaPoint(xr.max(), t)


def _pair_from_span(grid, cells, j_k, x_k):
    """A change and the farthest boundary cell of the same row."""
    best = None
    for j in np.unique(cells[:, 0]):
        xr = x_k[j_k == j]
        if xr.size == 0:
            continue
        xc = grid.x0 + cells[cells[:, 0] == j, 1] * grid.hx
        d = np.abs(xc[:, None] - xr[None, :]).min(axis=1)
        m = int(np.argmax(d))
        if best is None or d[m] > best[0]:
            best = (d[m], j, xr[np.argmin(np.abs(xr - xc[m]))], xc[m])
    _, j, xa, xb = best
    t = grid.t0 + j * grid.ht
    a, b = sorted((xa, xb))
    return ParaPoint(a, t), ParaPoint(b, t)


def _validate(dec):
    grid = dec.grid
    occ = grid.occupancy
    nt, nx = occ.shape
    xs = grid.x0 + grid.hx * np.arange(nx)
    fs = [f for f, _ in dec.components]
    lo = max(f.t_min for f in fs)
    hi = min(f.t_max for f in fs)
    ts = grid.t0 + grid.ht * np.arange(nt)
    rows = np.flatnonzero((ts >= lo - 1e-12) & (ts <= hi + 1e-12))
    model = dec.reassemble()
    X, T = np.meshgrid(xs, np.clip(ts[rows], model.window.t_min, model.window.t_max))
    same = np.array_equal(model.contains(X, T), occ[rows])
    return GraphDecomposition(dec.verdict, dec.components, grid, dec.labels, dec.n_components,
                              validated=bool(same))


def _crop(dom, window: Box):
    nt, nx = dom.occupancy.shape
    xs = dom.x0 + dom.hx * np.arange(nx)
    ts = dom.t0 + dom.ht * np.arange(nt)
    ci = np.flatnonzero((xs >= window.x_min) & (xs <= window.x_max))
    rj = np.flatnonzero((ts >= window.t_min) & (ts <= window.t_max))
    if ci.size < 2 or rj.size < 2:
        raise PreconditionError("crop window holds fewer than two cells")
    occ = dom.occupancy[rj[0]:rj[-1] + 1, ci[0]:ci[-1] + 1]
    return DomainModel.grid(occ, xs[ci[0]], ts[rj[0]], dom.hx, dom.ht, name=dom.name)


# --------------------------------------------------------------------------
# theorem consistency


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    nta: object
    decomposition: object  # GraphDecomposition or the error raised by graphize
    consistent: bool

    @property
    def certified(self):
        return isinstance(self.nta, NtaCertificate)

    @property
    def verdict(self):
        d = self.decomposition
        return d.verdict if isinstance(d, GraphDecomposition) else type(d).__name__


def theorem_consistency_check(dom: DomainModel, window: ParaCylinder, params: NtaParams | None,
                              scales, resolution: float | None = None, seed: int = 0):
    """Run the certifier and the decomposition on the same window.

    The report is inconsistent exactly when the domain is certified NTA and
    the decomposition finds two same-time points on one boundary component.
    """
    nta = certify_nta(dom, window, scales, params, seed=seed)
    box = window.box()
    w = dom.window
    box = Box(max(box.x_min, w.x_min), min(box.x_max, w.x_max),
              max(box.t_min, w.t_min), min(box.t_max, w.t_max))
    if resolution is None and not dom.is_grid:
        resolution = min(box.x_width / 128, math.sqrt(box.t_width / 128))
    try:
        dec = graphize(dom, box, resolution)
    except (PreconditionError, AmbiguityError) as exc:
        dec = exc
    witness = isinstance(dec, GraphDecomposition) and dec.verdict == "witness"
    return ConsistencyReport(nta, dec, not (isinstance(nta, NtaCertificate) and witness))
