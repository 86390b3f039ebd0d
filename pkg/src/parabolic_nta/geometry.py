"""Parabolic metric primitives and domain models in one space and one time dimension.

Points are ``(x, t)`` pairs.  Distances use the parabolic metric
``|x1 - x2| + |t1 - t2| ** 0.5``, cylinders ``C_r(x0, t0)`` are the open boxes
``|x - x0| < r, |t - t0| < r**2``.  A :class:`DomainModel` is one of

* ``graph``: ``{x > f(t)}`` (orientation +1) or ``{x < f(t)}`` (orientation -1),
* ``slab``: ``{f(t) < x < g(t)}``,
* ``grid``: a boolean occupancy lattice with ``ht == hx**2``.

Every model carries a finite window; queries outside it raise
:class:`~parabolic_nta.errors.WindowError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DegenerateInputError, PreconditionError, WindowError

# Queries are processed in chunks so the (queries x boundary) matrices stay small.
_MAX_PAIRS = 2_000_000


@dataclass(frozen=True)
class ParaPoint:
    x: float
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "t", float(self.t))
        if not (math.isfinite(self.x) and math.isfinite(self.t)):
            raise PreconditionError(f"non-finite point ({self.x}, {self.t})")

    def __iter__(self):
        yield self.x
        yield self.t


def para_dist(p: ParaPoint, q: ParaPoint) -> float:
    """Parabolic distance ``|x1 - x2| + |t1 - t2|**(1/2)``."""
    return abs(p.x - q.x) + math.sqrt(abs(p.t - q.t))


def para_dist_array(x1, t1, x2, t2):
    """Broadcasting version of :func:`para_dist` on coordinate arrays."""
    return np.abs(np.subtract(x1, x2)) + np.sqrt(np.abs(np.subtract(t1, t2)))


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned rectangle ``[x_min, x_max] x [t_min, t_max]``."""

    x_min: float
    x_max: float
    t_min: float
    t_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.t_min < self.t_max):
            raise PreconditionError(f"empty box {self}")

    @property
    def x_width(self):
        return self.x_max - self.x_min

    @property
    def t_width(self):
        return self.t_max - self.t_min

    def contains(self, x, t, tol=0.0):
        return ((x >= self.x_min - tol) & (x <= self.x_max + tol)
                & (t >= self.t_min - tol) & (t <= self.t_max + tol))

    def covers(self, other: "Box", tol=1e-12) -> bool:
        return (other.x_min >= self.x_min - tol and other.x_max <= self.x_max + tol
                and other.t_min >= self.t_min - tol and other.t_max <= self.t_max + tol)

    def as_tuple(self):
        return (self.x_min, self.x_max, self.t_min, self.t_max)


@dataclass(frozen=True)
class ParaCylinder:
    center: ParaPoint
    r: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise PreconditionError(f"cylinder radius must be positive, got {self.r}")

    def contains(self, p: ParaPoint) -> bool:
        return bool(self.contains_xy(p.x, p.t))

    def contains_xy(self, x, t):
        return ((np.abs(np.subtract(x, self.center.x)) < self.r)
                & (np.abs(np.subtract(t, self.center.t)) < self.r ** 2))

    def box(self) -> Box:
        c, r = self.center, self.r
        return Box(c.x - r, c.x + r, c.t - r * r, c.t + r * r)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Piecewise-linear function of time given by strictly increasing knots."""

    t: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        v = np.array(self.v, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise DegenerateInputError("knot times and values must be 1-D of equal length")
        if t.size < 2:
            raise DegenerateInputError("a sampled function needs at least 2 knots")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise DegenerateInputError("non-finite knot")
        if np.any(np.diff(t) <= 0):
            raise DegenerateInputError("knot times must be strictly increasing")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_callable(cls, func, t_min, t_max, n):
        t = np.linspace(t_min, t_max, int(n))
        return cls(t, func(t))

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def __len__(self):
        return self.t.size

    def __eq__(self, other):
        if not isinstance(other, SampledFunction):
            return NotImplemented
        return np.array_equal(self.t, other.t) and np.array_equal(self.v, other.v)

    def __repr__(self):
        return f"SampledFunction({self.t.size} knots on [{self.t_min:g}, {self.t_max:g}])"

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.t_min), abs(self.t_max))
        if np.any(t_arr < self.t_min - tol) or np.any(t_arr > self.t_max + tol):
            raise WindowError(f"evaluation outside [{self.t_min}, {self.t_max}]")
        out = np.interp(t_arr, self.t, self.v)
        return float(out) if out.ndim == 0 else out

    def affine(self, tau, r, q):
        """Knots of ``s -> (f(r**2 s + tau) - q) / r``."""
        return SampledFunction((self.t - tau) / (r * r), (self.v - q) / r)

    def scaled(self, rho):
        """Knots of the graph image under ``(x, t) -> (rho x, rho**2 t)``."""
        return SampledFunction(self.t * (rho * rho), self.v * rho)

    def translated(self, dx, dt):
        return SampledFunction(self.t + dt, self.v + dx)

    def negated(self):
        return SampledFunction(self.t, -self.v)

    def restrict(self, t_lo, t_hi):
        t_lo, t_hi = max(t_lo, self.t_min), min(t_hi, self.t_max)
        if not t_lo < t_hi:
            raise WindowError("restriction window does not meet the knot range")
        inner = (self.t > t_lo) & (self.t < t_hi)
        t = np.concatenate([[t_lo], self.t[inner], [t_hi]])
        return SampledFunction(t, self(t))

    def subdivided(self, k=2):
        """Same function with each segment split into ``k`` pieces."""
        frac = np.arange(k) / k
        t = (self.t[:-1, None] + frac[None, :] * np.diff(self.t)[:, None]).ravel()
        t = np.append(t, self.t[-1])
        return SampledFunction(t, self(t))


class LipHalfNorm(NamedTuple):
    value: float
    refined: float
    pair: tuple


def _knot_pair_max(t, v):
    n = t.size
    best, pair = 0.0, (float(t[0]), float(t[-1]))
    step = max(1, _MAX_PAIRS // n)
    for i0 in range(0, n, step):
        dt = np.abs(t[i0:i0 + step, None] - t[None, :])
        dv = np.abs(v[i0:i0 + step, None] - v[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dt > 0, dv / np.sqrt(dt), 0.0)
        k = int(np.argmax(ratio))
        i, j = divmod(k, n)
        if ratio[i, j] > best:
            best = float(ratio[i, j])
            pair = (float(t[i0 + i]), float(t[j]))
    return best, pair


def lip_half_norm(f: SampledFunction) -> LipHalfNorm:
    """Max of ``|f(t) - f(s)| / |t - s|**(1/2)`` over knot pairs.

    ``refined`` repeats the computation after splitting every segment in two;
    the supremum over all pairs of a piecewise-linear ``f`` can exceed the
    knot-pair value, and the refined value brackets how much.
    """
    if len(f) < 2:
        raise DegenerateInputError("need at least 2 knots")
    value, pair = _knot_pair_max(f.t, f.v)
    g = f.subdivided(2) if len(f) < 4000 else f
    refined, _ = _knot_pair_max(g.t, g.v)
    return LipHalfNorm(value, max(value, refined), pair)


# --------------------------------------------------------------------------
# distance kernels


def _curve_distance(f: SampledFunction, xs, ts, cap=np.inf):
    """Exact parabolic distance from points to the curve ``{(f(s), s)}``, capped.

    Between knots, at the query time and at crossings ``f(s) = x`` the function
    ``s -> |x - f(s)| + |t - s|**(1/2)`` is concave, so its minimum over the
    curve is attained at one of those break points.
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    out = np.empty(xs.shape)
    tc = np.clip(ts, f.t_min, f.t_max)
    base = np.abs(xs - np.interp(tc, f.t, f.v)) + np.sqrt(np.abs(ts - tc))
    base = np.minimum(base, cap)
    order = np.argsort(ts, kind="stable")
    pos = 0
    n = xs.size
    while pos < n:
        # grow the chunk while the knot slice stays affordable
        hi = min(n, pos + 512)
        idx = order[pos:hi]
        reach = np.max(base[idx]) ** 2
        k0 = max(0, int(np.searchsorted(f.t, ts[idx].min() - reach, "right")) - 1)
        k1 = min(f.t.size, int(np.searchsorted(f.t, ts[idx].max() + reach, "left")) + 1)
        if (k1 - k0) * idx.size > _MAX_PAIRS and idx.size > 1:
            hi = pos + max(1, _MAX_PAIRS // (k1 - k0))
            idx = order[pos:hi]
            reach = np.max(base[idx]) ** 2
            k0 = max(0, int(np.searchsorted(f.t, ts[idx].min() - reach, "right")) - 1)
            k1 = min(f.t.size, int(np.searchsorted(f.t, ts[idx].max() + reach, "left")) + 1)
        T, V = f.t[k0:k1], f.v[k0:k1]
        x = xs[idx, None]
        t = ts[idx, None]
        best = base[idx]
        if T.size:
            best = np.minimum(best, np.min(np.abs(x - V) + np.sqrt(np.abs(t - T)), axis=1))
        if T.size >= 2:
            v0, v1 = V[:-1], V[1:]
            dv = v1 - v0
            with np.errstate(divide="ignore", invalid="ignore"):
                w = (x - v0) / dv
            ok = (w >= 0) & (w <= 1) & (dv != 0)
            s = T[:-1] + np.where(ok, w, 0.0) * np.diff(T)
            cand = np.where(ok, np.sqrt(np.abs(t - s)), np.inf)
            best = np.minimum(best, cand.min(axis=1))
        out[idx] = best
        pos = hi
    return out


def _point_set_distance(px, pt, xs, ts, cap=np.inf):
    """Parabolic distance from query points to a finite point set sorted by time."""
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    out = np.full(xs.shape, float(cap))
    if px.size == 0:
        if not np.isfinite(cap):
            raise DegenerateInputError("empty boundary sample")
        return out
    order = np.argsort(ts, kind="stable")
    reach = cap * cap if np.isfinite(cap) else np.inf
    step = 256
    for pos in range(0, xs.size, step):
        idx = order[pos:pos + step]
        if np.isfinite(reach):
            k0 = int(np.searchsorted(pt, ts[idx].min() - reach, "left"))
            k1 = int(np.searchsorted(pt, ts[idx].max() + reach, "right"))
        else:
            k0, k1 = 0, pt.size
        for j0 in range(k0, k1, max(1, _MAX_PAIRS // idx.size)):
            j1 = min(k1, j0 + max(1, _MAX_PAIRS // idx.size))
            d = (np.abs(xs[idx, None] - px[None, j0:j1])
                 + np.sqrt(np.abs(ts[idx, None] - pt[None, j0:j1])))
            out[idx] = np.minimum(out[idx], d.min(axis=1))
    return out


# --------------------------------------------------------------------------
# domain models


@dataclass(frozen=True, eq=False)
class DomainModel:
    """A concrete domain restricted to a finite window.

    Use the :meth:`graph`, :meth:`slab` and :meth:`grid` constructors.
    """

    variant: str
    window: Box
    f: SampledFunction | None = None
    g: SampledFunction | None = None
    orientation: int = 1
    occupancy: np.ndarray | None = field(default=None, repr=False)
    x0: float = 0.0
    t0: float = 0.0
    hx: float = 0.0
    ht: float = 0.0
    name: str = ""

    # -- constructors -------------------------------------------------------

    @classmethod
    def graph(cls, f, x_range=None, orientation=1, name=""):
        if orientation not in (1, -1):
            raise PreconditionError("orientation must be +1 or -1")
        if x_range is None:
            pad = 1.0 + (f.t_max - f.t_min) ** 0.5
            x_range = (float(f.v.min()) - pad, float(f.v.max()) + pad)
        window = Box(x_range[0], x_range[1], f.t_min, f.t_max)
        return cls("graph", window, f=f, orientation=orientation, name=name)

    @classmethod
    def slab(cls, f, g, x_range=None, name=""):
        t_lo, t_hi = max(f.t_min, g.t_min), min(f.t_max, g.t_max)
        if not t_lo < t_hi:
            raise PreconditionError("slab boundaries share no time window")
        if f.t_min != g.t_min or f.t_max != g.t_max:
            f, g = f.restrict(t_lo, t_hi), g.restrict(t_lo, t_hi)
        tt = np.union1d(f.t, g.t)
        if np.any(g(tt) <= f(tt)):
            raise PreconditionError("slab requires g(t) > f(t) on the window")
        if x_range is None:
            pad = 1.0 + (t_hi - t_lo) ** 0.5
            x_range = (float(f.v.min()) - pad, float(g.v.max()) + pad)
        return cls("slab", Box(x_range[0], x_range[1], t_lo, t_hi), f=f, g=g, name=name)

    @classmethod
    def grid(cls, occupancy, x0, t0, hx, ht=None, name=""):
        occ = np.array(occupancy, dtype=bool)
        if occ.ndim != 2 or min(occ.shape) < 2:
            raise DegenerateInputError("occupancy must be a 2-D array, rows = time")
        if ht is None:
            ht = hx * hx
        if not math.isclose(ht, hx * hx, rel_tol=1e-9):
            raise PreconditionError("grid lattice must satisfy ht == hx**2")
        occ.flags.writeable = False
        nt, nx = occ.shape
        window = Box(x0 - hx / 2, x0 + (nx - 0.5) * hx, t0 - ht / 2, t0 + (nt - 0.5) * ht)
        return cls("grid", window, occupancy=occ, x0=float(x0), t0=float(t0),
                   hx=float(hx), ht=float(ht), name=name)

    # -- basic queries ------------------------------------------------------

    @property
    def is_grid(self):
        return self.variant == "grid"

    def check_window(self, x, t, inflate=0.0):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        w = self.window
        ok = ((x >= w.x_min - inflate) & (x <= w.x_max + inflate)
              & (t >= w.t_min - inflate ** 2) & (t <= w.t_max + inflate ** 2))
        if not np.all(ok):
            raise WindowError(f"query outside model window {w.as_tuple()}")

    def covers_cylinder(self, cyl: ParaCylinder) -> bool:
        return self.window.covers(cyl.box())

    def cell_index(self, x, t):
        i = np.floor((np.asarray(x) - self.x0) / self.hx + 0.5).astype(int)
        j = np.floor((np.asarray(t) - self.t0) / self.ht + 0.5).astype(int)
        return j, i

    def contains(self, x, t):
        """Vectorised membership test; points must lie in the window."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        self.check_window(x, t)
        if self.variant == "graph":
            return self.orientation * (x - self.f(t)) > 0
        if self.variant == "slab":
            return (x > self.f(t)) & (x < self.g(t))
        j, i = self.cell_index(x, t)
        nt, nx = self.occupancy.shape
        return self.occupancy[np.clip(j, 0, nt - 1), np.clip(i, 0, nx - 1)]

    def contains_point(self, p: ParaPoint) -> bool:
        return bool(self.contains(p.x, p.t))

    @property
    def resolution(self) -> float:
        """Parabolic length below which the model cannot resolve features."""
        if self.is_grid:
            return self.hx
        return 1e-9 * max(1.0, self.window.x_width)

    @cached_property
    def grid_boundary(self):
        """Cell-boundary midpoints ``(x, t)`` of a grid model, sorted by time."""
        occ = self.occupancy
        jv, iv = np.nonzero(occ[:, 1:] != occ[:, :-1])
        jh, ih = np.nonzero(occ[1:, :] != occ[:-1, :])
        px = np.concatenate([self.x0 + (iv + 0.5) * self.hx, self.x0 + ih * self.hx])
        pt = np.concatenate([self.t0 + jv * self.ht, self.t0 + (jh + 0.5) * self.ht])
        order = np.lexsort((px, pt))
        return px[order], pt[order]

    # -- transformations ----------------------------------------------------

    def reflected(self):
        """Image under ``(x, t) -> (-x, t)``."""
        w = self.window
        box = Box(-w.x_max, -w.x_min, w.t_min, w.t_max)
        if self.variant == "graph":
            return DomainModel("graph", box, f=self.f.negated(), orientation=-self.orientation,
                               name=self.name)
        if self.variant == "slab":
            return DomainModel("slab", box, f=self.g.negated(), g=self.f.negated(), name=self.name)
        nx = self.occupancy.shape[1]
        return DomainModel.grid(self.occupancy[:, ::-1], -(self.x0 + (nx - 1) * self.hx),
                                self.t0, self.hx, self.ht, name=self.name)

    def scaled(self, rho):
        """Image under ``(x, t) -> (rho x, rho**2 t)``."""
        w = self.window
        box = Box(rho * w.x_min, rho * w.x_max, rho * rho * w.t_min, rho * rho * w.t_max)
        if self.variant == "graph":
            return DomainModel("graph", box, f=self.f.scaled(rho), orientation=self.orientation,
                               name=self.name)
        if self.variant == "slab":
            return DomainModel("slab", box, f=self.f.scaled(rho), g=self.g.scaled(rho),
                               name=self.name)
        return DomainModel.grid(self.occupancy, rho * self.x0, rho * rho * self.t0,
                                rho * self.hx, rho * rho * self.ht, name=self.name)

    def translated(self, dx, dt):
        w = self.window
        box = Box(w.x_min + dx, w.x_max + dx, w.t_min + dt, w.t_max + dt)
        if self.variant == "graph":
            return DomainModel("graph", box, f=self.f.translated(dx, dt),
                               orientation=self.orientation, name=self.name)
        if self.variant == "slab":
            return DomainModel("slab", box, f=self.f.translated(dx, dt),
                               g=self.g.translated(dx, dt), name=self.name)
        return DomainModel.grid(self.occupancy, self.x0 + dx, self.t0 + dt, self.hx, self.ht,
                                name=self.name)

    def rescaled_at(self, center: ParaPoint, r):
        """``{(x, t) | (r x + Q, r**2 t + tau) in self}`` for ``center = (Q, tau)``."""
        q, tau = center.x, center.t
        w = self.window
        box = Box((w.x_min - q) / r, (w.x_max - q) / r, (w.t_min - tau) / r ** 2,
                  (w.t_max - tau) / r ** 2)
        if self.variant == "graph":
            return DomainModel("graph", box, f=self.f.affine(tau, r, q),
                               orientation=self.orientation, name=self.name)
        if self.variant == "slab":
            return DomainModel("slab", box, f=self.f.affine(tau, r, q), g=self.g.affine(tau, r, q),
                               name=self.name)
        return DomainModel.grid(self.occupancy, (self.x0 - q) / r, (self.t0 - tau) / r ** 2,
                                self.hx / r, self.ht / r ** 2, name=self.name)


# --------------------------------------------------------------------------
# operations


def distance_to_boundary(dom: DomainModel, xs, ts, cap=np.inf):
    """Unsigned parabolic distance to the boundary, exact up to ``cap``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if dom.variant == "graph":
        return _curve_distance(dom.f, xs, ts, cap)
    if dom.variant == "slab":
        return np.minimum(_curve_distance(dom.f, xs, ts, cap), _curve_distance(dom.g, xs, ts, cap))
    px, pt = dom.grid_boundary
    return _point_set_distance(px, pt, xs, ts, cap)


def signed_distance_array(dom: DomainModel, xs, ts, cap=np.inf):
    """Signed parabolic distance, positive inside; magnitudes are capped at ``cap``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    dom.check_window(xs, ts)
    d = distance_to_boundary(dom, xs, ts, cap)
    inside = dom.contains(xs, ts)
    return np.where(inside, d, -d)


def signed_distance(dom: DomainModel, p: ParaPoint) -> float:
    """Parabolic distance from ``p`` to the boundary, positive inside the domain."""
    return float(signed_distance_array(dom, [p.x], [p.t])[0])


def boundary_sample_array(dom: DomainModel, window: ParaCylinder, n: int):
    """Boundary points in ``window`` as coordinate arrays ``(xs, ts)``."""
    if n < 2:
        raise PreconditionError("boundary_sample needs n >= 2")
    c, r = window.center, window.r
    if dom.is_grid:
        px, pt = dom.grid_boundary
        keep = window.contains_xy(px, pt)
        px, pt = px[keep], pt[keep]
        if px.size > n:
            pick = np.round(np.linspace(0, px.size - 1, n)).astype(int)
            px, pt = px[pick], pt[pick]
        return px, pt
    inset = 1.0 - 1e-9
    ts = np.linspace(c.t - inset * r * r, c.t + inset * r * r, n)
    ts = ts[(ts >= dom.window.t_min) & (ts <= dom.window.t_max)]
    curves = [dom.f] if dom.variant == "graph" else [dom.f, dom.g]
    xs_all, ts_all = [], []
    for curve in curves:
        xs = curve(ts) if ts.size else ts
        keep = np.abs(xs - c.x) < r
        xs_all.append(np.atleast_1d(xs)[keep])
        ts_all.append(ts[keep])
    return np.concatenate(xs_all), np.concatenate(ts_all)


def boundary_sample(dom: DomainModel, window: ParaCylinder, n: int) -> list[ParaPoint]:
    """Deterministic sample of boundary points inside ``window``."""
    xs, ts = boundary_sample_array(dom, window, n)
    return [ParaPoint(x, t) for x, t in zip(xs, ts)]


def rasterize(dom: DomainModel, box: Box, hx: float, name=None) -> DomainModel:
    """Grid model of ``dom`` on ``box`` with cell centres sampled by membership."""
    if dom.is_grid:
        raise PreconditionError("model is already a grid")
    ht = hx * hx
    nx = int(math.floor(box.x_width / hx))
    nt = int(math.floor(box.t_width / ht))
    if nx < 2 or nt < 2:
        raise PreconditionError("rasterization box smaller than two cells")
    x0 = box.x_min + hx / 2
    t0 = box.t_min + ht / 2
    xs = x0 + hx * np.arange(nx)
    ts = t0 + ht * np.arange(nt)
    dom.check_window(xs[[0, -1]], ts[[0, -1]])
    if dom.variant == "graph":
        fv = dom.f(ts)[:, None]
        occ = dom.orientation * (xs[None, :] - fv) > 0
    else:
        occ = (xs[None, :] > dom.f(ts)[:, None]) & (xs[None, :] < dom.g(ts)[:, None])
    return DomainModel.grid(occ, x0, t0, hx, ht, name=name or dom.name)
