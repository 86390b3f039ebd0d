"""Green function with a pole at infinity for the adjoint heat equation on graph and slab domains.

``u`` solves ``-(u_s + u_xx) = 0`` in the domain, vanishes on the boundary and
grows linearly in the far field.  The terminal-value problem is marched
backward in time from ``box.t_max`` with an explicit scheme (internal step
``hx**2 / 2``); the boundary condition is imposed by linear interpolation
between the first interior node and the exact boundary crossing.  Only the
analysis window is stored, on a lattice with ``ht = hx**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .errors import PreconditionError, ResolutionError, SolverError, WindowError
from .geometry import Box, DomainModel, SampledFunction
from .measure import SurfaceBall, _pieces

MARGIN = 4.0
NU = 0.5  # ht_internal / hx**2


@njit(cache=True)
def _march(u, fk, gk, x_lo, hx, nu, slab, lateral, k_store0, store_every, n_store, i_lo, i_hi,
           k_ref):
    """Backward explicit march; returns stored window rows and the full row at ``k_ref``."""
    n = u.size
    K = fk.size - 1
    out = np.zeros((n_store, i_hi - i_lo))
    ref = np.zeros(n)
    new = np.empty(n)
    for k in range(K + 1):
        if k > 0:
            f = fk[k]
            g = gk[k]
            i0 = int(math.floor((f - x_lo) / hx)) + 1
            if i0 < 0:
                i0 = 0
            if slab:
                i1 = int(math.ceil((g - x_lo) / hx)) - 1
                if i1 > n - 1:
                    i1 = n - 1
            else:
                i1 = n - 1
            for i in range(n):
                new[i] = 0.0
            for i in range(max(i0 + 1, 1), min(i1, n - 1)):
                new[i] = u[i] + nu * (u[i + 1] - 2.0 * u[i] + u[i - 1])
            if not slab:
                new[n - 1] = lateral[k]
            elif i1 > i0:
                th = (g - (x_lo + i1 * hx)) / hx
                new[i1] = th / (1.0 + th) * new[i1 - 1]
            if i0 < i1:
                th = (x_lo + i0 * hx - f) / hx
                new[i0] = th / (1.0 + th) * new[i0 + 1]
            for i in range(n):
                u[i] = new[i]
        if k == k_ref:
            for i in range(n):
                ref[i] = u[i]
        j = k - k_store0
        if j >= 0 and j % store_every == 0 and j // store_every < n_store:
            row = j // store_every
            for i in range(i_lo, i_hi):
                out[row, i - i_lo] = u[i]
    return out, ref


@dataclass(frozen=True, eq=False)
class CaloricField:
    """Stored window of the solution: ``values[j, i] = u(x0 + i hx, t0 + j ht)``."""

    values: np.ndarray = field(repr=False)
    x0: float
    t0: float
    hx: float
    ht: float
    box: Box
    window: Box
    normalization: float
    truncation_delta: float | None = None
    marching: str = "backward in time from box.t_max"

    @property
    def xs(self):
        return self.x0 + self.hx * np.arange(self.values.shape[1])

    @property
    def ts(self):
        return self.t0 + self.ht * np.arange(self.values.shape[0])

    def scaled(self, k):
        return replace(self, values=self.values * k, normalization=self.normalization / k)

    def translated(self, dx, dt):
        w, b = self.window, self.box
        return replace(self, x0=self.x0 + dx, t0=self.t0 + dt,
                       window=Box(w.x_min + dx, w.x_max + dx, w.t_min + dt, w.t_max + dt),
                       box=Box(b.x_min + dx, b.x_max + dx, b.t_min + dt, b.t_max + dt))

    def row(self, t):
        """Index of the stored row at time ``t`` (must be a lattice time)."""
        j = int(round((t - self.t0) / self.ht))
        if not 0 <= j < self.values.shape[0] or abs(self.t0 + j * self.ht - t) > 1e-9 * self.ht:
            raise WindowError(f"t={t:g} is not a stored lattice time")
        return j

    def __call__(self, x, t):
        """Bilinear interpolation inside the stored window."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        nt, nx = self.values.shape
        fx = (x - self.x0) / self.hx
        ft = (t - self.t0) / self.ht
        eps = 1e-9
        if np.any(fx < -eps) or np.any(fx > nx - 1 + eps) or np.any(ft < -eps) \
                or np.any(ft > nt - 1 + eps):
            raise WindowError("evaluation outside the stored window")
        i = np.clip(np.floor(fx).astype(int), 0, nx - 2)
        j = np.clip(np.floor(ft).astype(int), 0, nt - 2)
        a = fx - i
        b = ft - j
        v = self.values
        out = ((1 - a) * (1 - b) * v[j, i] + a * (1 - b) * v[j, i + 1]
               + (1 - a) * b * v[j + 1, i] + a * b * v[j + 1, i + 1])
        return float(out) if out.ndim == 0 else out


def default_box(window: Box, dom: DomainModel, margin=MARGIN) -> Box:
    """Truncation box extending ``window`` by ``margin`` widths in x and forward in time."""
    mx = margin * window.x_width
    mt = margin * window.t_width
    if dom.variant == "slab":
        return Box(window.x_min, window.x_max, window.t_min, window.t_max + mt)
    if dom.orientation == 1:
        return Box(window.x_min, window.x_max + mx, window.t_min, window.t_max + mt)
    return Box(window.x_min - mx, window.x_max, window.t_min, window.t_max + mt)


def _check_margin(window, box, dom, margin):
    tol = 1e-9
    if not box.covers(window):
        raise WindowError("truncation box does not cover the analysis window")
    if box.t_max - window.t_max < margin * window.t_width - tol:
        raise WindowError(f"time margin below {margin:g} window widths")
    if dom.variant == "graph":
        far = (box.x_max - window.x_max) if dom.orientation == 1 else (window.x_min - box.x_min)
        if far < margin * window.x_width - tol:
            raise WindowError(f"far-field margin below {margin:g} window widths")


def _solve(dom, box, hx, window):
    if dom.variant not in ("graph", "slab"):
        raise PreconditionError("the caloric solver handles graph and slab models")
    if dom.variant == "graph" and dom.orientation == -1:
        w = window
        mirrored = _solve(dom.reflected(), Box(-box.x_max, -box.x_min, box.t_min, box.t_max), hx,
                          Box(-w.x_max, -w.x_min, w.t_min, w.t_max))
        vals = mirrored.values[:, ::-1]
        nx = vals.shape[1]
        return replace(mirrored, values=np.ascontiguousarray(vals),
                       x0=-(mirrored.x0 + (nx - 1) * hx), box=box, window=window)
    ht_int = NU * hx * hx
    if not ht_int <= 0.5 * hx * hx + 1e-15:
        raise SolverError("explicit step violates the stability bound")
    # lattice: x nodes from box.x_min; internal times t_max - k ht_int
    n = int(math.floor((box.x_max - box.x_min) / hx + 1e-9)) + 1
    x_lo = box.x_min
    x_hi = x_lo + (n - 1) * hx
    store_every = int(round(hx * hx / ht_int))
    k_top = int(math.floor((box.t_max - window.t_max) / ht_int + 1e-9))
    n_store = int(math.floor((box.t_max - k_top * ht_int - window.t_min)
                             / (store_every * ht_int) + 1e-9)) + 1
    K = k_top + store_every * (n_store - 1)
    sk = box.t_max - ht_int * np.arange(K + 1)
    fk = dom.f(sk)
    gk = dom.g(sk) if dom.variant == "slab" else np.zeros_like(fk)
    xs = x_lo + hx * np.arange(n)
    if dom.variant == "slab":
        lateral = np.zeros_like(fk)
        u0 = np.where((xs > fk[0]) & (xs < gk[0]),
                      np.sin(np.pi * np.clip((xs - fk[0]) / (gk[0] - fk[0]), 0, 1)), 0.0)
    else:
        lateral = x_hi - fk
        u0 = np.maximum(xs - fk[0], 0.0)

    i_lo = int(math.ceil((window.x_min - x_lo) / hx - 1e-9))
    i_hi = int(math.floor((window.x_max - x_lo) / hx + 1e-9)) + 1
    k_ref = int(round((box.t_max - 0.5 * (window.t_min + window.t_max)) / ht_int))
    out, ref = _march(u0.astype(float), fk, gk, x_lo, hx, NU, dom.variant == "slab", lateral,
                      k_top, store_every, n_store, i_lo, i_hi, k_ref)
    if not np.all(np.isfinite(out)):
        raise SolverError("non-finite values in the march")
    values = np.ascontiguousarray(out[::-1])
    t0 = sk[k_top + store_every * (n_store - 1)]
    if dom.variant == "slab":
        norm = 1.0  # set from the kernel by the caller
    else:
        far = xs >= x_hi - 0.5 * (x_hi - window.x_max)
        norm = float(np.polyfit(xs[far], ref[far], 1)[0])
        if not norm > 0:
            raise SolverError("far-field slope is not positive")
        values = values / norm
    return CaloricField(values, float(x_lo + i_lo * hx), float(t0), hx, store_every * ht_int,
                        box, window, norm)


def solve_green_infinity(dom: DomainModel, window: Box, hx: float, box: Box | None = None,
                         margin: float = MARGIN, truncation_check: bool = False) -> CaloricField:
    """Solve on ``box`` (default: ``window`` plus ``margin`` widths) and store ``window``.

    Graph fields are divided by their far-field slope at the window's central
    time; slab fields are scaled so the kernel on the lower boundary averages
    1 over the window.  With ``truncation_check`` the solve is repeated with
    twice the margins and the sup difference over the window is recorded.
    """
    if not hx > 0:
        raise PreconditionError("hx must be positive")
    box = box or default_box(window, dom, margin)
    _check_margin(window, box, dom, margin)
    fld = _solve(dom, box, hx, window)
    if dom.variant == "slab":
        prof = estimate_poisson_kernel(fld, dom, component="f")
        fld = fld.scaled(1.0 / float(np.mean(prof.h)))
    if truncation_check:
        big = Box(window.x_min - 2 * (window.x_min - box.x_min),
                  window.x_max + 2 * (box.x_max - window.x_max),
                  box.t_min, window.t_max + 2 * (box.t_max - window.t_max))
        if dom.variant == "slab":
            big = Box(box.x_min, box.x_max, box.t_min, big.t_max)
        other = solve_green_infinity(dom, window, hx, big, margin)
        delta = float(np.max(np.abs(other.values - fld.values)))
        fld = replace(fld, truncation_delta=delta)
    return fld


# --------------------------------------------------------------------------
# Poisson kernel


@dataclass(frozen=True, eq=False)
class PoissonKernelProfile:
    t: np.ndarray
    h: np.ndarray
    delta: float
    component: str = "f"

    def as_function(self) -> SampledFunction:
        return SampledFunction(self.t, self.h)

    def scaled(self, k):
        return PoissonKernelProfile(self.t, self.h * k, self.delta, self.component)

    def integral(self, a, b):
        """Exact integral of the piecewise-linear profile over ``[a, b]``."""
        g = self.as_function().restrict(a, b)
        return float(np.sum(np.diff(g.t) * (g.v[:-1] + g.v[1:]) / 2))


def _boundary(dom, component):
    if dom.variant == "graph":
        return dom.f, dom.orientation
    if component == "f":
        return dom.f, 1
    if component == "g":
        return dom.g, -1
    raise PreconditionError("component must be 'f' or 'g'")


def estimate_poisson_kernel(fld: CaloricField, dom: DomainModel, delta: float | None = None,
                            component: str = "f") -> PoissonKernelProfile:
    """``h(t) ≈ 2 u(f + δ n)/δ - u(f + 2δ n)/(2δ)`` along the inward normal ``n = ±x``."""
    hx = fld.hx
    delta = 4 * hx if delta is None else float(delta)
    if delta < 2 * hx * (1 - 1e-9):
        raise ResolutionError(f"delta {delta:g} below two grid cells")
    if delta > 8 * hx * (1 + 1e-9):
        raise PreconditionError(f"delta {delta:g} above eight grid cells")
    f, n = _boundary(dom, component)
    ts = fld.ts
    fb = f(ts)
    xs = fld.xs
    ok = (fb + n * 2 * delta >= xs[0]) & (fb + n * 2 * delta <= xs[-1])
    if not ok.any():
        raise WindowError("stored window does not reach the boundary")
    ts, fb = ts[ok], fb[ok]
    u1 = fld(fb + n * delta, ts)
    u2 = fld(fb + n * 2 * delta, ts)
    h = 2 * u1 / delta - u2 / (2 * delta)
    return PoissonKernelProfile(ts, np.maximum(h, 0.0), delta, component)


# --------------------------------------------------------------------------
# test bumps and the weak identity


@dataclass(frozen=True)
class Bump:
    """``φ = B((x - x0)/a) B((t - t0)/b)`` with ``B(z) = (1 - z**2)**4`` on ``|z| < 1``."""

    x0: float
    t0: float
    a: float
    b: float

    @property
    def name(self):
        return f"bump(x0={self.x0:g},t0={self.t0:g},a={self.a:g},b={self.b:g})"

    @property
    def support(self):
        return Box(self.x0 - self.a, self.x0 + self.a, self.t0 - self.b, self.t0 + self.b)

    @staticmethod
    def _b(z):
        w = np.clip(1 - z * z, 0, None)
        return w ** 4, -8 * z * w ** 3, w ** 2 * (56 * z * z - 8)

    def __call__(self, x, t):
        bx, _, _ = self._b((np.asarray(x) - self.x0) / self.a)
        bt, _, _ = self._b((np.asarray(t) - self.t0) / self.b)
        return bx * bt

    def adjoint(self, x, t):
        """``φ_xx - φ_t``."""
        bx, _, bxx = self._b((np.asarray(x) - self.x0) / self.a)
        bt, bt1, _ = self._b((np.asarray(t) - self.t0) / self.b)
        return bxx * bt / self.a ** 2 - bx * bt1 / self.b

    def rescaled(self, q, tau, r):
        """The bump ``φ((x - q)/r, (t - tau)/r**2)`` in parent coordinates."""
        return Bump(q + r * self.x0, tau + r * r * self.t0, r * self.a, r * r * self.b)


BUMP_WIDTHS = ((0.25, 0.25), (0.45, 0.4), (0.65, 0.5))
BUMP_CENTERS = ((0.0, 0.0), (0.1, 0.25), (-0.1, -0.25), (0.05, 0.45))


def bump_suite():
    """Twelve bumps (three widths, four centres) inside the unit cylinder."""
    return [Bump(x0, t0, a, b) for a, b in BUMP_WIDTHS for x0, t0 in BUMP_CENTERS]


def boundary_integral(phi: Bump, f: SampledFunction, profile: PoissonKernelProfile):
    """Trapezoid rule for ``∫ φ(f(t), t) h(t) dt`` on the profile samples."""
    s = phi.support
    if s.t_min < profile.t[0] - 1e-12 or s.t_max > profile.t[-1] + 1e-12:
        raise WindowError(f"{phi.name} leaves the kernel profile window")
    vals = phi(f(profile.t), profile.t) * profile.h
    return float(np.sum(np.diff(profile.t) * (vals[:-1] + vals[1:]) / 2))


def volume_integral(phi: Bump, fld: CaloricField):
    """Lattice sum of ``u (φ_xx - φ_t) hx ht``."""
    if not fld.window.covers(phi.support):
        raise WindowError(f"{phi.name} leaves the stored window")
    s = phi.support
    xs, ts = fld.xs, fld.ts
    ci = np.flatnonzero((xs > s.x_min) & (xs < s.x_max))
    rj = np.flatnonzero((ts > s.t_min) & (ts < s.t_max))
    if ci.size == 0 or rj.size == 0:
        return 0.0
    vals = fld.values[rj[0]:rj[-1] + 1, ci[0]:ci[-1] + 1]
    X, T = np.meshgrid(xs[ci], ts[rj])
    return float(np.sum(vals * phi.adjoint(X, T)) * fld.hx * fld.ht)


def weak_identity_residual(fld: CaloricField, profile: PoissonKernelProfile, phi: Bump,
                           dom: DomainModel) -> float:
    """``|∫ φ h dt - Σ u (φ_xx - φ_t) hx ht|``."""
    f, _ = _boundary(dom, profile.component)
    if dom.variant == "slab":
        other = "g" if profile.component == "f" else "f"
        raise PreconditionError(f"slab identity needs both kernels; pass component {other!r} "
                                "via slab_weak_identity_residual")
    return abs(boundary_integral(phi, f, profile) - volume_integral(phi, fld))


def slab_weak_identity_residual(fld, profile_f, profile_g, phi, dom):
    return abs(boundary_integral(phi, dom.f, profile_f) + boundary_integral(phi, dom.g, profile_g)
               - volume_integral(phi, fld))


def omega_of_ball(profile: PoissonKernelProfile, dom: DomainModel, ball: SurfaceBall) -> float:
    """``∫ h dt`` over the times where the boundary component lies in the ball."""
    f, _ = _boundary(dom, profile.component)
    c = ball.center
    a, b, _, _ = _pieces(f, c.x, c.t, ball.r)
    if a.size and (a.min() < profile.t[0] - 1e-12 or b.max() > profile.t[-1] + 1e-12):
        raise WindowError("ball leaves the kernel profile window")
    return float(sum(profile.integral(lo, hi) for lo, hi in zip(a, b)))
