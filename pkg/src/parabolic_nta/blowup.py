"""Pseudo-blowups of a graph domain with its Green function and caloric measure.

At a boundary point ``(Q, τ)`` and radius ``r`` the rescaled objects are

* ``Ω_r = {(x, t) : (r x + Q, r² t + τ) ∈ Ω}``,
* ``u_r(x, t) = u(r x + Q, r² t + τ) / (r A)`` with ``A`` the average of the
  kernel ``h`` over the surface ball ``Δ_r(Q, τ)``,
* ``ω_r`` with density ``h(r² t + τ) / A`` against ``dt`` on ``∂Ω_r``,
* ``σ_r = dt`` on ``∂Ω_r``.

The candidate limit is always the half-plane through the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from .caloric import (CaloricField, PoissonKernelProfile, bump_suite, estimate_poisson_kernel,
                      omega_of_ball, solve_green_infinity)
from .errors import DegenerateInputError, PreconditionError, ResolutionError, WindowError
from .geometry import (Box, DomainModel, ParaCylinder, ParaPoint, SampledFunction,
                       boundary_sample_array, distance_to_boundary)
from .measure import SurfaceBall, sigma_of_ball

UNIT_WINDOW = Box(-1.0, 1.0, -1.0, 1.0)
RESOLVE_FACTOR = 32  # re-solve on the rescaled domain when r < 32 hx


@dataclass(frozen=True, eq=False)
class BlowupStep:
    index: int
    center: ParaPoint
    r: float
    dom: DomainModel = dc_field(repr=False)
    caloric: CaloricField = dc_field(repr=False)
    profile: PoissonKernelProfile = dc_field(repr=False)
    kernel_average: float
    prefactor: float  # σ(Δ_r) / r²
    sigma_unit: float  # σ_r of the unit surface ball at the origin
    omega_unit: float  # ω_r of the same ball
    resolved: bool  # True when u_r was re-solved on Ω_r
    consistency: float  # sup |kernel of u_r - density of ω_r| on the unit window

    @property
    def omega_unit_normalized(self):
        return self.omega_unit / self.prefactor


def _check_graph(dom):
    if dom.variant != "graph":
        raise PreconditionError("pseudo-blowups are implemented for graph domains")


def _unit_density(profile, window=UNIT_WINDOW):
    keep = (profile.t >= window.t_min - 1e-12) & (profile.t <= window.t_max + 1e-12)
    return profile.t[keep], profile.h[keep]


def _solve_window(dom, window):
    """``window`` widened in x so the kernel stencil reaches the boundary at all its times."""
    g = dom.f.restrict(window.t_min, window.t_max)
    lo = min(window.x_min, float(g.v.min()) - 1.0)
    hi = max(window.x_max, float(g.v.max()) + 1.0)
    return Box(lo, hi, window.t_min, window.t_max)


def pseudo_blowup_step(dom: DomainModel, fld: CaloricField, profile: PoissonKernelProfile,
                       center: ParaPoint, r: float, index: int = 0,
                       window: Box = UNIT_WINDOW, margin: float = 4.0) -> BlowupStep:
    """Rescale domain, Green function, caloric measure and surface measure at ``center``.

    ``u_r`` is obtained by rescaling the parent field when ``r >= 32 hx`` and
    by solving again on ``Ω_r`` (same ``hx`` in rescaled units, normalised so
    the kernel averages 1 over the unit surface ball) otherwise.
    """
    _check_graph(dom)
    if not r > 0:
        raise PreconditionError("radius must be positive")
    if r < 2 * fld.hx:
        raise ResolutionError(f"radius {r:g} below two grid cells of the parent field")
    tol = 1e-9 * max(1.0, abs(center.x))
    if abs(float(dom.f(center.t)) - center.x) > tol:
        raise PreconditionError("blowup centre is not on the boundary")
    q, tau = center.x, center.t
    ball = SurfaceBall(center, r)
    sig = sigma_of_ball(dom, ball)
    A = omega_of_ball(profile, dom, ball) / sig
    if not A > 0:
        raise DegenerateInputError("kernel vanishes on the surface ball")
    dom_r = dom.rescaled_at(center, r)
    unit = SurfaceBall(ParaPoint(0.0, 0.0), 1.0)
    sigma_unit = sigma_of_ball(dom_r, unit)

    if r >= RESOLVE_FACTOR * fld.hx:
        w = fld.window
        fld_r = CaloricField(fld.values / (r * A), (fld.x0 - q) / r, (fld.t0 - tau) / r ** 2,
                             fld.hx / r, fld.ht / r ** 2,
                             Box((fld.box.x_min - q) / r, (fld.box.x_max - q) / r,
                                 (fld.box.t_min - tau) / r ** 2, (fld.box.t_max - tau) / r ** 2),
                             Box((w.x_min - q) / r, (w.x_max - q) / r, (w.t_min - tau) / r ** 2,
                                 (w.t_max - tau) / r ** 2),
                             fld.normalization * r * A, fld.truncation_delta)
        prof_r = PoissonKernelProfile((profile.t - tau) / r ** 2, profile.h / A, profile.delta / r,
                                      profile.component)
        try:
            check = estimate_poisson_kernel(fld_r, dom_r)
            tt, hh = _unit_density(check, window)
            consistency = float(np.max(np.abs(hh - np.interp(tt, prof_r.t, prof_r.h))))
        except WindowError:
            consistency = float("nan")
        resolved = False
    else:
        fld_r = solve_green_infinity(dom_r, _solve_window(dom_r, window), fld.hx, margin=margin)
        prof_r = estimate_poisson_kernel(fld_r, dom_r)
        a_r = omega_of_ball(prof_r, dom_r, unit) / sigma_unit
        fld_r = fld_r.scaled(1.0 / a_r)
        prof_r = prof_r.scaled(1.0 / a_r)
        consistency = 0.0
        resolved = True
    omega_unit = omega_of_ball(prof_r, dom_r, unit)
    return BlowupStep(index, center, r, dom_r, fld_r, prof_r, A, sig / r ** 2, sigma_unit,
                      omega_unit, resolved, consistency)


# --------------------------------------------------------------------------
# diagnostics


def _boundary_points(dom, window: ParaCylinder, n):
    xs, ts = boundary_sample_array(dom, window, n)
    if xs.size == 0:
        raise DegenerateInputError("no boundary points in the window")
    return xs, ts


def _directed(a, b, window, n):
    xs, ts = _boundary_points(a, window, n)
    return float(np.max(distance_to_boundary(b, xs, ts)))


def hausdorff_distance(dom_a: DomainModel, dom_b: DomainModel, window: ParaCylinder,
                       n: int = 1025) -> float:
    """Parabolic Hausdorff distance between the boundaries sampled in ``window``.

    Each boundary is sampled at ``n`` times (grid models: their cell-boundary
    midpoints) and measured against the exact boundary of the other model;
    the sampling is refined once (``2n - 1`` times) and the refined value is
    returned.
    """
    for _ in range(2):
        d = max(_directed(dom_a, dom_b, window, n), _directed(dom_b, dom_a, window, n))
        n = 2 * n - 1
    return d


def graph_measure(f: SampledFunction, density=None, n: int = 4097):
    """``φ -> ∫ φ(f(t), t) ρ(t) dt`` on a graph; ``ρ`` is a profile, callable or 1."""

    def integrate(phi):
        s = phi.support
        if s.t_min < f.t_min - 1e-12 or s.t_max > f.t_max + 1e-12:
            raise WindowError(f"{phi.name} leaves the boundary window")
        t = np.linspace(s.t_min, s.t_max, n)
        if density is None:
            rho = 1.0
        elif isinstance(density, PoissonKernelProfile):
            if s.t_min < density.t[0] - 1e-12 or s.t_max > density.t[-1] + 1e-12:
                raise WindowError(f"{phi.name} leaves the kernel profile window")
            rho = np.interp(t, density.t, density.h)
        else:
            rho = density(t)
        v = phi(f(t), t) * rho
        return float(np.sum(np.diff(t) * (v[:-1] + v[1:]) / 2))

    return integrate


def weak_star_distance(m_a, m_b, bumps=None) -> float:
    """``max_φ |∫ φ dm_a - ∫ φ dm_b|`` over the bump suite."""
    bumps = bump_suite() if bumps is None else bumps
    return max(abs(m_a(phi) - m_b(phi)) for phi in bumps)


# --------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class Thresholds:
    hausdorff: float = 0.05
    weakstar: float = 0.05
    flatness: float = 0.05


@dataclass
class ConvergenceReport:
    steps: list
    hausdorff: list  # (i, r, distance to the half-plane on C_1)
    weakstar: list  # (i, r, max bump discrepancy between σ_r and ω_r)
    flatness: list  # (i, r, sup |h_r - 1| on the unit window)
    verdict: str
    thresholds: Thresholds
    note: str = "deterministic radii; no subsequence selection"

    def rows(self):
        return [(s.index, s.r, h[2], w[2], f[2], s.prefactor, s.sigma_unit, s.omega_unit,
                 s.resolved)
                for s, h, w, f in zip(self.steps, self.hausdorff, self.weakstar, self.flatness)]


def halfplane_limit(orientation=1, extent=1e3) -> DomainModel:
    f = SampledFunction([-extent, extent], [0.0, 0.0])
    return DomainModel.graph(f, (-extent, extent), orientation=orientation)


def _non_increasing(vals, rtol=1e-6):
    tail = vals[-3:]
    return all(b <= a * (1 + rtol) + 1e-12 for a, b in zip(tail[:-1], tail[1:]))


def blowup_sequence(dom: DomainModel, fld: CaloricField, profile: PoissonKernelProfile,
                    center: ParaPoint, radii, thresholds: Thresholds | None = None,
                    window: Box = UNIT_WINDOW) -> ConvergenceReport:
    """Pseudo-blowups along decreasing ``radii`` with three convergence diagnostics.

    The verdict is ``halfplane`` when the Hausdorff distance, the weak-*
    distance between ``σ_r`` and ``ω_r`` and the kernel flatness are all below
    their thresholds at the smallest radius and none of them increases over
    the last three steps; otherwise ``undetermined``.
    """
    _check_graph(dom)
    thresholds = thresholds or Thresholds()
    radii = [float(r) for r in radii]
    if any(b >= a for a, b in zip(radii[:-1], radii[1:])):
        raise PreconditionError("radii must be strictly decreasing")
    limit = halfplane_limit(dom.orientation)
    cyl = ParaCylinder(ParaPoint(0.0, 0.0), 1.0)
    steps, hd, ws, fl = [], [], [], []
    for i, r in enumerate(radii):
        st = pseudo_blowup_step(dom, fld, profile, center, r, index=i, window=window)
        steps.append(st)
        hd.append((i, r, hausdorff_distance(st.dom, limit, cyl)))
        sig = graph_measure(st.dom.f)
        om = graph_measure(st.dom.f, st.profile)
        ws.append((i, r, weak_star_distance(sig, om)))
        _, hh = _unit_density(st.profile, window)
        fl.append((i, r, float(np.max(np.abs(hh - 1.0)))))
    last = (hd[-1][2], ws[-1][2], fl[-1][2])
    below = (last[0] <= thresholds.hausdorff and last[1] <= thresholds.weakstar
             and last[2] <= thresholds.flatness)
    trending = all(_non_increasing([row[2] for row in seq]) for seq in (hd, ws, fl))
    verdict = "halfplane" if below and trending else "undetermined"
    return ConvergenceReport(steps, hd, ws, fl, verdict, thresholds)
