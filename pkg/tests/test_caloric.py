import numpy as np
import pytest

from parabolic_nta import (Box, PreconditionError, ResolutionError, SampledFunction,
                           WindowError)
from parabolic_nta.caloric import (Bump, PoissonKernelProfile, bump_suite, estimate_poisson_kernel,
                                   omega_of_ball, slab_weak_identity_residual,
                                   solve_green_infinity, volume_integral, weak_identity_residual)
from parabolic_nta.domains import disk, halfplane, sine_graph, slab
from parabolic_nta.geometry import DomainModel, ParaPoint
from parabolic_nta.measure import SurfaceBall, doubling_check
from scipy import integrate

W = Box(-1.0, 1.0, -1.0, 1.0)
HP = halfplane(window=(-4, 16, -16, 16))
SIN = sine_graph(0.1, window=(-4, 16, -40, 40))


@pytest.fixture(scope="module")
def hp_field():
    fld = solve_green_infinity(HP, W, 1 / 32)
    return fld, estimate_poisson_kernel(fld, HP)


@pytest.fixture(scope="module")
def sin_fields():
    out = {}
    for hx in (1 / 16, 1 / 32, 1 / 64):
        fld = solve_green_infinity(SIN, W, hx)
        out[hx] = fld, estimate_poisson_kernel(fld, SIN)
    return out


def _inside(fld, dom):
    X, T = np.meshgrid(fld.xs, fld.ts)
    return X, T, dom.contains(X, T)


def test_halfplane_field_is_x(hp_field):
    fld, prof = hp_field
    X, _, inside = _inside(fld, HP)
    assert np.max(np.abs(fld.values - X)[inside]) <= 1e-12
    assert np.max(np.abs(prof.h - 1)) <= 1e-12
    assert fld.normalization > 0 and fld.marching.startswith("backward")


def test_translation_moves_field_exactly():
    hx = 1 / 32
    dx, dt = 3 * hx, 5 * hx * hx
    f = SampledFunction(SIN.f.t, SIN.f.v)
    moved = DomainModel.graph(f.translated(dx, dt), (-4 + dx, 16 + dx))
    a = solve_green_infinity(SIN, W, hx)
    b = solve_green_infinity(moved, Box(W.x_min + dx, W.x_max + dx, W.t_min + dt, W.t_max + dt),
                             hx)
    assert b.values.shape == a.values.shape
    assert np.max(np.abs(b.values - a.values)) <= 1e-9
    t = a.translated(dx, dt)
    assert (t.x0, t.t0) == pytest.approx((b.x0, b.t0))


def test_scaling_by_k_scales_field_and_kernel(sin_fields):
    fld, prof = sin_fields[1 / 32]
    k = 2.5
    prof_k = estimate_poisson_kernel(fld.scaled(k), SIN)
    np.testing.assert_allclose(prof_k.h, k * prof.h, rtol=1e-12)


def test_parabolic_scaling_rho_two_on_halfplane():
    small = solve_green_infinity(HP, W, 1 / 32)
    big = solve_green_infinity(halfplane(window=(-8, 64, -64, 64)), Box(-2, 2, -4, 4), 1 / 16)
    X, T = np.meshgrid(small.xs[::2], small.ts[::4])
    np.testing.assert_allclose(big(2 * X, 4 * T) / 2, small(X, T), atol=1e-12)


def test_sine_field_positive_inside_zero_on_boundary(sin_fields):
    fld, prof = sin_fields[1 / 32]
    X, T, inside = _inside(fld, SIN)
    assert np.all(fld.values[inside] > 0) and np.all(fld.values[~inside] == 0)
    assert np.abs(fld(SIN.f(fld.ts), fld.ts)).max() <= 2 * fld.hx
    assert np.max(np.abs(prof.h - 1)) > 0.05  # nonconstant kernel
    assert abs(np.mean(prof.h) - 1) < 0.1


def test_sine_refinement_changes_field_first_order(sin_fields):
    (a, _), (b, _), (c, _) = (sin_fields[h] for h in (1 / 16, 1 / 32, 1 / 64))
    X, T = np.meshgrid(np.linspace(0.3, 1, 8), np.linspace(-0.9, 0.9, 8))
    d1 = np.max(np.abs(a(X, T) - b(X, T)))
    d2 = np.max(np.abs(b(X, T) - c(X, T)))
    assert d2 <= 0.75 * d1


def test_sine_kernel_stable_under_delta_halving(sin_fields):
    fld, prof = sin_fields[1 / 64]
    half = estimate_poisson_kernel(fld, SIN, delta=2 * fld.hx)
    assert np.max(np.abs(half.h - prof.h) / prof.h) <= 0.02


def test_delta_bounds():
    fld = solve_green_infinity(HP, W, 1 / 16)
    with pytest.raises(ResolutionError):
        estimate_poisson_kernel(fld, HP, delta=fld.hx)
    with pytest.raises(PreconditionError):
        estimate_poisson_kernel(fld, HP, delta=9 * fld.hx)


def test_solver_preconditions():
    with pytest.raises(WindowError):
        solve_green_infinity(HP, W, 1 / 16, box=Box(-1, 2, -1, 1))
    with pytest.raises(PreconditionError):
        solve_green_infinity(disk(0, 0, 1), W, 1 / 16)
    with pytest.raises(PreconditionError):
        solve_green_infinity(HP, W, 0.0)


def test_maximum_principle_per_slice(sin_fields):
    for fld, _ in sin_fields.values():
        _, _, inside = _inside(fld, SIN)
        for row, ok in zip(fld.values, inside):
            assert row[ok].min() >= 0.0


def test_truncation_check_reports_delta():
    fld = solve_green_infinity(SIN, W, 1 / 16, truncation_check=True)
    assert fld.truncation_delta is not None and 0 <= fld.truncation_delta < 0.05


def test_slab_kernels_and_identity():
    d = slab(1.0, window=(-4, 5, -40, 40))
    fld = solve_green_infinity(d, Box(0, 1, -0.5, 0.5), 1 / 32)
    pf = estimate_poisson_kernel(fld, d, component="f")
    pg = estimate_poisson_kernel(fld, d, component="g")
    assert np.mean(pf.h) == pytest.approx(1.0, abs=1e-12)
    assert np.all(pg.h > 0)
    phi = Bump(0.5, 0.0, 0.5, 0.2)
    assert slab_weak_identity_residual(fld, pf, pg, phi, d) < 1e-2
    with pytest.raises(PreconditionError):
        weak_identity_residual(fld, pf, phi, d)


# --------------------------------------------------------------------------
# weak identity


def test_halfplane_identity_analytic_by_quadrature():
    for phi in bump_suite():
        lhs = integrate.quad(lambda t: phi(0.0, t), phi.t0 - phi.b, phi.t0 + phi.b)[0]
        rhs = integrate.dblquad(lambda x, t: x * phi.adjoint(x, t), phi.t0 - phi.b,
                                phi.t0 + phi.b, 0.0, phi.x0 + phi.a)[0]
        assert rhs == pytest.approx(lhs, abs=1e-8)


def test_halfplane_residuals_small(hp_field):
    fld, prof = hp_field
    assert max(weak_identity_residual(fld, prof, phi, HP) for phi in bump_suite()) <= 1e-2


def test_bump_away_from_boundary_is_orthogonal(hp_field):
    fld, prof = hp_field
    phi = Bump(0.6, 0.0, 0.3, 0.5)
    assert abs(volume_integral(phi, fld)) <= 1e-2
    fine = solve_green_infinity(HP, W, fld.hx / 2)
    assert abs(volume_integral(phi, fine)) < abs(volume_integral(phi, fld)) / 2
    assert weak_identity_residual(fld, prof, phi, HP) == pytest.approx(
        abs(volume_integral(phi, fld)))


def test_sine_residual_decreases_under_refinement(sin_fields):
    res = [max(weak_identity_residual(*sin_fields[h], phi, SIN) for phi in bump_suite())
           for h in (1 / 16, 1 / 32, 1 / 64)]
    slopes = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(slopes >= 0.8)


def test_bump_support_escape_is_window_error(hp_field):
    fld, prof = hp_field
    with pytest.raises(WindowError):
        weak_identity_residual(fld, prof, Bump(0.0, 0.9, 0.2, 0.3), HP)


# --------------------------------------------------------------------------
# omega


def _flat(h, t=(-4.0, 4.0)):
    return PoissonKernelProfile(np.array(t), np.array([h, h]), 0.1)


def test_omega_uniform_kernel_equals_sigma():
    o = ParaPoint(0.0, 0.0)
    assert omega_of_ball(_flat(1.0), HP, SurfaceBall(o, 1.0)) == pytest.approx(2.0)
    assert omega_of_ball(_flat(0.0), HP, SurfaceBall(o, 1.0)) == 0.0
    mu = lambda c, r: omega_of_ball(_flat(1.0), HP, SurfaceBall(c, r))  # noqa: E731
    assert doubling_check(mu, [(o, 0.5), (ParaPoint(0.0, 0.5), 0.25)]).c == pytest.approx(4.0)


def test_omega_window_error():
    with pytest.raises(WindowError):
        omega_of_ball(_flat(1.0, (-0.5, 0.5)), HP, SurfaceBall(ParaPoint(0.0, 0.0), 1.0))
