import math

import numpy as np
import pytest

from parabolic_nta import PreconditionError, RejectedQueryError, WindowError
from parabolic_nta.domains import disk, halfplane, holed, sine_graph
from parabolic_nta.geometry import ParaCylinder, ParaPoint, signed_distance
from parabolic_nta.nta import (CorkscrewWitness, NtaCertificate, NtaParams, NtaRefutation,
                               build_harnack_chain, certify_nta, find_corkscrew, fit_window,
                               minimal_gamma, monotone_path_from_chain, time_extremal_points,
                               verify_harnack_chain)

O = ParaPoint(0.0, 0.0)


def test_params_validation():
    p = NtaParams()
    assert p.lam == 2 and p.gamma == minimal_gamma(2) == 3.0
    with pytest.raises(PreconditionError):
        NtaParams(lam=1.5)
    with pytest.raises(PreconditionError):
        NtaParams(lam=2, gamma=2.9)
    with pytest.raises(PreconditionError):
        NtaParams(c_gamma=0.5)


def test_halfplane_corkscrew_example():
    h = halfplane()
    assert CorkscrewWitness(O, 1.0, "forward", "interior", ParaPoint(0.5, 0.5), 0.5, 2).check(h)
    w = find_corkscrew(h, O, 1.0, "forward", "interior", 2)
    assert w.check(h)
    assert w.point.t == 0.5  # first admissible time row
    assert w.distance >= 0.5


def test_exterior_is_mirror_image():
    h = halfplane()
    wi = find_corkscrew(h, O, 1.0, "forward", "interior", 2)
    we = find_corkscrew(h, O, 1.0, "forward", "exterior", 2)
    assert (we.point.x, we.point.t) == (-wi.point.x, wi.point.t)
    assert CorkscrewWitness(O, 1.0, "forward", "exterior", ParaPoint(-0.5, 0.5), -0.5,
                            2).check(h)


def test_backward_direction():
    w = find_corkscrew(halfplane(), O, 1.0, "backward", "interior", 2)
    assert w.point.t == -0.5 and w.check(halfplane())


def test_disk_time_maximum_has_no_forward_interior_corkscrew():
    d = disk(0, 0, 1.0)
    tops = [p for p in time_extremal_points(d) if p.t > 0]
    assert len(tops) == 1
    top = tops[0]
    assert abs(top.t - 1.0) <= 2 * d.hx and abs(top.x) <= 2 * d.hx
    for r in (0.125, 0.25, 0.5):
        assert find_corkscrew(d, top, r, "forward", "interior", 2) is None
        assert find_corkscrew(d, top, r, "backward", "interior", 2) is not None


def test_corkscrew_errors():
    h = halfplane()
    with pytest.raises(PreconditionError):
        find_corkscrew(h, ParaPoint(0.5, 0.0), 0.5, "forward", "interior", 2)
    with pytest.raises(WindowError):
        find_corkscrew(h, ParaPoint(0.0, 15.0), 1.0, "forward", "interior", 2)


@pytest.mark.parametrize("rho", [0.5, 2.0])
def test_corkscrew_scaling_equivariance(rho):
    d = sine_graph(0.3)
    for tau in (-1.3, 0.0, 0.7):
        a = ParaPoint(float(d.f(tau)), tau)
        w = find_corkscrew(d, a, 0.5, "forward", "interior", 2)
        ds = d.scaled(rho)
        b = ParaPoint(rho * a.x, rho * rho * a.t)
        ws = find_corkscrew(ds, b, 0.5 * rho, "forward", "interior", 2)
        assert ws.point.x == pytest.approx(rho * w.point.x, abs=1e-12)
        assert ws.point.t == pytest.approx(rho * rho * w.point.t, abs=1e-12)


def test_corkscrew_reflection_equivariance():
    d = sine_graph(0.3)
    dr = d.reflected()
    for tau in (-0.5, 0.25, 1.0):
        a = ParaPoint(float(d.f(tau)), tau)
        for side in ("interior", "exterior"):
            w = find_corkscrew(d, a, 0.5, "backward", side, 2)
            wr = find_corkscrew(dr, ParaPoint(-a.x, a.t), 0.5, "backward", side, 2)
            assert (wr.point.x, wr.point.t) == pytest.approx((-w.point.x, w.point.t), abs=1e-12)


def test_witnesses_revalidate_on_random_anchors():
    d = sine_graph(0.3)
    rng = np.random.default_rng(5)
    for _ in range(40):
        tau = rng.uniform(-5, 5)
        r = float(rng.choice([0.125, 0.25, 0.5, 1.0]))
        a = ParaPoint(float(d.f(tau)), tau)
        for side in ("interior", "exterior"):
            for direction in ("forward", "backward"):
                w = find_corkscrew(d, a, r, direction, side, 2)
                assert w is not None and w.check(d)


def test_harnack_chain_halfplane_example():
    h = halfplane()
    params = NtaParams()
    p1, p2 = ParaPoint(1.0, 0.0), ParaPoint(1.0, 1.0)
    chain = build_harnack_chain(h, p1, p2, params, eps=1.0)
    rep = verify_harnack_chain(chain, h, params)
    assert rep.valid and all(rep.as_dict().values())
    assert len(chain) <= params.c_gamma * math.log(3)
    d = np.array([signed_distance(h, ParaPoint(*c)) for c in chain.centers])
    assert np.all(chain.radii <= d) and np.all(chain.radii >= d / params.c_gamma)


def test_single_cylinder_chain():
    h = halfplane()
    p = ParaPoint(1.0, 0.0)
    chain = build_harnack_chain(h, p, p, NtaParams())
    assert len(chain) == 1
    assert verify_harnack_chain(chain, h, NtaParams()).valid


def test_harnack_query_rejections():
    h = halfplane()
    with pytest.raises(RejectedQueryError):
        build_harnack_chain(h, ParaPoint(1, 0), ParaPoint(3, 0.01), NtaParams())
    d = disk(0, 0, 1.0)
    with pytest.raises(PreconditionError):
        build_harnack_chain(d, ParaPoint(0, 0.8), ParaPoint(0, 1.5), NtaParams())


def test_deleting_a_middle_cylinder_breaks_overlap_only():
    h = halfplane()
    params = NtaParams()
    chain = build_harnack_chain(h, ParaPoint(0.05, 0.0), ParaPoint(0.05, 1.0), params)
    assert len(chain) >= 3
    rep = verify_harnack_chain(chain.without(len(chain) // 2), h, params)
    assert not rep.overlap
    assert rep.start_stop and rep.comparable


def test_doubled_radii_break_comparability_for_small_constant():
    h = halfplane()
    chain = build_harnack_chain(h, ParaPoint(0.5, 0.0), ParaPoint(0.5, 1.0), NtaParams())
    fat = chain.with_radii(chain.radii * 4)
    assert not verify_harnack_chain(fat, h, c_gamma=1.5).comparable
    assert verify_harnack_chain(chain, h, c_gamma=10).comparable


def test_monotone_path():
    h = halfplane()
    chain = build_harnack_chain(h, ParaPoint(1.0, 0.0), ParaPoint(1.0, 1.0), NtaParams(), eps=1.0)
    path = monotone_path_from_chain(chain, h)
    assert np.all(np.diff(path[:, 1]) > 0)
    assert tuple(path[0]) == (1.0, 0.0) and tuple(path[-1]) == (1.0, 1.0)
    p = ParaPoint(1.0, 0.0)
    single = build_harnack_chain(h, p, p, NtaParams())
    assert len(monotone_path_from_chain(single, h)) == 1


def test_certify_halfplane_small():
    h = halfplane()
    cert = certify_nta(h, ParaCylinder(O, 1.0), [0.25, 0.5, 1.0], NtaParams(), n_anchors=9)
    assert isinstance(cert, NtaCertificate)
    assert cert.revalidate(h)
    assert len(cert.witnesses) == 9 * 3 * 4


def test_certify_holed_refuted_at_time_extremal_point():
    dom = holed(1.0, 0.3)
    scales = [1 / 16, 1 / 8]
    res = certify_nta(dom, fit_window(dom, scales, ParaPoint(1.0, 0.0)), scales, NtaParams(),
                      n_anchors=9)
    assert isinstance(res, NtaRefutation)
    assert res.clause in ("1", "2")
    extremal = time_extremal_points(dom)
    assert min(abs(res.anchor.x - p.x) + abs(res.anchor.t - p.t) for p in extremal) \
        <= 2 * dom.hx
    assert "refined once" in res.exhaustiveness


def test_certify_is_deterministic():
    d = sine_graph(0.3)
    a = certify_nta(d, ParaCylinder(O, 1.0), [0.25, 0.5], n_anchors=5, seed=3)
    b = certify_nta(d, ParaCylinder(O, 1.0), [0.25, 0.5], n_anchors=5, seed=3)
    assert [w.point for w in a.witnesses] == [w.point for w in b.witnesses]
    assert all(np.array_equal(x.centers, y.centers) for x, y in zip(a.chains, b.chains))
