import numpy as np
import pytest

from parabolic_nta import AmbiguityError, Box, PreconditionError
from parabolic_nta.boundary import (GraphDecomposition, accessible_set, graphize,
                                    theorem_consistency_check)
from parabolic_nta.domains import (bubble, capped, disk, grid_from_indicator, halfplane,
                                   sine_graph, slab)
from parabolic_nta.geometry import DomainModel, ParaCylinder, ParaPoint
from parabolic_nta.nta import NtaCertificate, NtaParams, NtaRefutation


def test_accessible_halfplane_reaches_top():
    a = accessible_set(halfplane(), ParaPoint(1.0, 0.0), "forward",
                       box=Box(-2, 2, -1, 1), hx=1 / 32)
    assert a.sup_infinite and not a.inf_infinite
    assert a.t_inf == pytest.approx(0.0, abs=1 / 32 ** 2)
    assert a.contains(ParaPoint(1.5, 0.9)) and not a.contains(ParaPoint(1.0, -0.5))


def test_accessible_capped_stops_at_cap():
    d = capped(1.0)
    a = accessible_set(d, ParaPoint(1.0, 0.0), "forward")
    assert not a.sup_infinite
    assert abs(a.t_sup - 1.0) <= d.ht


def test_accessible_detour_around_bubble():
    d = bubble(1.0, 0.5, 0.0, 0.25)
    lo, hi = ParaPoint(0.5, -0.5), ParaPoint(0.5, 0.5)
    fwd = accessible_set(d, lo, "forward")
    assert fwd.contains(hi)
    assert accessible_set(d, hi, "backward").contains(lo)
    assert not accessible_set(d, hi, "forward").contains(lo)


def test_accessible_both_and_errors():
    d = disk(0, 0, 1.0)
    both = accessible_set(d, ParaPoint(0, 0), "both")
    assert len(both) == int(d.occupancy.sum())
    with pytest.raises(PreconditionError):
        accessible_set(d, ParaPoint(1.5, 0.0))
    with pytest.raises(PreconditionError):
        accessible_set(d, ParaPoint(0, 0), "sideways")


def test_accessible_monotonicity():
    d = bubble(1.0, 0.5, 0.0, 0.25)
    rng = np.random.default_rng(4)
    s1 = ParaPoint(0.1, -1.0)
    a1 = accessible_set(d, s1, "forward")
    cells = np.argwhere(a1.mask)
    for j, i in cells[rng.choice(len(cells), 10, replace=False)]:
        s2 = ParaPoint(d.x0 + i * d.hx, d.t0 + j * d.ht)
        a2 = accessible_set(d, s2, "forward")
        assert not np.any(a2.mask & ~a1.mask)


def test_graphize_halfplane():
    dec = graphize(halfplane(), Box(-1, 1, -1, 1), 1 / 32)
    assert dec.verdict == "graph" and len(dec.components) == 1
    f, o = dec.components[0]
    assert o == 1 and np.all(np.abs(f.v) <= 1 / 32)
    assert dec.validated


def test_graphize_slab():
    dec = graphize(slab(1.0), Box(-1, 2, -1, 1), 1 / 32)
    assert dec.verdict == "slab"
    (f, of), (g, og) = sorted(dec.components, key=lambda c: c[1], reverse=True)
    assert of == 1 and og == -1
    assert np.all(np.abs(f.v) <= 1 / 32) and np.all(np.abs(g.v - 1) <= 1 / 32)
    assert dec.validated


def test_graphize_disk_witness():
    d = disk(0, 0, 1.0)
    dec = graphize(d)
    assert dec.verdict == "witness"
    p, q = sorted(dec.witness, key=lambda p: p.x)
    assert p.t == q.t and abs(p.t) <= d.hx
    assert p.x == pytest.approx(-1.0, abs=2 * d.hx) and q.x == pytest.approx(1.0, abs=2 * d.hx)
    lab = dec.labels
    jp, ip = d.cell_index(p.x + d.hx / 2, p.t)
    jq, iq = d.cell_index(q.x - d.hx / 2, q.t)
    assert lab[jp, ip] == lab[jq, iq] == dec.witness_component


def test_graphize_reassembles_sine():
    d = sine_graph(0.3)
    dec = graphize(d, Box(-2, 2, -2, 2), 1 / 32)
    assert dec.verdict == "graph" and dec.validated
    back = dec.reassemble()
    rng = np.random.default_rng(0)
    xs, ts = rng.uniform(-1.9, 1.9, 500), rng.uniform(-1.9, 1.9, 500)
    mism = back.contains(xs, ts) != d.contains(xs, ts)
    assert np.all(np.abs(xs[mism] - d.f(ts[mism])) <= 2 / 32)


def test_graphize_disconnected_is_precondition_error():
    g = grid_from_indicator(lambda x, t: (np.abs(x) > 0.5) & (np.abs(t) < 2), (-1, 1, -1, 1),
                            1 / 16)
    with pytest.raises(PreconditionError, match="not connected"):
        graphize(g)


def test_graphize_one_cell_neck_is_ambiguous():
    occ = np.zeros((40, 20), bool)
    occ[:10, 2:18] = True
    occ[10:30, 9] = True  # two blobs joined by a channel one cell wide
    occ[30:, 2:18] = True
    g = DomainModel.grid(occ, 0.5 / 8, 0.5 / 64, 1 / 8)
    with pytest.raises(AmbiguityError, match="slice t="):
        graphize(g)


@pytest.mark.parametrize("dom, window, scales, nta_type, verdict", [
    (halfplane(), ParaCylinder(ParaPoint(0, 0), 1.0), [0.25, 0.5], NtaCertificate, "graph"),
    (sine_graph(0.3), ParaCylinder(ParaPoint(0, 0), 1.0), [0.25, 0.5], NtaCertificate, "graph"),
    (disk(0, 0, 1.0), ParaCylinder(ParaPoint(0, 0), 1.2), [1 / 16, 1 / 8], NtaRefutation,
     "witness"),
])
def test_consistency_examples(dom, window, scales, nta_type, verdict):
    rep = theorem_consistency_check(dom, window, NtaParams(), scales)
    assert isinstance(rep.nta, nta_type)
    assert rep.verdict == verdict
    assert rep.consistent
    assert isinstance(rep.decomposition, GraphDecomposition)
