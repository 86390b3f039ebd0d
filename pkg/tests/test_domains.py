import numpy as np
import pytest

from parabolic_nta import SpecParseError
from parabolic_nta.domains import (DEFAULT_WINDOWS, build_domain, bubble, disk, format_spec,
                                   holed, koch_polygon, load_spec, parse_builtin, parse_spec,
                                   ramp, slab, snowflake, spec_from_domain, sqrt_cusp)
from parabolic_nta.geometry import ParaPoint


def _same_domain(a, b):
    assert a.variant == b.variant
    assert a.window.as_tuple() == b.window.as_tuple()
    if a.is_grid:
        assert np.array_equal(a.occupancy, b.occupancy)
        assert (a.x0, a.t0, a.hx, a.ht) == (b.x0, b.t0, b.hx, b.ht)
    else:
        assert a.f == b.f and a.orientation == b.orientation
        if a.variant == "slab":
            assert a.g == b.g


@pytest.mark.parametrize("builtin", ["halfplane", "line(0.2)", "sin(0.3)", "sin(0.3,2)",
                                     "sqrtcusp(1)", "ramp(8,0.45,0.55)", "slab(1)",
                                     "disk(0,0,1)", "bubble(1,0.5,0,0.25)", "snowflake(1)"])
def test_builtin_spec_round_trip(builtin):
    name, _ = parse_builtin(builtin)
    variant = {"slab": "slab", "disk": "grid", "bubble": "grid", "snowflake": "grid"}.get(
        name, "graph")
    spec = parse_spec(f"variant = {variant}\nbuiltin = {builtin}\n")
    text = format_spec(spec)
    again = parse_spec(text)
    assert again == spec
    assert format_spec(again) == text
    _same_domain(build_domain(spec), build_domain(again))


@pytest.mark.parametrize("dom", [sqrt_cusp(1.0), slab(0.5), disk(0, 0, 0.5), ramp(2, 0, 1)])
def test_explicit_spec_round_trip(dom, tmp_path):
    spec = spec_from_domain(dom)
    path = tmp_path / "d.dom"
    path.write_text(format_spec(spec))
    _same_domain(build_domain(load_spec(path)), dom)


@pytest.mark.parametrize("text, line", [
    ("variant = graph\nwindow 0 1 2 3\n", 2),
    ("variant = graph\nbogus = 1\n", 2),
    ("variant = blob\n", 1),
    ("variant = graph\nwindow = 0 1\n", 2),
    ("variant = graph\nknot_f = 0\n", 2),
    ("variant = graph\nbuiltin = disk(0,0,1)\n", 2),
    ("variant = graph\norientation = 2\nbuiltin = halfplane\n", 2),
    ("variant = graph\nvariant = graph\n", 2),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(SpecParseError) as info:
        parse_spec(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_keys():
    with pytest.raises(SpecParseError, match="variant"):
        parse_spec("window = 0 1 0 1\n")
    with pytest.raises(SpecParseError, match="knot_f"):
        parse_spec("variant = graph\nwindow = 0 1 0 1\n")


def test_reflected_builtin():
    dom = build_domain(parse_spec("variant = graph\norientation = -1\nbuiltin = sin(0.3)\n"))
    assert dom.orientation == -1
    assert dom.contains_point(ParaPoint(-1.0, 0.0))


def test_grid_builtins_membership():
    d = disk(0, 0, 1.0)
    assert d.contains_point(ParaPoint(0.0, 0.0)) and not d.contains_point(ParaPoint(1.5, 0.0))
    h = holed(1.0, 0.3)
    assert h.contains_point(ParaPoint(0.2, 0.0)) and not h.contains_point(ParaPoint(1.0, 0.0))
    b = bubble(1.0, 0.5, 0.0, 0.25)
    assert b.contains_point(ParaPoint(0.1, 0.0)) and not b.contains_point(ParaPoint(0.5, 0.0))
    assert d.ht == d.hx ** 2


def test_sqrt_cusp_knots_are_dyadically_self_similar():
    f = sqrt_cusp(1.0).f
    inner = f.t[(np.abs(f.t) > 1e-6) & (np.abs(f.t) < 2)]
    assert np.all(np.isin(np.round(4 * inner, 12), np.round(f.t, 12)))
    assert np.allclose(f(inner), np.sqrt(np.abs(inner)))


def test_koch_polygon_and_snowflake():
    p0 = koch_polygon(0)
    p1 = koch_polygon(1)
    assert len(p1) - 1 == 4 * (len(p0) - 1)  # closed: first vertex repeated
    s = snowflake(2)
    assert s.contains_point(ParaPoint(0.0, 0.0))


def test_default_windows_cover_builtins():
    assert set(DEFAULT_WINDOWS) >= {"halfplane", "sin", "sqrtcusp", "slab", "disk", "snowflake"}
