"""Named built-in domains and the key-value domain spec file format.

A spec file looks like::

    # comment
    variant = graph
    orientation = +1
    builtin = sin(0.3, 1)
    window = -4 4 -40 40
    resolution = 0.01

Explicit boundaries use repeated ``knot_f = t value`` / ``knot_g = t value``
lines; explicit grids use ``row = j start:stop start:stop ...`` run-length
lines (``start`` inclusive, ``stop`` exclusive column indices).  Floats are
written with ``repr`` so ``parse_spec(format_spec(s)) == s``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SpecParseError
from .geometry import Box, DomainModel, SampledFunction

GRAPH_BUILTINS = {"halfplane", "line", "sin", "sqrtcusp", "ramp"}
SLAB_BUILTINS = {"slab"}
GRID_BUILTINS = {"disk", "ellipse", "holed", "bubble", "snowflake", "capped"}

DEFAULT_WINDOWS = {
    "halfplane": (-4.0, 4.0, -16.0, 16.0),
    "line": (-4.0, 4.0, -4.0, 4.0),
    "sin": (-4.0, 4.0, -40.0, 40.0),
    "sqrtcusp": (-4.0, 8.0, -16.0, 16.0),
    "ramp": (-4.0, 12.0, -4.0, 4.0),
    "slab": (-4.0, 5.0, -16.0, 16.0),
    "disk": (-2.0, 2.0, -2.0, 2.0),
    "ellipse": (-2.0, 2.0, -2.0, 2.0),
    "holed": (-1.0, 3.0, -1.5, 1.5),
    "bubble": (-0.5, 2.5, -1.5, 1.5),
    "snowflake": (-1.5, 1.5, -1.5, 1.5),
    "capped": (-1.0, 3.0, -1.0, 1.5),
}

_BUILTIN_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


@dataclass
class DomainSpec:
    variant: str
    window: tuple
    resolution: float
    orientation: int = 1
    builtin: str | None = None
    knots_f: list = field(default_factory=list)
    knots_g: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    grid_shape: tuple | None = None


def parse_builtin(text):
    m = _BUILTIN_RE.match(text)
    if not m:
        raise SpecParseError(f"cannot parse builtin {text!r}")
    name, argtext = m.group(1), m.group(2)
    args = []
    if argtext and argtext.strip():
        try:
            args = [float(a) for a in argtext.split(",")]
        except ValueError as exc:
            raise SpecParseError(f"bad builtin arguments {argtext!r}") from exc
    if name not in GRAPH_BUILTINS | SLAB_BUILTINS | GRID_BUILTINS:
        raise SpecParseError(f"unknown builtin {name!r}")
    return name, args


def builtin_variant(name):
    if name in GRAPH_BUILTINS:
        return "graph"
    if name in SLAB_BUILTINS:
        return "slab"
    return "grid"


# --------------------------------------------------------------------------
# builtin constructors


def _uniform_knots(t_min, t_max, spacing):
    n = max(2, int(math.ceil((t_max - t_min) / spacing)) + 1)
    return np.linspace(t_min, t_max, n)


def halfplane(window=DEFAULT_WINDOWS["halfplane"]):
    x0, x1, t0, t1 = window
    return DomainModel.graph(SampledFunction([t0, t1], [0.0, 0.0]), (x0, x1), name="halfplane")


def line(a, window=DEFAULT_WINDOWS["line"]):
    x0, x1, t0, t1 = window
    return DomainModel.graph(SampledFunction([t0, t1], [a * t0, a * t1]), (x0, x1),
                             name=f"line({a:g})")


def sine_graph(a, omega=1.0, window=DEFAULT_WINDOWS["sin"], spacing=0.01):
    x0, x1, t0, t1 = window
    t = _uniform_knots(t0, t1, min(spacing, spacing / max(omega, 1e-12)))
    return DomainModel.graph(SampledFunction(t, a * np.sin(omega * t)), (x0, x1),
                             name=f"sin({a:g},{omega:g})")


def sqrt_cusp(a, window=DEFAULT_WINDOWS["sqrtcusp"], per_octave=8, depth=60):
    """``x > a |t|**(1/2)`` with knots at ``0`` and ``+-2**(j/per_octave)``.

    The knot set is invariant under ``t -> 4t`` away from its ends, so the
    piecewise-linear model is exactly self-similar under dyadic blowups.
    """
    x0, x1, t0, t1 = window
    top = max(abs(t0), abs(t1))
    j_max = int(math.ceil(per_octave * math.log2(top)))
    pos = 2.0 ** (np.arange(-depth * per_octave, j_max + 1) / per_octave)
    t = np.concatenate([-pos[::-1], [0.0], pos])
    t = t[(t >= t0) & (t <= t1)]
    t = np.unique(np.concatenate([[t0], t, [t1]]))
    return DomainModel.graph(SampledFunction(t, a * np.sqrt(np.abs(t))), (x0, x1),
                             name=f"sqrtcusp({a:g})")


def ramp(height, t_start, t_stop, window=DEFAULT_WINDOWS["ramp"]):
    """Flat, then a linear climb of ``height`` over ``[t_start, t_stop]``, then flat."""
    x0, x1, t0, t1 = window
    t = np.array([t0, t_start, t_stop, t1])
    v = np.array([0.0, 0.0, height, height])
    return DomainModel.graph(SampledFunction(t, v), (x0, x1),
                             name=f"ramp({height:g},{t_start:g},{t_stop:g})")


def slab(w, window=DEFAULT_WINDOWS["slab"]):
    x0, x1, t0, t1 = window
    f = SampledFunction([t0, t1], [0.0, 0.0])
    g = SampledFunction([t0, t1], [w, w])
    return DomainModel.slab(f, g, (x0, x1), name=f"slab({w:g})")


def _grid_lattice(window, hx):
    box = Box(*window)
    ht = hx * hx
    nx = int(math.floor(box.x_width / hx))
    nt = int(math.floor(box.t_width / ht))
    x0 = box.x_min + hx / 2
    t0 = box.t_min + ht / 2
    xs = x0 + hx * np.arange(nx)
    ts = t0 + ht * np.arange(nt)
    return xs, ts, x0, t0


def grid_from_indicator(indicator, window, hx, name=""):
    """Rasterize ``indicator(X, T) -> bool array`` at cell centres."""
    xs, ts, x0, t0 = _grid_lattice(window, hx)
    occ = indicator(xs[None, :], ts[:, None])
    occ = np.broadcast_to(occ, (ts.size, xs.size))
    return DomainModel.grid(occ, x0, t0, hx, name=name)


def disk(cx, ct, radius, window=DEFAULT_WINDOWS["disk"], hx=1 / 32):
    return grid_from_indicator(lambda x, t: (x - cx) ** 2 + (t - ct) ** 2 < radius ** 2,
                               window, hx, name=f"disk({cx:g},{ct:g},{radius:g})")


def ellipse(cx, ct, ax, at, window=DEFAULT_WINDOWS["ellipse"], hx=1 / 32):
    return grid_from_indicator(lambda x, t: ((x - cx) / ax) ** 2 + ((t - ct) / at) ** 2 < 1,
                               window, hx, name=f"ellipse({cx:g},{ct:g},{ax:g},{at:g})")


def holed(a, radius, window=DEFAULT_WINDOWS["holed"], hx=1 / 32):
    """Half-plane ``x > 0`` minus the closed disk of ``radius`` at ``(a, 0)``."""
    return grid_from_indicator(lambda x, t: (x > 0) & ((x - a) ** 2 + t ** 2 > radius ** 2),
                               window, hx, name=f"holed({a:g},{radius:g})")


def bubble(w, cx, ct, radius, window=DEFAULT_WINDOWS["bubble"], hx=1 / 32):
    """Slab ``0 < x < w`` minus the closed disk at ``(cx, ct)``."""
    return grid_from_indicator(
        lambda x, t: (x > 0) & (x < w) & ((x - cx) ** 2 + (t - ct) ** 2 > radius ** 2),
        window, hx, name=f"bubble({w:g},{cx:g},{ct:g},{radius:g})")


def capped(t_cap, window=DEFAULT_WINDOWS["capped"], hx=1 / 32):
    """``{x > 0} ∩ {t < t_cap}``: a domain with a hard time ceiling."""
    return grid_from_indicator(lambda x, t: (x > 0) & (t < t_cap), window, hx,
                               name=f"capped({t_cap:g})")


def koch_polygon(level, radius=1.0):
    """Vertices of a Koch snowflake inscribed in a circle of ``radius``."""
    ang = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    pts = [radius * np.array([np.cos(a), np.sin(a)]) for a in ang]
    pts.append(pts[0])
    for _ in range(int(level)):
        new = []
        for p, q in zip(pts[:-1], pts[1:]):
            d = (q - p) / 3
            a, b = p + d, p + 2 * d
            rot = np.array([[0.5, math.sqrt(3) / 2], [-math.sqrt(3) / 2, 0.5]])
            peak = a + rot @ d
            new.extend([p, a, peak, b])
        new.append(pts[-1])
        pts = new
    return np.array(pts)


def _points_in_polygon(poly, x, t):
    x, t = np.broadcast_arrays(x, t)
    inside = np.zeros(x.shape, dtype=bool)
    px, pt = poly[:, 0], poly[:, 1]
    for k in range(len(poly) - 1):
        xa, ta, xb, tb = px[k], pt[k], px[k + 1], pt[k + 1]
        crosses = (ta > t) != (tb > t)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = xa + (t - ta) * (xb - xa) / (tb - ta)
        inside ^= crosses & (x < xint)
    return inside


def snowflake(level, radius=1.0, window=DEFAULT_WINDOWS["snowflake"], hx=1 / 32):
    poly = koch_polygon(level, radius)
    return grid_from_indicator(lambda x, t: _points_in_polygon(poly, x, t), window, hx,
                               name=f"snowflake({int(level)},{radius:g})")


def build_builtin(name, args, window, resolution):
    try:
        if name == "halfplane":
            return halfplane(window)
        if name == "line":
            return line(*args, window=window)
        if name == "sin":
            return sine_graph(*args, window=window, spacing=resolution)
        if name == "sqrtcusp":
            return sqrt_cusp(*args, window=window)
        if name == "ramp":
            return ramp(*args, window=window)
        if name == "slab":
            return slab(*args, window=window)
        grid_builders = {"disk": disk, "ellipse": ellipse, "holed": holed, "bubble": bubble,
                         "snowflake": snowflake, "capped": capped}
        return grid_builders[name](*args, window=window, hx=resolution)
    except TypeError as exc:
        raise SpecParseError(f"wrong number of arguments for builtin {name!r}") from exc


# --------------------------------------------------------------------------
# spec files


def _fmt(x):
    return repr(float(x))


def format_spec(spec: DomainSpec) -> str:
    lines = ["# parabolic-nta domain spec",
             f"variant = {spec.variant}",
             f"orientation = {'+1' if spec.orientation > 0 else '-1'}"]
    if spec.builtin:
        lines.append(f"builtin = {spec.builtin}")
    lines.append("window = " + " ".join(_fmt(v) for v in spec.window))
    lines.append(f"resolution = {_fmt(spec.resolution)}")
    if spec.grid_shape is not None:
        lines.append(f"grid_shape = {spec.grid_shape[0]} {spec.grid_shape[1]}")
    for t, v in spec.knots_f:
        lines.append(f"knot_f = {_fmt(t)} {_fmt(v)}")
    for t, v in spec.knots_g:
        lines.append(f"knot_g = {_fmt(t)} {_fmt(v)}")
    for j, runs in spec.rows:
        lines.append(f"row = {j} " + " ".join(f"{a}:{b}" for a, b in runs))
    return "\n".join(lines) + "\n"


def parse_spec(text: str) -> DomainSpec:
    values = {}
    knots_f, knots_g, rows = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line_ = raw.split("#", 1)[0].strip()
        if not line_:
            continue
        if "=" not in line_:
            raise SpecParseError("expected 'key = value'", lineno)
        key, val = (s.strip() for s in line_.split("=", 1))
        try:
            if key == "knot_f":
                t, v = val.split()
                knots_f.append((float(t), float(v)))
            elif key == "knot_g":
                t, v = val.split()
                knots_g.append((float(t), float(v)))
            elif key == "row":
                parts = val.split()
                runs = [tuple(int(s) for s in p.split(":")) for p in parts[1:]]
                rows.append((int(parts[0]), runs))
            elif key in ("variant", "orientation", "builtin", "window", "resolution",
                         "grid_shape"):
                if key in values:
                    raise SpecParseError(f"duplicate key {key!r}", lineno)
                values[key] = (val, lineno)
            else:
                raise SpecParseError(f"unknown key {key!r}", lineno)
        except ValueError as exc:
            raise SpecParseError(f"bad value for {key!r}: {val!r}", lineno) from exc

    def need(key):
        if key not in values:
            raise SpecParseError(f"missing key {key!r}")
        return values[key]

    variant, vline = need("variant")
    if variant not in ("graph", "slab", "grid"):
        raise SpecParseError(f"unknown variant {variant!r}", vline)
    builtin = values.get("builtin", (None, None))[0]
    if builtin is not None:
        name, _ = parse_builtin(builtin)
        if builtin_variant(name) != variant:
            raise SpecParseError(f"builtin {name!r} is a {builtin_variant(name)} domain",
                                 values["builtin"][1])
    orient_txt, oline = values.get("orientation", ("+1", None))
    if orient_txt not in ("+1", "1", "-1"):
        raise SpecParseError("orientation must be +1 or -1", oline)
    if "window" in values:
        wtxt, wline = values["window"]
        try:
            window = tuple(float(v) for v in wtxt.split())
        except ValueError as exc:
            raise SpecParseError("window needs four numbers", wline) from exc
        if len(window) != 4:
            raise SpecParseError("window needs four numbers", wline)
    elif builtin is not None:
        window = DEFAULT_WINDOWS[parse_builtin(builtin)[0]]
    else:
        raise SpecParseError("missing key 'window'")
    if "resolution" in values:
        rtxt, rline = values["resolution"]
        try:
            resolution = float(rtxt)
        except ValueError as exc:
            raise SpecParseError("resolution must be a number", rline) from exc
    else:
        resolution = 1 / 32 if variant == "grid" else 0.01
    grid_shape = None
    if "grid_shape" in values:
        grid_shape = tuple(int(v) for v in values["grid_shape"][0].split())
    spec = DomainSpec(variant=variant, window=window, resolution=resolution,
                      orientation=-1 if orient_txt == "-1" else 1, builtin=builtin,
                      knots_f=knots_f, knots_g=knots_g, rows=rows, grid_shape=grid_shape)
    if builtin is None:
        if variant in ("graph", "slab") and len(knots_f) < 2:
            raise SpecParseError("explicit graph needs at least two knot_f lines")
        if variant == "slab" and len(knots_g) < 2:
            raise SpecParseError("explicit slab needs at least two knot_g lines")
        if variant == "grid" and grid_shape is None:
            raise SpecParseError("explicit grid needs grid_shape")
    return spec


def load_spec(path) -> DomainSpec:
    return parse_spec(Path(path).read_text())


def build_domain(spec: DomainSpec) -> DomainModel:
    if spec.builtin is not None:
        name, args = parse_builtin(spec.builtin)
        dom = build_builtin(name, args, spec.window, spec.resolution)
        if spec.orientation < 0:
            if dom.variant != "graph":
                raise SpecParseError("orientation -1 is only meaningful for graphs")
            dom = dom.reflected()
        return dom
    x0, x1, t0, t1 = spec.window
    if spec.variant == "graph":
        t, v = zip(*spec.knots_f)
        return DomainModel.graph(SampledFunction(t, v), (x0, x1), orientation=spec.orientation)
    if spec.variant == "slab":
        f = SampledFunction(*zip(*spec.knots_f))
        g = SampledFunction(*zip(*spec.knots_g))
        return DomainModel.slab(f, g, (x0, x1))
    hx = spec.resolution
    occ = np.zeros(spec.grid_shape, dtype=bool)
    for j, runs in spec.rows:
        for a, b in runs:
            occ[j, a:b] = True
    return DomainModel.grid(occ, x0 + hx / 2, t0 + hx * hx / 2, hx)


def spec_from_domain(dom: DomainModel) -> DomainSpec:
    """Explicit (non-builtin) spec that rebuilds ``dom`` exactly."""
    w = dom.window.as_tuple()
    if dom.variant == "graph":
        return DomainSpec("graph", w, 0.0, dom.orientation,
                          knots_f=list(zip(dom.f.t.tolist(), dom.f.v.tolist())))
    if dom.variant == "slab":
        return DomainSpec("slab", w, 0.0, knots_f=list(zip(dom.f.t.tolist(), dom.f.v.tolist())),
                          knots_g=list(zip(dom.g.t.tolist(), dom.g.v.tolist())))
    rows = []
    occ = dom.occupancy
    for j in range(occ.shape[0]):
        padded = np.concatenate([[False], occ[j], [False]]).astype(np.int8)
        edges = np.flatnonzero(np.diff(padded))
        runs = [(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]
        if runs:
            rows.append((j, runs))
    return DomainSpec("grid", w, dom.hx, rows=rows, grid_shape=occ.shape)
