"""Command-line front end.

``parabolic-nta <command> <domain> [--config FILE] [--set key=value ...] [-o DIR]``

``<domain>`` is a domain spec file, or a builtin such as ``sin(0.3)`` when no
such file exists.  Exit status: 0 completed, 2 refutation or violation found,
1 error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ParabolicError, PreconditionError, SpecParseError, WindowError
from .geometry import Box, ParaCylinder, ParaPoint

EXIT_OK, EXIT_ERROR, EXIT_FOUND = 0, 1, 2

COMMANDS = ("certify-nta", "graphize", "sigma", "ahlfors", "beta", "carleson", "bmo", "caloric",
            "kernel", "blowup", "corollary", "consistency")

# key -> (parser, default); list-valued keys are whitespace separated
_FLOATS = lambda s: [float(v) for v in s.replace(",", " ").split()]  # noqa: E731
CONFIG_KEYS = {
    "window": (_FLOATS, None),  # x_min x_max t_min t_max
    "cylinder": (_FLOATS, None),  # center_x center_t r
    "scales": (_FLOATS, None),
    "hx": (float, 1 / 64),
    "resolution": (float, None),
    "lambda": (float, 2.0),
    "gamma": (float, None),
    "c_gamma": (float, 10.0),
    "n_anchors": (int, 33),
    "n_pairs": (int, 8),
    "n_centers": (int, 9),
    "seed": (int, 0),
    "r_min": (float, None),
    "r_max": (float, None),
    "radii": (_FLOATS, None),
    "center_t": (float, 0.0),
    "thresholds": (_FLOATS, [0.05, 0.05, 0.05]),  # hausdorff weakstar flatness
    "margin": (float, 4.0),
    "delta": (float, None),
    "bound": (float, 7.0),
    "svg": (lambda s: s.lower() in ("1", "true", "yes", "on"), True),
}

_ARITY = {"window": 4, "cylinder": 3, "thresholds": 3}


def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecParseError("expected 'key = value'", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        _set(out, key, val, lineno)
    return out


def _set(cfg, key, val, lineno=None):
    if key not in CONFIG_KEYS:
        raise SpecParseError(f"unknown config key {key!r}", lineno)
    try:
        v = CONFIG_KEYS[key][0](val)
    except ValueError as exc:
        raise SpecParseError(f"bad value for {key!r}: {val!r}", lineno) from exc
    n = _ARITY.get(key)
    if n is not None and len(v) != n:
        raise SpecParseError(f"{key} needs {n} numbers, got {len(v)}", lineno)
    cfg[key] = v


def resolve_config(cfg: dict) -> dict:
    return {k: cfg.get(k, default) for k, (_, default) in CONFIG_KEYS.items()}


def load_domain(arg: str):
    from .domains import build_domain, builtin_variant, format_spec, parse_builtin, parse_spec

    p = Path(arg)
    if p.exists():
        text = p.read_text()
    else:
        try:
            name, _ = parse_builtin(arg)
            variant = builtin_variant(name)
        except (SpecParseError, KeyError, ValueError) as exc:
            raise SpecParseError(f"no spec file or builtin named {arg!r}") from exc
        text = f"variant = {variant}\nbuiltin = {arg}\n"
    spec = parse_spec(text)
    return build_domain(spec), format_spec(spec)


# --------------------------------------------------------------------------
# helpers


def _params(cfg):
    from .nta import NtaParams

    return NtaParams(cfg["lambda"], cfg["gamma"], cfg["c_gamma"])


def _scales(cfg, dom):
    """Configured scales, or dyadic scales up to a quarter of the window size (grids: >= 2 hx)."""
    if cfg["scales"]:
        return sorted(cfg["scales"])
    w = dom.window
    top = min(w.x_width / 2, math.sqrt(w.t_width / 2)) / 4
    top = 2.0 ** math.floor(math.log2(top))
    scales = [top / 8, top / 4, top / 2, top]
    if dom.is_grid:
        scales = [r for r in scales if r >= 2 * dom.hx]
    return scales


def _measure_cylinder(cfg, dom, R):
    """Cylinder whose sampled centres keep surface balls of radius ``R`` inside the window."""
    if cfg["cylinder"] or cfg["window"]:
        return _cylinder(cfg, dom, [R])
    w = dom.window
    c = ParaPoint((w.x_min + w.x_max) / 2, (w.t_min + w.t_max) / 2)
    half_x = w.x_width / 2 - 3 * R
    half_t = w.t_width / 2 - 2.05 * R * R  # nu reaches balls centred anywhere in the ball
    if half_x <= 0 or half_t <= 0:
        raise WindowError("model window too small for the requested scales")
    return ParaCylinder(c, min(half_x, math.sqrt(half_t)))


def _cylinder(cfg, dom, scales):
    from .nta import fit_window

    if cfg["cylinder"]:
        cx, ct, r = cfg["cylinder"]
        return ParaCylinder(ParaPoint(cx, ct), r)
    if cfg["window"]:
        x0, x1, t0, t1 = cfg["window"]
        c = ParaPoint((x0 + x1) / 2, (t0 + t1) / 2)
        return ParaCylinder(c, min((x1 - x0) / 2, math.sqrt((t1 - t0) / 2)))
    return fit_window(dom, scales)


def _box(cfg, default=(-1.0, 1.0, -1.0, 1.0)):
    return Box(*(cfg["window"] or default))


def _draw_boundary(ax, dom, box=None, **kw):
    box = box or dom.window
    if dom.is_grid:
        xs, ts = dom.grid_boundary
        keep = (xs >= box.x_min) & (xs <= box.x_max) & (ts >= box.t_min) & (ts <= box.t_max)
        ax.plot(xs[keep], ts[keep], ".", ms=1.5, color=kw.get("color", "k"))
        return
    for g in (dom.f, dom.g):
        if g is None:
            continue
        gg = g.restrict(max(box.t_min, g.t_min), min(box.t_max, g.t_max))
        ax.plot(gg.v, gg.t, lw=kw.get("lw", 1.0), color=kw.get("color", "k"),
                label=kw.get("label"))


def _labels(ax, x="x", t="t"):
    ax.set_xlabel(x)
    ax.set_ylabel(t)


def _pt(p):
    return f"({p.x!r}, {p.t!r})"


# --------------------------------------------------------------------------
# commands; each returns (exit code, summary dict)


def cmd_certify_nta(dom, cfg, rep):
    from .nta import NtaCertificate, certify_nta

    scales = _scales(cfg, dom)
    cyl = _cylinder(cfg, dom, scales)
    res = certify_nta(dom, cyl, scales, _params(cfg), n_anchors=cfg["n_anchors"],
                      n_pairs=cfg["n_pairs"], seed=cfg["seed"])
    failed = {}
    if not isinstance(res, NtaCertificate):
        for f in res.failures:
            if f.clause != "3":
                failed[(f.anchor, f.scale, f.clause)] = f
    rows = []
    for a in res.anchors:
        for r in res.scales:
            for clause in ("1", "2"):
                rows.append((a.x, a.t, r, clause, "fail" if (a, r, clause) in failed else "pass"))
    chain_fail = [] if isinstance(res, NtaCertificate) else [f for f in res.failures
                                                             if f.clause == "3"]
    for ch in res.chains:
        rows.append((ch.start.x, ch.start.t, float(np.max(ch.radii)), "3", "pass"))
    for f in chain_fail:
        rows.append((f.anchor.x, f.anchor.t, f.scale, "3", "fail"))
    rep.csv("nta.csv", ["anchor_x", "anchor_t", "scale", "clause", "result"], rows)

    p = res.params
    lines = [f"result = {'certificate' if res.ok else 'refutation'}",
             f"lambda = {p.lam!r}", f"gamma = {p.gamma!r}", f"c_gamma = {p.c_gamma!r}",
             f"cylinder = {_pt(cyl.center)} r={cyl.r!r}",
             "scales = " + " ".join(repr(s) for s in res.scales),
             f"anchors = {len(res.anchors)}"]
    if res.ok:
        lines.append(f"c_gamma_found = {res.c_gamma_found!r}")
    else:
        lines += [f"clause = {res.clause}", f"anchor = {_pt(res.anchor)}", f"scale = {res.scale!r}",
                  f"direction = {res.direction}", f"side = {res.side}",
                  f"detail = {res.detail}", f"exhaustiveness = {res.exhaustiveness}",
                  f"failures = {len(res.failures)}"]
    lines.append("[witnesses]  anchor scale direction side point distance")
    for w in res.witnesses:
        lines.append(f"{_pt(w.anchor)} {w.scale!r} {w.direction} {w.side} {_pt(w.point)} "
                     f"{w.distance!r}")
    lines.append("[chains]  start end eps c_gamma then one 'Y s r' line per cylinder")
    for ch in res.chains:
        lines.append(f"chain {_pt(ch.start)} {_pt(ch.end)} {ch.eps!r} {ch.c_gamma!r}")
        lines += [f"  {y!r} {s!r} {r!r}" for (y, s), r in zip(ch.centers.tolist(),
                                                             ch.radii.tolist())]
    rep.text("certificate.txt" if res.ok else "refutation.txt", "\n".join(lines))

    if cfg["svg"]:
        def draw(ax):
            _draw_boundary(ax, dom, cyl.box())
            ax.plot([a.x for a in res.anchors], [a.t for a in res.anchors], "o", ms=2,
                    color="tab:blue")
            wp = [w.point for w in res.witnesses if w.side == "interior"]
            ax.plot([q.x for q in wp], [q.t for q in wp], "+", ms=3, color="tab:green")
            if not res.ok:
                ax.plot([res.anchor.x], [res.anchor.t], "x", ms=8, color="tab:red")
                ax.annotate(f"clause {res.clause}", (res.anchor.x, res.anchor.t), fontsize=7)
            _labels(ax)
        rep.svg("nta.svg", draw, f"{'certificate' if res.ok else 'refutation'} ({dom.name})")
    summary = {"result": "certificate" if res.ok else "refutation",
               "clause": None if res.ok else res.clause}
    return (EXIT_OK if res.ok else EXIT_FOUND), summary


def cmd_graphize(dom, cfg, rep):
    from .boundary import graphize

    box = Box(*cfg["window"]) if cfg["window"] else None
    dec = graphize(dom, box, cfg["resolution"])
    rows = []
    for k, (g, o) in enumerate(dec.components):
        rows += [(k, o, t, v) for t, v in zip(g.t.tolist(), g.v.tolist())]
    rep.csv("components.csv", ["component", "orientation", "t", "x"], rows)
    lines = [f"verdict = {dec.verdict}", f"components = {dec.n_components}",
             f"validated = {dec.validated}"]
    if dec.witness is not None:
        p, q = dec.witness
        lines += [f"witness_component = {dec.witness_component}",
                  f"witness = {_pt(p)} {_pt(q)}"]
        rep.text("witness.txt", "\n".join(lines))
    else:
        rep.text("decomposition.txt", "\n".join(lines))
    if cfg["svg"]:
        def draw(ax):
            _draw_boundary(ax, dec.grid, color="0.6")
            for k, (g, _) in enumerate(dec.components):
                ax.plot(g.v, g.t, lw=1, label=f"component {k}")
            if dec.witness is not None:
                p, q = dec.witness
                ax.plot([p.x, q.x], [p.t, q.t], "o-", color="tab:red", ms=3)
                ax.annotate("same-time pair", (p.x, p.t), fontsize=7)
            _labels(ax)
        rep.svg("graphize.svg", draw, f"graphize: {dec.verdict}")
    found = dec.verdict == "witness"
    return (EXIT_FOUND if found else EXIT_OK), {"verdict": dec.verdict}


def _measure_rows(dom, cfg, with_nu):
    from .geometry import boundary_sample
    from .measure import SurfaceBall, gamma_beta, nu_mass, sigma_of_ball

    scales = _scales(cfg, dom)
    cyl = _measure_cylinder(cfg, dom, max(scales))
    centers = boundary_sample(dom, cyl, cfg["n_centers"])
    r_min = cfg["r_min"] or min(scales) / 16
    if dom.is_grid:
        r_min = max(r_min, 2 * dom.hx)
    rows = []
    for c in centers:
        for r in scales:
            s = sigma_of_ball(dom, SurfaceBall(c, r))
            g = gamma_beta(dom, c, r)
            nu = nu_mass(dom, c, r, r_min) / (r * r) if with_nu and r > r_min else float("nan")
            rows.append((c.x, c.t, r, s, g, nu))
    return rows, cyl


MEASURE_HEADER = ["center_x", "center_t", "r", "sigma", "gamma", "nu_ratio"]


def _measure_svg(rep, rows, col, name, title):
    def draw(ax):
        rs = sorted({r[2] for r in rows})
        for r in rs:
            sel = [row for row in rows if row[2] == r]
            ax.plot([row[1] for row in sel], [row[col] for row in sel], lw=1, label=f"r={r:g}")
        ax.legend(fontsize=6)
        _labels(ax, "center t", MEASURE_HEADER[col])
    rep.svg(name, draw, title)


def cmd_sigma(dom, cfg, rep):
    rows, _ = _measure_rows(dom, cfg, with_nu=True)
    rep.csv("sigma.csv", MEASURE_HEADER, rows)
    if cfg["svg"]:
        _measure_svg(rep, rows, 3, "sigma.svg", "surface measure of surface balls")
    return EXIT_OK, {"balls": len(rows)}


def cmd_beta(dom, cfg, rep):
    rows, _ = _measure_rows(dom, cfg, with_nu=True)
    rep.csv("beta.csv", MEASURE_HEADER, rows)
    if cfg["svg"]:
        _measure_svg(rep, rows, 4, "beta.svg", "beta numbers")
    return EXIT_OK, {"max_gamma": max(r[4] for r in rows)}


def cmd_ahlfors(dom, cfg, rep):
    from .measure import ahlfors_check

    scales = _scales(cfg, dom)
    cyl = _measure_cylinder(cfg, dom, max(scales))
    res = ahlfors_check(dom, cyl, scales, n_centers=cfg["n_centers"])
    bad = {(c, R) for c, R, _ in res.violations}
    rep.csv("ahlfors.csv", ["center_x", "center_t", "r", "sigma", "lower", "ratio", "result"],
            [(c.x, c.t, R, s, (R / 2) ** 2, s / (R * R), "fail" if (c, R) in bad else "pass")
             for c, R, s in res.rows])
    if cfg["svg"]:
        def draw(ax):
            for R in scales:
                sel = [row for row in res.rows if row[1] == R]
                ax.plot([c.t for c, _, _ in sel], [s / R ** 2 for _, _, s in sel], lw=1,
                        label=f"R={R:g}")
            ax.axhline(0.25, color="tab:red", lw=0.8, ls="--")
            ax.legend(fontsize=6)
            _labels(ax, "center t", "sigma / R^2")
        rep.svg("ahlfors.svg", draw, "Ahlfors ratios")
    return (EXIT_OK if res.lower_ok else EXIT_FOUND), {"best_m": res.best_m,
                                                       "violations": len(res.violations)}


def cmd_carleson(dom, cfg, rep):
    from .measure import carleson_norm

    r_max = cfg["r_max"] or max(_scales(cfg, dom))
    r_min = cfg["r_min"] or r_max / 16
    if dom.is_grid:
        r_min = max(r_min, 2 * dom.hx)
    cyl = _measure_cylinder(cfg, dom, r_max)
    est = carleson_norm(dom, cyl, r_min, r_max, n_centers=cfg["n_centers"])
    rep.csv("carleson.csv", ["center_x", "center_t", "R", "nu_mass", "ratio"],
            [(c.x, c.t, R, m, q) for c, R, m, q in est.boxes])
    rep.csv("carleson_profile.csv", ["R", "sup_ratio"], est.vanishing_profile)
    if cfg["svg"]:
        def draw(ax):
            R, q = zip(*est.vanishing_profile)
            ax.plot(R, q, "o-", lw=1)
            ax.set_xscale("log", base=2)
            _labels(ax, "R", "sup nu / R^2")
        rep.svg("carleson.svg", draw, f"Carleson norm {est.norm_plus:.4g}")
    return EXIT_OK, {"norm_plus": est.norm_plus}


def cmd_bmo(dom, cfg, rep):
    from .measure import HALF_DERIV_CONST, bmo_norm, dyadic_windows, half_time_derivative

    if dom.variant != "graph":
        raise PreconditionError("bmo needs a graph domain")
    f = dom.f
    lo, hi = (cfg["window"][2], cfg["window"][3]) if cfg["window"] else (f.t_min / 2, f.t_max / 2)
    radii = _scales(cfg, dom)
    g = half_time_derivative(f, f.t[(f.t > lo) & (f.t < hi)])
    res = bmo_norm(g, dyadic_windows(g.t_min, g.t_max, radii))
    rep.csv("half_derivative.csv", ["t", "d_half"], zip(g.t.tolist(), g.v.tolist()),
            comments=[f"D_t^(1/2) f(t) = c * integral (f(t) - f(s)) |t - s|^(-3/2) ds, "
                      f"c = 1/(2 sqrt(2 pi)) = {HALF_DERIV_CONST!r}"])
    rep.csv("bmo.csv", ["tau", "r", "mean", "oscillation"], res.window_averages)
    rep.csv("bmo_profile.csv", ["r", "sup_oscillation"], res.vmo_profile)
    if cfg["svg"]:
        def draw(ax):
            ax.plot(g.t, g.v, lw=0.8)
            _labels(ax, "t", "half time derivative")
        rep.svg("bmo.svg", draw, f"BMO* norm {res.norm_star:.4g}")
    return EXIT_OK, {"norm_star": res.norm_star}


def _solve(dom, cfg):
    from .caloric import estimate_poisson_kernel, solve_green_infinity

    box = _box(cfg)
    try:
        fld = solve_green_infinity(dom, box, cfg["hx"], margin=cfg["margin"],
                                   truncation_check=True)
    except WindowError:  # doubled margins leave the model window
        fld = solve_green_infinity(dom, box, cfg["hx"], margin=cfg["margin"])
    prof = estimate_poisson_kernel(fld, dom, cfg["delta"])
    return box, fld, prof


def _kernel_svg(rep, prof, title):
    def draw(ax):
        ax.plot(prof.t, prof.h, lw=1)
        ax.axhline(1.0, color="0.6", lw=0.6, ls="--")
        _labels(ax, "t", "h")
    rep.svg("kernel.svg", draw, title)


def cmd_caloric(dom, cfg, rep):
    from .caloric import bump_suite, weak_identity_residual

    box, fld, prof = _solve(dom, cfg)
    rep.field("field", fld)
    rep.csv("kernel.csv", ["t", "h"], zip(prof.t.tolist(), prof.h.tolist()))
    rows = []
    if dom.variant == "graph":
        rows = [(phi.name, weak_identity_residual(fld, prof, phi, dom), fld.hx)
                for phi in bump_suite()]
    rep.csv("residuals.csv", ["phi", "residual", "hx"], rows)
    if cfg["svg"]:
        def draw(ax):
            cs = ax.contour(fld.xs, fld.ts, fld.values, levels=12, linewidths=0.6)
            ax.clabel(cs, fontsize=5)
            _draw_boundary(ax, dom, box)
            ax.set_xlim(box.x_min, box.x_max)
            ax.set_ylim(box.t_min, box.t_max)
            _labels(ax)
        rep.svg("caloric.svg", draw, "Green function level sets")
        _kernel_svg(rep, prof, "Poisson kernel")
    return EXIT_OK, {"max_residual": max((r[1] for r in rows), default=None),
                     "truncation_delta": fld.truncation_delta}


def cmd_kernel(dom, cfg, rep):
    _, fld, prof = _solve(dom, cfg)
    rep.csv("kernel.csv", ["t", "h"], zip(prof.t.tolist(), prof.h.tolist()))
    if cfg["svg"]:
        _kernel_svg(rep, prof, "Poisson kernel")
    return EXIT_OK, {"h_min": float(prof.h.min()), "h_max": float(prof.h.max())}


def cmd_blowup(dom, cfg, rep):
    from .blowup import Thresholds, _solve_window, blowup_sequence
    from .caloric import estimate_poisson_kernel, solve_green_infinity

    if dom.variant != "graph":
        raise PreconditionError("blowups need a graph domain")
    tau = cfg["center_t"]
    center = ParaPoint(float(dom.f(tau)), tau)
    box = Box(*cfg["window"]) if cfg["window"] else _solve_window(
        dom, Box(center.x - 1, center.x + 1, tau - 1, tau + 1))
    radii = sorted(cfg["radii"] or [2.0 ** -k for k in range(2, 7)], reverse=True)
    hx = min(cfg["hx"], radii[-1] / 2)  # the parent must resolve the smallest surface ball
    fld = solve_green_infinity(dom, box, hx, margin=cfg["margin"])
    prof = estimate_poisson_kernel(fld, dom)
    rep_ = blowup_sequence(dom, fld, prof, center, radii, Thresholds(*cfg["thresholds"]))
    rep.csv("blowup.csv", ["i", "r", "hausdorff", "weakstar", "flatness"],
            [(h[0], h[1], h[2], w[2], f[2])
             for h, w, f in zip(rep_.hausdorff, rep_.weakstar, rep_.flatness)])
    rep.csv("blowup_steps.csv", ["i", "r", "prefactor", "sigma_unit", "omega_unit",
                                 "omega_unit_normalized", "kernel_average", "resolved"],
            [(s.index, s.r, s.prefactor, s.sigma_unit, s.omega_unit, s.omega_unit_normalized,
              s.kernel_average, s.resolved) for s in rep_.steps])
    rep.text("verdict.txt", f"verdict = {rep_.verdict}\nnote = {rep_.note}")
    if cfg["svg"]:
        def draw(ax):
            unit = Box(-1, 1, -1, 1)
            for s in rep_.steps:
                _draw_boundary(ax, s.dom, unit, color=None, label=f"r={s.r:g}")
            ax.axvline(0.0, color="0.5", ls="--", lw=0.6)
            ax.set_xlim(-1, 1)
            ax.set_ylim(-1, 1)
            ax.legend(fontsize=6)
            _labels(ax)
        rep.svg("blowup.svg", draw, f"rescaled boundaries, verdict {rep_.verdict}")
    return EXIT_OK, {"verdict": rep_.verdict}


def cmd_corollary(dom, cfg, rep):
    from .measure import AhlforsViolation, corollary_witness

    if dom.variant != "graph":
        raise PreconditionError("corollary needs a graph domain")
    res = corollary_witness(dom.f, cfg["bound"])
    if not isinstance(res, AhlforsViolation):
        rep.text("corollary.txt", f"result = lipschitz\nconstant = {res.constant!r}\n"
                                  f"bound = {res.bound!r}")
        return EXIT_OK, {"result": "lipschitz", "constant": res.constant}
    rep.csv("violation.csv", ["level", "t", "x", "rho", "sigma", "lower"],
            [(i + 1, b.center.t, b.center.x, b.r, s, res.lower)
             for i, (b, s) in enumerate(zip(res.balls, res.sigmas))])
    rep.text("corollary.txt", "\n".join([
        f"result = {'violation' if res.violated else 'inconclusive'}",
        f"pair = {res.pair[0]!r} {res.pair[1]!r}", f"rho = {res.rho!r}",
        f"ball = {_pt(res.ball.center)} r={res.ball.r!r}", f"sigma = {res.sigma!r}",
        f"lower = {res.lower!r}", f"total = {res.total!r}"] + [f"note = {n}" for n in res.notes]))
    if cfg["svg"]:
        def draw(ax):
            s, t = res.pair
            g = dom.f.restrict(max(dom.f.t_min, s - res.rho ** 2), min(dom.f.t_max, t + res.rho ** 2))
            ax.plot(g.v, g.t, lw=1, color="k")
            for b in res.balls:
                ax.add_patch(_rect(b))
            _labels(ax)
        rep.svg("corollary.svg", draw, "level-crossing surface balls")
    return (EXIT_FOUND if res.violated else EXIT_OK), {"result": "violation" if res.violated
                                                       else "inconclusive"}


def _rect(ball):
    from matplotlib.patches import Rectangle

    c, r = ball.center, ball.r
    return Rectangle((c.x - r, c.t - r * r), 2 * r, 2 * r * r, fill=False, lw=0.6,
                     color="tab:red")


def cmd_consistency(dom, cfg, rep):
    from .boundary import theorem_consistency_check

    scales = _scales(cfg, dom)
    cyl = _cylinder(cfg, dom, scales)
    res = theorem_consistency_check(dom, cyl, _params(cfg), scales, cfg["resolution"],
                                    seed=cfg["seed"])
    nta = "certificate" if res.certified else f"refutation clause {res.nta.clause}"
    rep.csv("consistency.csv", ["domain", "nta", "decomposition", "consistent"],
            [(dom.name or dom.variant, nta, res.verdict, res.consistent)])
    if cfg["svg"]:
        def draw(ax):
            _draw_boundary(ax, dom, cyl.box())
            _labels(ax)
        rep.svg("consistency.svg", draw, f"{nta}; {res.verdict}")
    return (EXIT_OK if res.consistent else EXIT_FOUND), {"nta": nta, "decomposition": res.verdict,
                                                         "consistent": res.consistent}


HANDLERS = {"certify-nta": cmd_certify_nta, "graphize": cmd_graphize, "sigma": cmd_sigma,
            "ahlfors": cmd_ahlfors, "beta": cmd_beta, "carleson": cmd_carleson, "bmo": cmd_bmo,
            "caloric": cmd_caloric, "kernel": cmd_kernel, "blowup": cmd_blowup,
            "corollary": cmd_corollary, "consistency": cmd_consistency}


# --------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="parabolic-nta",
                                 description="Parabolic NTA verification toolkit for R^2.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("domain", help="domain spec file or builtin, e.g. 'sin(0.3)'")
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key")
        sp.add_argument("-o", "--out", default="out", help="output directory")
    return ap


def run(command: str, domain: str, config: dict, out_dir) -> int:
    """Run one subcommand and write its artifacts; returns the exit code."""
    from .report import Reporter

    start = time.perf_counter()
    dom, spec_text = load_domain(domain)
    cfg = resolve_config(config)
    rep = Reporter(out_dir, command, cfg, spec_text)
    code, summary = HANDLERS[command](dom, cfg, rep)
    rep.manifest(time.perf_counter() - start, code, summary)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text()) if args.config else {}
        for item in args.set:
            if "=" not in item:
                raise SpecParseError(f"--set expects key=value, got {item!r}")
            k, v = item.split("=", 1)
            _set(cfg, k.strip(), v.strip())
        return run(args.command, args.domain, cfg, args.out)
    except (ParabolicError, OSError) as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
