"""Artifact writers: CSV tables, structured text, field snapshots, SVG plots, run manifest.

Every artifact starts with (or, for SVG, embeds) the manifest hash, a SHA-256
over the command, the resolved configuration, the domain spec and the
library versions.  Wall time is recorded in ``manifest.json`` but is not part
of the hash, so identical runs produce byte-identical artifacts.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402


def versions():
    import numba
    import scipy

    return {"parabolic_nta": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "matplotlib": matplotlib.__version__,
            "python": platform.python_version()}


def manifest_hash(command: str, config: dict, spec_text: str) -> str:
    payload = json.dumps({"command": command, "config": config, "spec": spec_text,
                          "versions": versions()}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


class Reporter:
    """Writes the artifacts of one run into ``out_dir``."""

    def __init__(self, out_dir, command, config, spec_text):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.config = config
        self.spec_text = spec_text
        self.hash = manifest_hash(command, config, spec_text)
        self.written = []

    def _path(self, name):
        p = self.out / name
        self.written.append(name)
        return p

    def csv(self, name, header, rows, comments=()):
        buf = io.StringIO()
        buf.write(f"# manifest: {self.hash}\n")
        for c in comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
        self._path(name).write_text(buf.getvalue())

    def text(self, name, body: str):
        self._path(name).write_text(f"# manifest: {self.hash}\n{body.rstrip()}\n")

    def field(self, stem, fld):
        """Flat little-endian float64 values plus a key-value text header."""
        vals = np.ascontiguousarray(fld.values, dtype="<f8")
        self._path(stem + ".bin").write_bytes(vals.tobytes())
        b, w = fld.box, fld.window
        lines = [f"shape = {vals.shape[0]} {vals.shape[1]}", "dtype = float64 little-endian",
                 "layout = row-major, row j at t0 + j ht, column i at x0 + i hx",
                 f"x0 = {fld.x0!r}", f"t0 = {fld.t0!r}", f"hx = {fld.hx!r}", f"ht = {fld.ht!r}",
                 f"window = {w.x_min!r} {w.x_max!r} {w.t_min!r} {w.t_max!r}",
                 f"box = {b.x_min!r} {b.x_max!r} {b.t_min!r} {b.t_max!r}",
                 f"normalization = {fld.normalization!r}",
                 f"truncation_delta = {fld.truncation_delta!r}"]
        self.text(stem + ".hdr", "\n".join(lines))

    def svg(self, name, draw, title=""):
        """Static SVG; ``draw(ax)`` adds polylines and annotations."""
        with plt.rc_context({"svg.hashsalt": self.hash, "svg.fonttype": "none"}):
            fig, ax = plt.subplots(figsize=(6, 4.5))
            draw(ax)
            ax.set_title(title, fontsize=9)
            fig.text(0.01, 0.01, f"manifest {self.hash[:16]}", fontsize=6, color="0.5")
            fig.savefig(self._path(name), format="svg",
                        metadata={"Date": None, "Description": f"manifest {self.hash}"})
            plt.close(fig)

    def manifest(self, wall_time, exit_code, summary):
        doc = {"command": self.command, "config": self.config, "spec": self.spec_text,
               "versions": versions(), "manifest_hash": self.hash, "wall_time_s": wall_time,
               "exit_code": exit_code, "summary": summary, "artifacts": sorted(self.written)}
        (self.out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
