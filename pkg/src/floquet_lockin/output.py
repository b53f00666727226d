"""CSV, JSON and SVG artifacts. Every file is written atomically (temp file + rename)."""

from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .maps import TongueMap
from .pendulum import StabilityPoint
from .winkler import CriticalLoadResult

__all__ = [
    "atomic_write",
    "sha256_file",
    "write_tonguemap_csv",
    "read_tonguemap_csv",
    "result_to_dict",
    "write_result_json",
    "render_heatmap_svg",
    "write_mode_csv",
]

#: Channels whose natural range is the folded fraction interval.
FRACTION_CHANNELS = ("locked_fraction", "max_im_fraction")


@contextlib.contextmanager
def atomic_write(path, mode="w"):
    """Open a temporary sibling of ``path`` and rename it into place on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, encoding=None if "b" in mode else "utf-8", newline="" if "b" not in mode else None) as fh:
            yield fh
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_tonguemap_csv(tmap: TongueMap, path) -> None:
    """Header ``x,y,<channels...>``; one row per cell, y-major then x; 17 significant digits."""
    names = list(tmap.channels)
    with atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", *names])
        for iy, y in enumerate(tmap.y):
            for ix, x in enumerate(tmap.x):
                w.writerow([_fmt(x), _fmt(y), *(_fmt(tmap.channels[n][iy, ix]) for n in names)])


def read_tonguemap_csv(path, x_label="x", y_label="y") -> TongueMap:
    """Inverse of :func:`write_tonguemap_csv` (labels and metadata are not stored)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[:2] != ["x", "y"]:
        raise ParameterError(f"{path}: not a tongue-map CSV (header {header[:2]})")
    data = np.array([[float(v) for v in r] for r in body]).reshape(-1, len(header))
    xs = list(dict.fromkeys(data[:, 0]))
    ys = list(dict.fromkeys(data[:, 1]))
    shape = (len(ys), len(xs))
    channels = {n: data[:, 2 + i].reshape(shape) for i, n in enumerate(header[2:])}
    return TongueMap(np.array(xs), x_label, np.array(ys), y_label, channels)


def write_mode_csv(mode, path) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["xi", "real", "imag"])
        for x, v in zip(mode.xi, mode.values):
            w.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag)])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    return obj


def result_to_dict(result) -> dict:
    """JSON-ready dict with a fixed key order for results of the analysis modules."""
    if isinstance(result, CriticalLoadResult):
        d = {
            "kind": "winkler-critical",
            "K_bar": result.K_bar,
            "lambda_bar": result.lambda_bar,
            "P_bar_cr": result.P_bar_cr,
            "P_cr_ratio": result.P_cr_ratio,
            "classification": result.classification.tag.value,
            "locked_fraction": result.locked_fraction,
            "degenerate": result.degenerate,
            "critical_exponents": [e.value for e in result.critical_exponents],
            "diagnostics": result.diagnostics,
        }
    elif isinstance(result, StabilityPoint):
        d = {
            "kind": "pendulum-point",
            "T_bar_over_2pi": result.T_bar_over_2pi,
            "A_bar": result.A_bar,
            "C_bar": result.C_bar,
            "max_re": result.max_re,
            "max_im_fraction": result.max_im_fraction,
            "classification": result.classification.tag.value,
            "locked_fraction": result.classification.locked_fraction,
            "stable": result.stable,
        }
    elif isinstance(result, dict):
        d = result
    else:
        raise TypeError(f"cannot serialise {type(result).__name__}")
    return _clean(d)


def write_result_json(result, path) -> None:
    text = json.dumps(result_to_dict(result), indent=2, allow_nan=False)
    with atomic_write(path) as fh:
        fh.write(text + "\n")


def _gray(t: float) -> str:
    g = int(round(255 * (1.0 - min(max(t, 0.0), 1.0))))
    return f"#{g:02x}{g:02x}{g:02x}"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_heatmap_svg(tmap: TongueMap, channel: str, path, vmin=None, vmax=None, cell_px=None) -> int:
    """Grayscale heatmap: ``vmin`` white, ``vmax`` black, NaN cells hatched.

    The range defaults to ``[0, 1/2]`` for fraction channels and to the channel's
    finite min/max otherwise. Returns the number of NaN cells drawn.
    """
    if channel not in tmap.channels:
        raise ParameterError(f"unknown channel '{channel}'; available: {list(tmap.channels)}")
    data = tmap.channels[channel]
    finite = data[np.isfinite(data)]
    if vmin is None:
        vmin = 0.0 if channel in FRACTION_CHANNELS else (float(finite.min()) if finite.size else 0.0)
    if vmax is None:
        vmax = 0.5 if channel in FRACTION_CHANNELS else (float(finite.max()) if finite.size else 1.0)
    span = vmax - vmin

    ny, nx = data.shape
    plot_w, plot_h = 480.0, 360.0
    left, top, right, bottom = 80.0, 40.0, 110.0, 60.0
    cw, ch = plot_w / nx, plot_h / ny
    width, height = left + plot_w + right, top + plot_h + bottom

    out = io.StringIO()
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="sans-serif" font-size="12">\n'
    )
    out.write(
        '<defs><pattern id="nan" width="6" height="6" patternUnits="userSpaceOnUse">'
        '<rect width="6" height="6" fill="#ff00ff"/>'
        '<path d="M0,6 L6,0" stroke="#000000" stroke-width="1"/></pattern></defs>\n'
    )
    out.write(f'<text x="{left + plot_w / 2:.1f}" y="24" text-anchor="middle">{_esc(channel)}</text>\n')
    out.write('<g shape-rendering="crispEdges">\n')
    nan_count = 0
    for iy in range(ny):
        y0 = top + plot_h - (iy + 1) * ch
        for ix in range(nx):
            v = data[iy, ix]
            if np.isfinite(v):
                fill = _gray((v - vmin) / span if span > 0 else 0.0)
            else:
                fill = "url(#nan)"
                nan_count += 1
            out.write(
                f'<rect x="{left + ix * cw:.3f}" y="{y0:.3f}" width="{cw:.3f}" height="{ch:.3f}" fill="{fill}"/>\n'
            )
    out.write("</g>\n")
    out.write(
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>\n'
    )
    # ticks at the axis ends
    for frac, xv in ((0.0, tmap.x[0]), (1.0, tmap.x[-1])):
        out.write(
            f'<text x="{left + frac * plot_w:.1f}" y="{top + plot_h + 16:.1f}" '
            f'text-anchor="middle">{xv:.6g}</text>\n'
        )
    for frac, yv in ((0.0, tmap.y[0]), (1.0, tmap.y[-1])):
        out.write(
            f'<text x="{left - 6:.1f}" y="{top + plot_h - frac * plot_h + 4:.1f}" '
            f'text-anchor="end">{yv:.6g}</text>\n'
        )
    out.write(
        f'<text x="{left + plot_w / 2:.1f}" y="{height - 16:.1f}" text-anchor="middle">{_esc(tmap.x_label)}</text>\n'
    )
    out.write(
        f'<text x="20" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {top + plot_h / 2:.1f})">{_esc(tmap.y_label)}</text>\n'
    )
    # legend
    lx = left + plot_w + 30
    for k in range(32):
        t = k / 31
        out.write(
            f'<rect x="{lx:.1f}" y="{top + plot_h - (k + 1) * plot_h / 32:.3f}" width="16" '
            f'height="{plot_h / 32:.3f}" fill="{_gray(t)}"/>\n'
        )
    out.write(f'<rect x="{lx:.1f}" y="{top}" width="16" height="{plot_h}" fill="none" stroke="#000000"/>\n')
    out.write(f'<text x="{lx + 22:.1f}" y="{top + plot_h:.1f}">{vmin:.4g}</text>\n')
    out.write(f'<text x="{lx + 22:.1f}" y="{top + 10:.1f}">{vmax:.4g}</text>\n')
    out.write("</svg>\n")
    with atomic_write(path) as fh:
        fh.write(out.getvalue())
    return nan_count
