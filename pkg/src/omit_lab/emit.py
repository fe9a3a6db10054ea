"""Table and plot writers: CSV, JSON (with provenance), SVG, BMP."""
from __future__ import annotations

import base64
import csv
import io
import json
import math
import struct
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import InvalidParameterError, OutputError
from .sweep import SpectrumTable, SweepGrid, run_scenario, scenario_from_dict

COLUMNS = ("delta_norm", "re_eps_t", "im_eps_t", "re_t_pr", "im_t_pr", "abs_t_pr_sq")


def _records(obj):
    """Rows of floats in emission order; grids prepend the second-axis value."""
    if isinstance(obj, SpectrumTable):
        blocks = [(None, obj.rows)]
    elif isinstance(obj, SweepGrid):
        blocks = list(zip(obj.second_axis.values, obj.rows))
    else:
        raise InvalidParameterError(f"cannot emit object of type {type(obj).__name__}")
    out = []
    for second, rows in blocks:
        for x, r in zip(obj.axis, rows):
            t = r.T_pr
            rec = [float(x), r.eps_T.real, r.eps_T.imag, t.real, t.imag, t.real**2 + t.imag**2]
            out.append(rec if second is None else [float(second)] + rec)
    return out


def columns_for(obj):
    return (("second_axis",) if isinstance(obj, SweepGrid) else ()) + COLUMNS


def _open_for_write(path, overwrite, binary=False):
    path = Path(path)
    if path.exists() and not overwrite:
        raise OutputError(f"{path} exists; pass overwrite to replace it")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "wb" if binary else "w", newline=None if binary else "")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc


def emit_table(obj, fmt, path, overwrite=False):
    """Write a spectrum or grid as CSV (17 significant digits) or JSON."""
    if fmt not in ("csv", "json"):
        raise InvalidParameterError(f"table format must be csv or json, got {fmt!r}")
    cols = columns_for(obj)
    records = _records(obj)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for rec in records:
            w.writerow([f"{v:.17g}" for v in rec])
        payload = buf.getvalue()
    else:
        doc = {
            "kind": "grid" if isinstance(obj, SweepGrid) else "spectrum",
            "columns": {name: [rec[k] for rec in records] for k, name in enumerate(cols)},
            "provenance": obj.provenance,
        }
        if isinstance(obj, SweepGrid):
            doc["second_axis"] = {
                "kind": obj.second_axis.kind,
                "unit": obj.second_axis.unit,
                "values": list(obj.second_axis.values),
            }
        payload = json.dumps(doc, indent=1, allow_nan=False) + "\n"
    try:
        with _open_for_write(path, overwrite) as fh:
            fh.write(payload)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc


def read_table_json(path):
    with open(path) as fh:
        return json.load(fh)


def read_table_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [float(r[k]) for r in body] for k, name in enumerate(header)}


def regenerate(provenance, workers=None):
    """Recompute a table or grid from an embedded provenance block."""
    return run_scenario(scenario_from_dict(provenance["scenario"]), workers=workers)


# -- plots -------------------------------------------------------------------

_W, _H = 760, 480
_ML, _MR, _MT, _MB = 80, 30, 30, 60


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * abs(step):
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _frame(xlo, xhi, ylo, yhi, xlabel, ylabel):
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(x):
        return _ML + (x - xlo) / (xhi - xlo) * pw

    def sy(y):
        return _MT + ph - (y - ylo) / (yhi - ylo) * ph

    parts = [
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>'
    ]
    for t in _ticks(xlo, xhi):
        x = sx(t)
        parts.append(f'<line x1="{x:.2f}" y1="{_MT + ph}" x2="{x:.2f}" y2="{_MT + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{_MT + ph + 20}" font-size="12" text-anchor="middle">{t:g}</text>')
    for t in _ticks(ylo, yhi):
        y = sy(t)
        parts.append(f'<line x1="{_ML - 5}" y1="{y:.2f}" x2="{_ML}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">{t:g}</text>')
    parts.append(
        f'<text x="{_ML + pw / 2}" y="{_H - 15}" font-size="14" text-anchor="middle">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="20" y="{_MT + ph / 2}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 20 {_MT + ph / 2})">{escape(ylabel)}</text>'
    )
    return parts, sx, sy


def _svg(body):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def spectrum_svg(table: SpectrumTable):
    x = np.asarray(table.axis, dtype=float)
    re, im = table.absorption, table.dispersion
    ylo = float(min(re.min(), im.min()))
    yhi = float(max(re.max(), im.max()))
    pad = 0.05 * (yhi - ylo) if yhi > ylo else 1.0
    parts, sx, sy = _frame(float(x[0]), float(x[-1]), ylo - pad, yhi + pad,
                           "(delta - omega_m) / omega_m", "Re / Im eps_T")

    def pts(y):
        return " ".join(f"{sx(a):.3f},{sy(b):.3f}" for a, b in zip(x, y))

    parts.append(f'<polyline id="re" fill="none" stroke="black" stroke-width="1.5" points="{pts(re)}"/>')
    parts.append(
        f'<polyline id="im" fill="none" stroke="#1f5fbf" stroke-width="1.5" stroke-dasharray="6,4" points="{pts(im)}"/>'
    )
    lx, ly = _W - _MR - 150, _MT + 20
    parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="black" stroke-width="1.5"/>')
    parts.append(f'<text x="{lx + 36}" y="{ly + 4}" font-size="12">Re eps_T</text>')
    parts.append(
        f'<line x1="{lx}" y1="{ly + 18}" x2="{lx + 30}" y2="{ly + 18}" stroke="#1f5fbf" '
        'stroke-width="1.5" stroke-dasharray="6,4"/>'
    )
    parts.append(f'<text x="{lx + 36}" y="{ly + 22}" font-size="12">Im eps_T</text>')
    return _svg(parts)


def _diverging(v, vmax):
    """Blue (negative) through white to red (positive)."""
    t = 0.0 if vmax == 0 else max(-1.0, min(1.0, v / vmax))
    if t >= 0:
        return 255, int(round(255 * (1 - t))), int(round(255 * (1 - t)))
    return int(round(255 * (1 + t))), int(round(255 * (1 + t))), 255


def bmp_bytes(values):
    """24-bit uncompressed BMP; row 0 of ``values`` is the bottom image row."""
    values = np.asarray(values, dtype=float)
    h, w = values.shape
    vmax = float(np.max(np.abs(values))) if values.size else 0.0
    row_bytes = (3 * w + 3) & ~3
    pixels = bytearray()
    for j in range(h):
        row = bytearray()
        for v in values[j]:
            r, g, b = _diverging(float(v), vmax)
            row += bytes((b, g, r))
        row += b"\x00" * (row_bytes - 3 * w)
        pixels += row
    header = struct.pack("<2sIHHI", b"BM", 54 + len(pixels), 0, 0, 54)
    info = struct.pack("<IiiHHIIiiII", 40, w, h, 1, 24, 0, len(pixels), 2835, 2835, 0, 0)
    return header + info + bytes(pixels)


def grid_svg(grid: SweepGrid, bmp: bytes):
    x = np.asarray(grid.axis, dtype=float)
    vals = grid.second_axis.values
    ylo, yhi = vals[0], vals[-1]
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    label = "eta" if grid.second_axis.kind == "eta" else "phi (rad)"
    parts, sx, sy = _frame(float(x[0]), float(x[-1]), ylo, yhi, "(delta - omega_b) / omega_b", label)
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    data = base64.b64encode(bmp).decode("ascii")
    parts.insert(
        0,
        f'<image x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" preserveAspectRatio="none" '
        f'style="image-rendering:pixelated" href="data:image/bmp;base64,{data}"/>',
    )
    vmax = float(np.max(np.abs(grid.absorption)))
    parts.append(
        f'<text x="{_W - _MR}" y="{_MT - 10}" font-size="12" text-anchor="end">'
        f"Re eps_T: blue -{vmax:.3g}, white 0, red +{vmax:.3g}</text>"
    )
    return _svg(parts)


def emit_plot(obj, path, overwrite=False):
    """SVG line plot for spectra; BMP raster plus SVG wrapper for grids.

    For a grid the raster goes next to ``path`` with a ``.bmp`` suffix and is
    also embedded in the SVG so that file stands alone.
    """
    path = Path(path)
    if isinstance(obj, SpectrumTable):
        if len(obj.rows) == 0:
            raise InvalidParameterError("cannot plot an empty table")
        text = spectrum_svg(obj)
        with _open_for_write(path, overwrite) as fh:
            fh.write(text)
        return [path]
    if isinstance(obj, SweepGrid):
        if len(obj.rows) == 0 or len(obj.axis) == 0 or any(len(r) == 0 for r in obj.rows):
            raise InvalidParameterError("cannot plot an empty grid")
        bmp = bmp_bytes(obj.absorption)
        bmp_path = path.with_suffix(".bmp")
        text = grid_svg(obj, bmp)
        if not overwrite:
            for p in (path, bmp_path):
                if p.exists():
                    raise OutputError(f"{p} exists; pass overwrite to replace it")
        with _open_for_write(bmp_path, True, binary=True) as fh:
            fh.write(bmp)
        with _open_for_write(path, True) as fh:
            fh.write(text)
        return [path, bmp_path]
    raise InvalidParameterError(f"cannot plot object of type {type(obj).__name__}")
