"""CSV / JSON / SVG writers. All writes are atomic (temp file + rename)."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path as FsPath

import numpy as np

from .fold import CSV_COLUMNS

SCHEMA_VERSION = 1

PATH_COLUMNS = ("s", "lambda", "functional", "sigma_N", "sigma_Nminus1", "gap", "proj", "xi",
                "alpha", "tau", "bound", "actual", "bound_weyl", "newton_iterations",
                "krylovs_per_newton")
TRACE_COLUMNS = ("iteration", "residual_norm")


def atomic_write_text(path, text: str) -> FsPath:
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> FsPath:
    return atomic_write_text(path, csv_text(header, rows))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        r = list(csv.reader(fh))
    return r[0], r[1:]


def jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats become strings or null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def json_text(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> FsPath:
    return atomic_write_text(path, json_text(obj))


# --- paths ----------------------------------------------------------------

def diagnostics_rows(path):
    return [p.diagnostics.to_row(p.s, p.lam) for p in path.points if p.diagnostics is not None]


def path_rows(path, problem):
    rows = []
    for p in path.points:
        d = p.diagnostics
        diag = ([d.sigma_N, d.sigma_Nminus1, d.gap, d.proj, d.xi, d.alpha, d.tau,
                 d.sigma_min_Fx_bound, d.sigma_min_Fx_actual, d.sigma_min_Fx_bound_weyl]
                if d is not None else [None] * 10)
        inner = p.newton_stats.get("gmres_iterations_per_step") or []
        kpn = float(np.mean(inner)) if inner else None
        rows.append([p.s, p.lam, problem.functional(p.u), *diag,
                     p.newton_stats.get("iterations"), kpn])
    return rows


def write_path_csv(path_, path, problem) -> FsPath:
    return write_csv(path_, PATH_COLUMNS, path_rows(path, problem))


def write_diagnostics_csv(path_, path) -> FsPath:
    return write_csv(path_, CSV_COLUMNS, diagnostics_rows(path))


def path_to_dict(path, problem) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "problem_id": path.problem_id,
        "problem": problem.describe(),
        "config": path.config_snapshot,
        "failure": path.failure,
        "points": [
            {
                "s": p.s,
                "lambda": p.lam,
                "functional": problem.functional(p.u),
                "u": p.u,
                "tangent": p.tangent,
                "diagnostics": p.diagnostics.to_dict() if p.diagnostics is not None else None,
                "newton": p.newton_stats,
            }
            for p in path.points
        ],
    }


def write_path_json(path_, path, problem) -> FsPath:
    return write_json(path_, path_to_dict(path, problem))


def newton_result_to_dict(result) -> dict:
    return {"schema_version": SCHEMA_VERSION, **result.summary()}


def write_trace_csv(path_, trace) -> FsPath:
    return write_csv(path_, TRACE_COLUMNS, trace.to_rows())


# --- svg -------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 12))
        t += step
    return out


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def svg_plot(series, *, title="", xlabel="", ylabel="", width=640, height=420, logy=False) -> str:
    """Line plot as an SVG string.

    ``series`` is a list of (label, xs, ys); None or non-finite y values
    break the polyline.
    """
    ml, mr, mt, mb = 70, 20, 40, 55
    pw, ph = width - ml - mr, height - mt - mb

    def ty(v):
        return math.log10(v) if logy else v

    xs_all, ys_all = [], []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if y is None or x is None:
                continue
            if not (math.isfinite(x) and math.isfinite(y)) or (logy and y <= 0):
                continue
            xs_all.append(x)
            ys_all.append(ty(y))
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{mt + ph}" x2="{X:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        lab = f"1e{t:g}" if logy else f"{t:g}"
        out.append(f'<line x1="{ml - 5}" y1="{Y:.2f}" x2="{ml}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y + 4:.2f}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        segs, cur = [], []
        for x, y in zip(xs, ys):
            ok = (y is not None and x is not None and math.isfinite(x) and math.isfinite(y)
                  and not (logy and y <= 0))
            if ok:
                cur.append(f"{px(x):.2f},{py(ty(y)):.2f}")
            elif cur:
                segs.append(cur)
                cur = []
        if cur:
            segs.append(cur)
        for seg in segs:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                out.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>')
            else:
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(seg)}"/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + 10}" y1="{ly - 4}" x2="{ml + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + 36}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path_, series, **kw) -> FsPath:
    return atomic_write_text(path_, svg_plot(series, **kw))
