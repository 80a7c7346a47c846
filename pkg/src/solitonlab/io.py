"""CSV / JSON / SVG output for experiment reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .experiments import ComparisonReport

FORMATS = ("csv", "json", "svg")


def package_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0.1.0"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, columns: dict) -> Path:
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: Path) -> dict:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        names = next(r)
        data = [[float(v) if v != "" else math.nan for v in row] for row in r]
    arr = np.array(data, dtype=float).reshape(len(data), len(names))
    return {n: arr[:, i] for i, n in enumerate(names)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_json(path: Path, payload: dict) -> Path:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def svg_plot(x: Sequence[float], series: dict, title: str = "", xlabel: str = "t",
             ylabel: str = "", width: int = 640, height: int = 360) -> str:
    """Line plot with one ``<polyline>`` per series."""
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")
    left, right, top, bottom = 64, 16, 32, 44
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.array([0.0])
    y_lo, y_hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x_lo, x_hi = float(x.min()), float(x.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return top + (y_hi - v) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
           f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" '
           f'font-size="12">{xlabel}</text>',
           f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {top + ph / 2:.1f})">{ylabel}</text>']
    for v, anchor, pos in ((x_lo, "start", left), (x_hi, "end", left + pw)):
        out.append(f'<text x="{pos:.1f}" y="{top + ph + 16}" text-anchor="{anchor}" '
                   f'font-size="11">{v:.4g}</text>')
    for v in (y_lo, y_hi):
        out.append(f'<text x="{left - 4}" y="{py(v) + 4:.1f}" text-anchor="end" '
                   f'font-size="11">{v:.4g}</text>')
    for i, (name, y) in enumerate(series.items()):
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        color = palette[i % len(palette)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{pts}"><title>{name}</title></polyline>')
        out.append(f'<text x="{left + pw - 4}" y="{top + 14 + 14 * i}" text-anchor="end" '
                   f'font-size="11" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _center_series(report: ComparisonReport) -> dict:
    s = {"a_pde": report["a_pde"], "a_eff": report["a_eff"]}
    if "a_newton" in report.columns:
        s["a_newton"] = report["a_newton"]
    return s


def emit(report: ComparisonReport, out_dir, formats: Iterable[str] = FORMATS,
         stem: Optional[str] = None, extra_meta: Optional[dict] = None) -> list:
    """Write ``report`` as ``<stem>.csv``, ``<stem>.json`` and SVG plots."""
    formats = list(formats)
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown output formats {bad}; choose from {FORMATS}")
    out_dir = Path(out_dir)
    stem = stem or report.meta.get("label", "report")
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            written.append(write_csv(out_dir / f"{stem}.csv", report.columns))
        if "json" in formats:
            meta = dict(report.meta)
            meta["version"] = package_version()
            meta.update(extra_meta or {})
            payload = {"meta": meta, "summary": report.summary, "columns": report.names}
            written.append(write_json(out_dir / f"{stem}.json", payload))
        if "svg" in formats:
            t = report["t"]
            p = out_dir / f"{stem}_center.svg"
            p.write_text(svg_plot(t, _center_series(report), f"{stem}: soliton centre",
                                  ylabel="a"))
            written.append(p)
            p = out_dir / f"{stem}_error.svg"
            p.write_text(svg_plot(t, {"h1_err": report["h1_err"], "w_h1": report["w_h1"]},
                                  f"{stem}: errors", ylabel="H1 norm"))
            written.append(p)
    except OSError as exc:
        raise OSError(f"could not write output under {out_dir}: {exc}") from exc
    return written


def emit_table(rows: list, out_dir, stem: str, formats: Iterable[str] = FORMATS,
               meta: Optional[dict] = None) -> list:
    """Write a list of flat dicts (same keys) as CSV and JSON."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    formats = list(formats)
    if "csv" in formats and rows:
        cols = {k: [r[k] for r in rows] for k in rows[0]}
        written.append(write_csv(out_dir / f"{stem}.csv", cols))
    if "json" in formats:
        m = dict(meta or {})
        m["version"] = package_version()
        written.append(write_json(out_dir / f"{stem}.json", {"meta": m, "rows": rows}))
    return written
