"""Deterministic CSV, SVG and JSON emission for sweep results.

Floats are written with repr, which round-trips exactly through float(), so
re-parsing a CSV reproduces the table bit for bit and identical runs produce
identical files.  The SVG is hand-assembled (fixed viewport, log-log scatter,
fitted line) so outputs stay diffable without a plotting dependency.
"""

from __future__ import annotations

import json
import math
import os

from .run import RateFit, RunResult, SweepPoint

CSV_HEADER = "param_name,param_value,t,error,fit_included,wall_ms"

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 72, 24, 44, 56  # margins
_FLOOR = 1e-16  # display clamp for zero errors on the log axis


def format_row(row: SweepPoint) -> str:
    return ",".join(
        [
            row.param_name,
            repr(row.param_value),
            repr(row.t),
            repr(row.error),
            "true" if row.fit_included else "false",
            repr(row.wall_ms),
        ]
    )


def write_csv(rows, path: str) -> None:
    lines = [CSV_HEADER]
    lines.extend(format_row(r) for r in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_csv(path: str) -> list[SweepPoint]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header in {path}")
    rows = []
    for ln in lines[1:]:
        name, value, t, error, included, wall = ln.split(",")
        rows.append(
            SweepPoint(
                param_name=name,
                param_value=float(value),
                t=float(t),
                error=float(error),
                fit_included=included == "true",
                wall_ms=float(wall),
            )
        )
    return rows


def _ticks(lo: float, hi: float, n: int = 4) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _svg_header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="15">{title}</text>',
    ]


def render_svg(rows, fit: RateFit | None, title: str, seed: int, note: str) -> str:
    """Log-log scatter of error against the sweep parameter, with fit line."""
    if not rows:
        parts = _svg_header(title)
        parts.append(
            f'<text x="{_W / 2:.1f}" y="{_H / 2:.1f}" text-anchor="middle" '
            f'font-family="monospace" font-size="13">no data</text>'
        )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"
    xs = [math.log10(r.param_value) for r in rows]
    ys = [math.log10(max(r.error, _FLOOR)) for r in rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x_pad = 0.06 * (x_hi - x_lo)
    y_pad = 0.08 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x: float) -> float:
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(y: float) -> float:
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    param = rows[0].param_name if rows else "x"
    parts = _svg_header(title)
    # axes
    parts.append(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
        f'stroke="black" stroke-width="1"/>'
    )
    for tx in _ticks(x_lo + x_pad, x_hi - x_pad):
        parts.append(
            f'<line x1="{px(tx):.2f}" y1="{_H - _MB}" x2="{px(tx):.2f}" '
            f'y2="{_H - _MB + 5}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px(tx):.2f}" y="{_H - _MB + 20}" text-anchor="middle" '
            f'font-family="monospace" font-size="11">{10.0 ** tx:.3g}</text>'
        )
    for ty in _ticks(y_lo + y_pad, y_hi - y_pad):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(ty):.2f}" x2="{_ML}" y2="{py(ty):.2f}" '
            f'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{py(ty) + 4:.2f}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{10.0 ** ty:.3g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 16}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">{param}</text>'
    )
    parts.append(
        f'<text x="18" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'font-family="monospace" font-size="12" '
        f'transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.1f})">error</text>'
    )
    # fitted line under the points
    if fit is not None:
        xa, xb = x_lo + x_pad, x_hi - x_pad
        ya = fit.slope * xa + fit.intercept
        yb = fit.slope * xb + fit.intercept
        parts.append(
            f'<line x1="{px(xa):.2f}" y1="{py(ya):.2f}" x2="{px(xb):.2f}" '
            f'y2="{py(yb):.2f}" stroke="#d62728" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MR}" y="{_MT - 8}" text-anchor="end" '
            f'font-family="monospace" font-size="12">slope = {fit.slope:.3f}, '
            f'R^2 = {fit.r_squared:.4f}</text>'
        )
    else:
        parts.append(
            f'<text x="{_W - _MR}" y="{_MT - 8}" text-anchor="end" '
            f'font-family="monospace" font-size="12">no fit ({note})</text>'
        )
    for r, x, y in zip(rows, xs, ys):
        parts.append(
            f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" fill="#1f77b4"/>'
        )
    parts.append(
        f'<text x="{_ML}" y="{_MT - 8}" font-family="monospace" '
        f'font-size="12">seed {seed}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_summary(result: RunResult, path: str) -> None:
    fit = None
    if result.fit is not None:
        fit = {
            "slope": result.fit.slope,
            "intercept_log10": result.fit.intercept,
            "r_squared": result.fit.r_squared,
            "n_points": result.fit.n_points,
        }
    payload = {
        "meta": result.meta,
        "fit": fit,
        "rows": [
            {
                "param_name": r.param_name,
                "param_value": r.param_value,
                "t": r.t,
                "error": r.error,
                "fit_included": r.fit_included,
                "wall_ms": r.wall_ms,
            }
            for r in result.rows
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit(result: RunResult, out_dir: str, basename: str, title: str, seed: int) -> dict:
    """Write CSV + SVG + JSON into out_dir; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, f"{basename}.csv"),
        "svg": os.path.join(out_dir, f"{basename}.svg"),
        "json": os.path.join(out_dir, f"{basename}.json"),
    }
    write_csv(result.rows, paths["csv"])
    svg = render_svg(result.rows, result.fit, title, seed, result.fit_note)
    with open(paths["svg"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    write_summary(result, paths["json"])
    return paths
