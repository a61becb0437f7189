"""Static SVG figures written next to the CSV outputs: indicator lines over
years and Phillips/Okun scatters with fitted lines. Pure string assembly,
no plotting dependency."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

WIDTH, HEIGHT, PAD = 720, 440, 60

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _scale(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        hi = lo + 1.0
    margin = 0.05 * (hi - lo)
    return lo - margin, hi + margin


def _svg_header(title: str) -> list[str]:
    return [
        f'<svg width="{WIDTH}" height="{HEIGHT}" '
        'xmlns="http://www.w3.org/2000/svg">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" font-family="sans-serif" '
        f'font-size="16" text-anchor="middle">{title}</text>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" '
        f'y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" '
        'stroke="black"/>',
    ]


def _axes_ticks(x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> list[str]:
    parts = []
    for i in range(5):
        yv = y_lo + (y_hi - y_lo) * i / 4.0
        y = HEIGHT - PAD - (HEIGHT - 2 * PAD) * i / 4.0
        parts.append(f'<line x1="{PAD}" y1="{y:.1f}" x2="{WIDTH - PAD}" '
                     f'y2="{y:.1f}" stroke="#ddd" stroke-dasharray="4"/>')
        parts.append(f'<text x="{PAD - 6}" y="{y + 4:.1f}" font-family="sans-serif" '
                     f'font-size="11" text-anchor="end">{yv:.3g}</text>')
        xv = x_lo + (x_hi - x_lo) * i / 4.0
        x = PAD + (WIDTH - 2 * PAD) * i / 4.0
        parts.append(f'<text x="{x:.1f}" y="{HEIGHT - PAD + 18}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'text-anchor="middle">{xv:.3g}</text>')
    return parts


def _project(x, y, x_lo, x_hi, y_lo, y_hi):
    px = PAD + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * PAD)
    py = HEIGHT - PAD - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * PAD)
    return px, py


def line_chart(path: Path, title: str, xs: Sequence[float],
               series: dict[str, Sequence[float]]) -> None:
    """Write a multi-series line chart; series maps label -> y values."""
    all_y = [v for ys in series.values() for v in ys if math.isfinite(v)]
    if not all_y or not xs:
        return
    x_lo, x_hi = _scale(xs)
    y_lo, y_hi = _scale(all_y)
    parts = _svg_header(title)
    parts.extend(_axes_ticks(x_lo, x_hi, y_lo, y_hi))
    for idx, (label, ys) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        points = " ".join(
            "{:.1f},{:.1f}".format(*_project(x, y, x_lo, x_hi, y_lo, y_hi))
            for x, y in zip(xs, ys) if math.isfinite(y))
        parts.append(f'<polyline points="{points}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<rect x="{WIDTH - 180}" y="{40 + 18 * idx}" width="12" '
                     f'height="12" fill="{color}"/>')
        parts.append(f'<text x="{WIDTH - 162}" y="{50 + 18 * idx}" '
                     f'font-family="sans-serif" font-size="12">{label}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts))


def scatter_chart(path: Path, title: str, xs: Sequence[float],
                  ys: Sequence[float], slope: float | None = None,
                  x_label: str = "", y_label: str = "") -> None:
    """Write a scatter plot with an optional fitted line through the means."""
    if not xs:
        return
    x_lo, x_hi = _scale(xs)
    y_lo, y_hi = _scale(ys)
    parts = _svg_header(title)
    parts.extend(_axes_ticks(x_lo, x_hi, y_lo, y_hi))
    for x, y in zip(xs, ys):
        px, py = _project(x, y, x_lo, x_hi, y_lo, y_hi)
        parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="4" '
                     'fill="#1f77b4" fill-opacity="0.7"/>')
    if slope is not None:
        mx = sum(xs) / len(xs)
        my = sum(ys) / len(ys)
        y0 = my + slope * (x_lo - mx)
        y1 = my + slope * (x_hi - mx)
        p0 = _project(x_lo, y0, x_lo, x_hi, y_lo, y_hi)
        p1 = _project(x_hi, y1, x_lo, x_hi, y_lo, y_hi)
        parts.append(f'<line x1="{p0[0]:.1f}" y1="{p0[1]:.1f}" '
                     f'x2="{p1[0]:.1f}" y2="{p1[1]:.1f}" stroke="#d62728" '
                     'stroke-width="2"/>')
    if x_label:
        parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 14}" '
                     f'font-family="sans-serif" font-size="13" '
                     f'text-anchor="middle">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="18" y="{HEIGHT / 2}" font-family="sans-serif" '
                     f'font-size="13" text-anchor="middle" '
                     f'transform="rotate(-90 18,{HEIGHT / 2})">{y_label}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts))


def write_figures(out_dir: Path, months: Sequence[dict], report: dict) -> None:
    """Standard figure set for one run."""
    out_dir.mkdir(parents=True, exist_ok=True)
    annual = report.get("annual", [])
    years = [r["year"] for r in annual]
    if years:
        line_chart(out_dir / "unemployment.svg", "Annual mean unemployment",
                   years, {"unemployment": [r["unemployment_mean"] for r in annual]})
        line_chart(out_dir / "nominal_gdp.svg", "Annual nominal GDP",
                   years, {"nominal GDP": [r["nominal_gdp"] for r in annual]})
        infl_years = [r["year"] for r in annual if r["inflation"] is not None]
        if infl_years:
            line_chart(out_dir / "inflation.svg", "Annual inflation", infl_years,
                       {"inflation": [r["inflation"] for r in annual
                                      if r["inflation"] is not None]})
        growth_years = [r["year"] for r in annual
                        if r["nominal_gdp_growth"] is not None]
        if growth_years:
            line_chart(out_dir / "gdp_growth.svg", "Nominal GDP growth",
                       growth_years,
                       {"growth": [r["nominal_gdp_growth"] for r in annual
                                   if r["nominal_gdp_growth"] is not None]})
    reg = report.get("regularity", {})
    if "phillips" in reg:
        u = [r["unemployment_mean"] for r in annual[1:]]
        wi = [r["wage_inflation"] for r in annual[1:]]
        scatter_chart(out_dir / "phillips.svg",
                      f"Phillips: rho={reg['phillips']['rho']:.3f}",
                      u, wi, reg["phillips"]["slope"],
                      "annual mean unemployment", "annual wage inflation")
        du = [annual[i]["unemployment_mean"] - annual[i - 1]["unemployment_mean"]
              for i in range(1, len(annual))]
        rg = [(annual[i]["real_gdp"] - annual[i - 1]["real_gdp"])
              / annual[i - 1]["real_gdp"] for i in range(1, len(annual))]
        scatter_chart(out_dir / "okun.svg",
                      f"Okun: rho={reg['okun']['rho']:.3f}",
                      du, rg, reg["okun"]["slope"],
                      "change in unemployment", "real GDP growth")
