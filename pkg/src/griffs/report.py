"""Deterministic JSON/CSV serialization and a minimal SVG line chart."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Mapping, Sequence

from .stats import DatasetStats

DECIMALS = 6


def fmt_real(x: float) -> str:
    return f"{x:.{DECIMALS}f}"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with insertion-ordered keys and every real printed with 6 decimals."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return "null" if not math.isfinite(obj) else fmt_real(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (Mapping, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else fmt_real(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def stats_table(stats: Mapping[str, DatasetStats]) -> str:
    """Two-decimal summary in the layout of a griff statistics table."""
    reps = list(stats)
    lines = [["Griff Representation", *(r.capitalize() for r in reps)],
             ["Total Griff Types", *(str(stats[r].types) for r in reps)],
             ["Average Griff Occurrence Count",
              *("-" if stats[r].avg_occurrence is None else f"{float(stats[r].avg_occurrence):.2f}"
                for r in reps)]]
    widths = [max(len(row[i]) for row in lines) for i in range(len(lines[0]))]
    out = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in lines]
    first = next(iter(stats.values()), None)
    if first is not None:
        pct = first.percentages
        out.append(f"bass-only griffs filtered: {first.filtered_bass_only} ({pct['bass_only']:.1f}%)")
        out.append(f"empty griffs filtered: {first.filtered_empty} ({pct['empty']:.1f}%)")
    return "\n".join(out) + "\n"


_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
            "#7f7f7f", "#bcbd22", "#17becf"]


def svg_lines(series: Mapping[str, Sequence[tuple[float, float]]], title: str = "",
              width: int = 640, height: int = 400) -> str:
    """Polyline chart of ``(x, y)`` series with y in [0, 1]."""
    margin = 40
    xmax = max((x for pts in series.values() for x, _ in pts), default=1) or 1
    sx = (width - 2 * margin) / xmax
    sy = height - 2 * margin
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
             f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>']
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    for n, (label, pts) in enumerate(series.items()):
        color = _PALETTE[n % len(_PALETTE)]
        coords = " ".join(f"{margin + x * sx:.2f},{height - margin - y * sy:.2f}" for x, y in pts)
        parts.append(f'<polyline fill="none" stroke="{color}" points="{coords}"/>')
        parts.append(f'<text x="{width - margin + 4}" y="{margin + 14 * n}" font-size="10" '
                     f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
