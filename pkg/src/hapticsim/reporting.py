"""Session artifacts: stroke SVG rendering and JSON summaries.

The SVG keeps polyline points in raw board coordinates (meters) and
lets the viewBox do the scaling, with a y-flip so board-up appears
screen-up.  Coordinates are written with shortest round-trip float
formatting, so any consumer that parses them back gets bit-identical
doubles and can compare strokes against live session data exactly.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

SVG_MARGIN_M = 0.01
SVG_STROKE_WIDTH_M = 0.003
SVG_PIXELS_PER_M = 4000.0


def _fmt(x: float) -> str:
    return repr(float(x))


def strokes_to_svg(segments: list[np.ndarray]) -> str:
    """Render board-plane stroke segments as a standalone SVG document."""
    pts = [np.asarray(s, dtype=float) for s in segments if len(s) > 0]
    if pts:
        allp = np.vstack(pts)
        lo = allp.min(axis=0) - SVG_MARGIN_M
        hi = allp.max(axis=0) + SVG_MARGIN_M
    else:
        lo = np.array([-SVG_MARGIN_M, -SVG_MARGIN_M])
        hi = np.array([SVG_MARGIN_M, SVG_MARGIN_M])
    width = float(hi[0] - lo[0])
    height = float(hi[1] - lo[1])
    # y-flip: viewBox y spans [-max_v, -min_v], points drawn at (u, -v).
    view = f"{_fmt(lo[0])} {_fmt(-hi[1])} {_fmt(width)} {_fmt(height)}"
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{int(round(width * SVG_PIXELS_PER_M))}" '
        f'height="{int(round(height * SVG_PIXELS_PER_M))}" '
        f'viewBox="{view}">',
        f'<rect x="{_fmt(lo[0])}" y="{_fmt(-hi[1])}" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" fill="#1b3a2a"/>',
    ]
    for seg in pts:
        coords = " ".join(f"{_fmt(p[0])},{_fmt(-p[1])}" for p in seg)
        lines.append(
            f'<polyline points="{coords}" fill="none" stroke="#f5f2e8" '
            f'stroke-width="{_fmt(SVG_STROKE_WIDTH_M)}" '
            f'stroke-linecap="round" stroke-linejoin="round"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


_POLYLINE_RE = re.compile(r'<polyline points="([^"]*)"')


def parse_svg_strokes(svg_text: str) -> list[np.ndarray]:
    """Recover board-coordinate stroke segments from a strokes SVG."""
    segments = []
    for match in _POLYLINE_RE.finditer(svg_text):
        pairs = [p.split(",") for p in match.group(1).split()]
        seg = np.array([[float(u), -float(v)] for u, v in pairs])
        segments.append(seg)
    return segments


def write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def session_summary(outcome, config, metrics: dict | None = None) -> dict:
    """Assemble the run summary written next to the session log."""
    summary = {
        "scenario": config.label,
        "success": outcome.success,
        "failure_reason": outcome.failure_reason,
        "diagnostic": outcome.diagnostic,
        "steps": outcome.steps,
        "duration_s": outcome.duration,
        "rate_hz": config.control.rate_hz,
        "render_mode": config.render_mode,
        "saturation_enabled": config.saturation_enabled,
        "stroke_segments": outcome.canvas.segment_count,
        "stroke_points": outcome.canvas.total_points(),
    }
    if metrics is not None:
        summary["metrics"] = metrics
    return summary
