"""Letter shapes for the scripted writing task.

Each letter is a list of pen-down strokes; each stroke is a polyline in
a unit box (u right, v up, both in [0, 1]).  ``layout_text`` scales the
shapes to a letter height and lays them out left to right in board
coordinates (meters on the writing surface).

External letter files are JSON: ``{"strokes": [[[u, v], ...], ...]}``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

Stroke = list[tuple[float, float]]


def _arc(cx: float, cy: float, r: float, start_deg: float, end_deg: float,
         n: int = 24) -> Stroke:
    pts: Stroke = []
    for i in range(n + 1):
        a = math.radians(start_deg + (end_deg - start_deg) * i / n)
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    return pts


# Unit-box letter shapes.  Stroke order is writing order; the crossbar
# of A comes last, G finishes with the inward bar.
BUILTIN: dict[str, list[Stroke]] = {
    "A": [
        [(0.0, 0.0), (0.5, 1.0)],
        [(0.5, 1.0), (1.0, 0.0)],
        [(0.2, 0.4), (0.8, 0.4)],
    ],
    "C": [
        _arc(0.55, 0.5, 0.45, 60.0, 300.0),
    ],
    "G": [
        _arc(0.55, 0.5, 0.45, 60.0, 330.0),
        [(0.55 + 0.45 * math.cos(math.radians(330.0)),
          0.5 + 0.45 * math.sin(math.radians(330.0))), (0.55, 0.28)],
    ],
}


def load_letter_file(path: str | Path) -> list[Stroke]:
    data = json.loads(Path(path).read_text())
    strokes = data["strokes"]
    return [[(float(u), float(v)) for u, v in stroke] for stroke in strokes]


def layout_text(text: str, height: float = 0.06,
                spacing: float = 0.02,
                origin: tuple[float, float] = (0.0, 0.0)) -> list[np.ndarray]:
    """Board-frame polylines for ``text``, one array (N, 2) per stroke.

    Letters keep their stroke order and are placed on a common baseline
    starting at ``origin``; unknown characters raise KeyError so a typo
    in a task description fails loudly.
    """
    strokes: list[np.ndarray] = []
    cursor = origin[0]
    for ch in text:
        if ch == " ":
            cursor += 0.6 * height
            continue
        shape = BUILTIN[ch.upper()]
        width = height * max(u for stroke in shape for u, _ in stroke)
        for stroke in shape:
            pts = np.array([[cursor + u * height, origin[1] + v * height]
                            for u, v in stroke])
            strokes.append(pts)
        cursor += width + spacing
    return strokes


def stroke_length(stroke: np.ndarray) -> float:
    d = np.diff(stroke, axis=0)
    return float(np.sum(np.linalg.norm(d, axis=1)))
