"""Polyline stroke skeletons for the 62-character alphabet A-Z a-z 0-9.

Coordinates: baseline at y=0, cap height at y=1, x grows rightward in cap
units. Lowercase bodies are authored at a nominal x-height of 0.55 and
rescaled per font at raster time; descenders reach y=-0.3. Curves are
polyline approximations from the arc() helper. A single-point stroke
renders as a dot (used for 'i'/'j').
"""

from __future__ import annotations

import math

NOMINAL_X_HEIGHT = 0.55
DESCENDER_DEPTH = -0.3

ALPHABET = (
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "abcdefghijklmnopqrstuvwxyz"
    "0123456789"
)


def arc(cx, cy, rx, ry, deg0, deg1, n=10):
    step = (deg1 - deg0) / n
    return [
        (cx + rx * math.cos(math.radians(deg0 + step * i)),
         cy + ry * math.sin(math.radians(deg0 + step * i)))
        for i in range(n + 1)
    ]


def circle(cx, cy, rx, ry=None, n=16):
    return arc(cx, cy, rx, ry if ry is not None else rx, 0, 360, n)


def _bowl(x0, ytop, ybot, depth):
    """Right-facing half-round from (x0, ytop) to (x0, ybot)."""
    cy = (ytop + ybot) / 2
    ry = (ytop - ybot) / 2
    return [(x0, ytop)] + arc(x0, cy, depth, ry, 90, -90) + [(x0, ybot)]


# char -> (advance width in cap units, list of polylines)
GLYPHS: dict[str, tuple[float, list[list[tuple[float, float]]]]] = {
    # --- uppercase ---
    "A": (0.70, [[(0.0, 0.0), (0.35, 1.0)], [(0.35, 1.0), (0.70, 0.0)],
                 [(0.12, 0.33), (0.58, 0.33)]]),
    "B": (0.62, [[(0.0, 0.0), (0.0, 1.0)], _bowl(0.0, 1.0, 0.52, 0.42),
                 _bowl(0.0, 0.52, 0.0, 0.48)]),
    "C": (0.72, [arc(0.38, 0.5, 0.38, 0.5, 55, 305)]),
    "D": (0.70, [[(0.0, 0.0), (0.0, 1.0)], _bowl(0.0, 1.0, 0.0, 0.62)]),
    "E": (0.60, [[(0.0, 0.0), (0.0, 1.0)], [(0.0, 1.0), (0.58, 1.0)],
                 [(0.0, 0.5), (0.48, 0.5)], [(0.0, 0.0), (0.58, 0.0)]]),
    "F": (0.56, [[(0.0, 0.0), (0.0, 1.0)], [(0.0, 1.0), (0.56, 1.0)],
                 [(0.0, 0.5), (0.44, 0.5)]]),
    "G": (0.80, [arc(0.40, 0.5, 0.40, 0.5, 50, 310),
                 [(0.50, 0.40), (0.80, 0.40)], [(0.80, 0.40), (0.80, 0.12)]]),
    "H": (0.70, [[(0.0, 0.0), (0.0, 1.0)], [(0.70, 0.0), (0.70, 1.0)],
                 [(0.0, 0.5), (0.70, 0.5)]]),
    "I": (0.20, [[(0.10, 0.0), (0.10, 1.0)]]),
    "J": (0.58, [[(0.50, 1.0), (0.50, 0.25)], arc(0.27, 0.25, 0.23, 0.25, 0, -150)]),
    "K": (0.66, [[(0.0, 0.0), (0.0, 1.0)], [(0.58, 1.0), (0.0, 0.45)],
                 [(0.20, 0.62), (0.64, 0.0)]]),
    "L": (0.56, [[(0.0, 1.0), (0.0, 0.0)], [(0.0, 0.0), (0.54, 0.0)]]),
    "M": (0.82, [[(0.0, 0.0), (0.0, 1.0), (0.41, 0.25), (0.82, 1.0), (0.82, 0.0)]]),
    "N": (0.68, [[(0.0, 0.0), (0.0, 1.0), (0.68, 0.0), (0.68, 1.0)]]),
    "O": (0.76, [circle(0.38, 0.5, 0.38, 0.5)]),
    "P": (0.60, [[(0.0, 0.0), (0.0, 1.0)], _bowl(0.0, 1.0, 0.45, 0.46)]),
    "Q": (0.76, [circle(0.38, 0.5, 0.38, 0.5), [(0.48, 0.25), (0.78, -0.08)]]),
    "R": (0.66, [[(0.0, 0.0), (0.0, 1.0)], _bowl(0.0, 1.0, 0.45, 0.46),
                 [(0.30, 0.45), (0.66, 0.0)]]),
    "S": (0.64, [arc(0.33, 0.745, 0.31, 0.255, 55, 262) +
                 arc(0.33, 0.245, 0.31, 0.255, 82, -125)]),
    "T": (0.70, [[(0.0, 1.0), (0.70, 1.0)], [(0.35, 1.0), (0.35, 0.0)]]),
    "U": (0.68, [[(0.0, 1.0), (0.0, 0.28)] + arc(0.34, 0.28, 0.34, 0.28, 180, 360) +
                 [(0.68, 0.28), (0.68, 1.0)]]),
    "V": (0.68, [[(0.0, 1.0), (0.34, 0.0), (0.68, 1.0)]]),
    "W": (0.92, [[(0.0, 1.0), (0.22, 0.0), (0.46, 0.70), (0.70, 0.0), (0.92, 1.0)]]),
    "X": (0.66, [[(0.0, 1.0), (0.66, 0.0)], [(0.66, 1.0), (0.0, 0.0)]]),
    "Y": (0.68, [[(0.0, 1.0), (0.34, 0.5)], [(0.68, 1.0), (0.34, 0.5)],
                 [(0.34, 0.5), (0.34, 0.0)]]),
    "Z": (0.64, [[(0.0, 1.0), (0.64, 1.0), (0.0, 0.0), (0.64, 0.0)]]),
    # --- lowercase (x-height 0.55 nominal) ---
    "a": (0.55, [circle(0.26, 0.275, 0.26, 0.275), [(0.52, 0.55), (0.52, 0.0)]]),
    "b": (0.56, [[(0.0, 0.0), (0.0, 1.0)], circle(0.28, 0.275, 0.26, 0.275)]),
    "c": (0.50, [arc(0.27, 0.275, 0.26, 0.275, 50, 310)]),
    "d": (0.56, [[(0.54, 0.0), (0.54, 1.0)], circle(0.27, 0.275, 0.26, 0.275)]),
    "e": (0.54, [arc(0.26, 0.275, 0.26, 0.275, 0, 305), [(0.0, 0.30), (0.52, 0.30)]]),
    "f": (0.46, [[(0.42, 0.98), (0.26, 0.98), (0.20, 0.82), (0.20, 0.0)],
                 [(0.0, 0.55), (0.42, 0.55)]]),
    "g": (0.56, [circle(0.26, 0.275, 0.26, 0.275),
                 [(0.52, 0.55), (0.52, -0.12), (0.40, -0.30), (0.12, -0.30)]]),
    "h": (0.56, [[(0.0, 0.0), (0.0, 1.0)],
                 [(0.0, 0.36)] + arc(0.27, 0.34, 0.27, 0.21, 180, 0) + [(0.54, 0.0)]]),
    "i": (0.18, [[(0.09, 0.80)], [(0.09, 0.55), (0.09, 0.0)]]),
    "j": (0.32, [[(0.22, 0.80)], [(0.22, 0.55), (0.22, -0.14), (0.06, -0.30)]]),
    "k": (0.52, [[(0.0, 0.0), (0.0, 1.0)], [(0.0, 0.25), (0.46, 0.55)],
                 [(0.16, 0.35), (0.50, 0.0)]]),
    "l": (0.18, [[(0.09, 0.0), (0.09, 1.0)]]),
    "m": (0.84, [[(0.0, 0.0), (0.0, 0.55)],
                 [(0.0, 0.38)] + arc(0.21, 0.35, 0.21, 0.20, 180, 0) + [(0.42, 0.0)],
                 [(0.42, 0.38)] + arc(0.63, 0.35, 0.21, 0.20, 180, 0) + [(0.84, 0.0)]]),
    "n": (0.56, [[(0.0, 0.0), (0.0, 0.55)],
                 [(0.0, 0.36)] + arc(0.27, 0.34, 0.27, 0.21, 180, 0) + [(0.54, 0.0)]]),
    "o": (0.56, [circle(0.28, 0.275, 0.27, 0.275)]),
    "p": (0.56, [[(0.0, 0.55), (0.0, -0.30)], circle(0.28, 0.275, 0.26, 0.275)]),
    "q": (0.56, [[(0.54, 0.55), (0.54, -0.30)], circle(0.27, 0.275, 0.26, 0.275)]),
    "r": (0.42, [[(0.0, 0.0), (0.0, 0.55)],
                 [(0.0, 0.36)] + arc(0.21, 0.33, 0.21, 0.20, 180, 50)]),
    "s": (0.52, [arc(0.26, 0.415, 0.23, 0.135, 55, 262) +
                 arc(0.26, 0.135, 0.23, 0.135, 82, -125)]),
    "t": (0.46, [[(0.20, 0.85), (0.20, 0.10), (0.36, 0.0)], [(0.0, 0.55), (0.44, 0.55)]]),
    "u": (0.56, [[(0.0, 0.55), (0.0, 0.20)] + arc(0.27, 0.20, 0.27, 0.20, 180, 360),
                 [(0.54, 0.55), (0.54, 0.0)]]),
    "v": (0.52, [[(0.0, 0.55), (0.26, 0.0), (0.52, 0.55)]]),
    "w": (0.74, [[(0.0, 0.55), (0.18, 0.0), (0.37, 0.40), (0.56, 0.0), (0.74, 0.55)]]),
    "x": (0.52, [[(0.0, 0.55), (0.52, 0.0)], [(0.52, 0.55), (0.0, 0.0)]]),
    "y": (0.54, [[(0.0, 0.55), (0.27, 0.02)], [(0.54, 0.55), (0.14, -0.30)]]),
    "z": (0.50, [[(0.0, 0.55), (0.50, 0.55), (0.0, 0.0), (0.50, 0.0)]]),
    # --- digits ---
    "0": (0.62, [circle(0.31, 0.5, 0.29, 0.5), [(0.46, 0.76), (0.16, 0.24)]]),
    "1": (0.52, [[(0.08, 0.78), (0.30, 1.0), (0.30, 0.0)], [(0.08, 0.0), (0.52, 0.0)]]),
    "2": (0.62, [arc(0.30, 0.73, 0.28, 0.26, 160, -10) + [(0.0, 0.0), (0.60, 0.0)]]),
    "3": (0.62, [arc(0.27, 0.745, 0.30, 0.255, 130, -85),
                 arc(0.27, 0.255, 0.32, 0.255, 85, -130)]),
    "4": (0.64, [[(0.46, 1.0), (0.0, 0.30), (0.64, 0.30)], [(0.46, 0.62), (0.46, 0.0)]]),
    "5": (0.62, [[(0.56, 1.0), (0.10, 1.0), (0.06, 0.58)],
                 arc(0.28, 0.30, 0.30, 0.30, 105, -140)]),
    "6": (0.62, [circle(0.30, 0.28, 0.27, 0.27),
                 [(0.04, 0.34), (0.05, 0.68), (0.24, 1.0)]]),
    "7": (0.60, [[(0.0, 1.0), (0.60, 1.0), (0.20, 0.0)]]),
    "8": (0.62, [circle(0.30, 0.745, 0.26, 0.255), circle(0.30, 0.245, 0.29, 0.255)]),
    "9": (0.62, [circle(0.30, 0.72, 0.27, 0.27),
                 [(0.56, 0.66), (0.55, 0.32), (0.36, 0.0)]]),
}

_LOWER = set("abcdefghijklmnopqrstuvwxyz")


def is_lowercase(ch: str) -> bool:
    return ch in _LOWER


assert set(GLYPHS) == set(ALPHABET)
