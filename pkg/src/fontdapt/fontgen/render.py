"""Text-line compositing onto a fixed-size grayscale canvas."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fonts import GlyphAtlas

DEFAULT_CANVAS_HEIGHT = 48
DEFAULT_CANVAS_WIDTH = 192


@dataclass
class TextImage:
    pixels: np.ndarray          # (h, w) float32 in [0,1], 0 = ink
    label: int
    domain_tag: str             # "synthetic" | "pseudo_real"
    provenance: dict = field(default_factory=dict)


def render_text(atlas: GlyphAtlas, text: str, spacing: float,
                canvas_height: int = DEFAULT_CANVAS_HEIGHT,
                canvas_width: int = DEFAULT_CANVAS_WIDTH) -> np.ndarray:
    """Composite glyphs left to right; returns the (h, w) pixel array.

    The line is centered on the canvas; lines wider than the canvas are
    center-cropped. Background is 1.0, ink multiplies darker (min blend).
    """
    if spacing < 0:
        raise ValueError(f"spacing must be >= 0, got {spacing}")
    for ch in text:
        if ch not in atlas.glyphs:
            raise ValueError(f"character {ch!r} not in the atlas alphabet")

    canvas = np.ones((canvas_height, canvas_width), dtype=np.float32)
    if not text:
        return canvas

    em = atlas.em_height
    widths = [atlas.bitmap(ch).shape[1] for ch in text]
    advances = [atlas.advance(ch) for ch in text]
    line_w = int(round(sum(advances[:-1]) + spacing * (len(text) - 1))) + widths[-1]
    line = np.ones((em, line_w), dtype=np.float32)
    x = 0.0
    for ch, adv in zip(text, advances):
        bmp = atlas.bitmap(ch)
        xi = int(round(x))
        line[:, xi:xi + bmp.shape[1]] = np.minimum(line[:, xi:xi + bmp.shape[1]], bmp)
        x += adv + spacing

    top = max(0, (canvas_height - em) // 2)
    em_rows = min(em, canvas_height)
    if line_w <= canvas_width:
        left = (canvas_width - line_w) // 2
        canvas[top:top + em_rows, left:left + line_w] = line[:em_rows]
    else:
        crop = (line_w - canvas_width) // 2
        canvas[top:top + em_rows, :] = line[:em_rows, crop:crop + canvas_width]
    return canvas


def ink_extent(img: np.ndarray, threshold: float = 0.5):
    """(first, last) inked column indices, or None if blank."""
    cols = np.where((img < threshold).any(axis=0))[0]
    if len(cols) == 0:
        return None
    return int(cols[0]), int(cols[-1])
