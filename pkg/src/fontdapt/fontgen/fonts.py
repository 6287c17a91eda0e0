"""Procedural typefaces: parameter synthesis and glyph rasterization."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from ..rng import SplitMix64, derive_seed
from .skeletons import ALPHABET, GLYPHS, NOMINAL_X_HEIGHT, is_lowercase


class SeparationError(ValueError):
    """Raised when the requested class count cannot be delta-separated."""


# (low, high) per parameter; synthesis draws from a delta-spaced lattice
# inside each range so any two distinct draws of one parameter differ by
# at least delta * (high - low).
PARAM_RANGES = {
    "stroke_width": (0.9, 5.8),     # px at em 32
    "slant": (-0.32, 0.45),         # radians
    "serif_length": (0.0, 5.0),     # px
    "x_height_ratio": (0.32, 0.76),
    "weight_contrast": (0.0, 0.90),
    "corner_radius": (0.0, 2.8),    # px
}


@dataclass(frozen=True)
class FontSpec:
    class_id: int
    stroke_width: float
    slant: float
    serif_length: float
    x_height_ratio: float
    weight_contrast: float
    corner_radius: float
    seed: int

    def params_tuple(self):
        return (self.stroke_width, self.slant, self.serif_length,
                self.x_height_ratio, self.weight_contrast, self.corner_radius)

    def to_dict(self):
        return asdict(self)


def _bin_permutation(master_seed: int, name: str, block: int, attempt: int,
                     nbins: int) -> list[int]:
    order = list(range(nbins))
    rng = SplitMix64(derive_seed(master_seed, "font-perm", name, block, attempt))
    for i in range(nbins - 1, 0, -1):
        j = rng.randint(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def synth_font(class_id: int, master_seed: int, delta: float = 0.1,
               attempt: int = 0) -> FontSpec:
    """Deterministic font parameters for one class.

    Each parameter lands on a lattice with spacing delta*range. Within a
    block of floor(1/delta) consecutive class ids, every parameter is a
    seeded permutation of the lattice bins, so any two classes in a block
    differ in every single parameter, maximizing visual separation.
    """
    if class_id < 0:
        raise ValueError(f"class_id must be >= 0, got {class_id}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    nbins = max(1, int(math.floor(1.0 / delta)))
    block, slot = divmod(class_id, nbins)
    values = {}
    for name, (lo, hi) in PARAM_RANGES.items():
        k = _bin_permutation(master_seed, name, block, attempt, nbins)[slot]
        values[name] = lo + (k + 0.5) * (hi - lo) / nbins
    return FontSpec(class_id=class_id, seed=derive_seed(master_seed, "font-seed", class_id),
                    **values)


def synth_font_set(num_classes: int, master_seed: int, delta: float = 0.1,
                   max_attempts: int = 64) -> list[FontSpec]:
    """Pairwise-distinct specs for classes 0..num_classes-1."""
    nbins = max(1, int(math.floor(1.0 / delta)))
    cells = nbins ** len(PARAM_RANGES)
    if cells < num_classes:
        raise SeparationError(
            f"delta={delta} admits only {cells} distinct parameter tuples, "
            f"cannot separate {num_classes} classes")
    specs: list[FontSpec] = []
    seen: set[tuple] = set()
    for class_id in range(num_classes):
        for attempt in range(max_attempts):
            spec = synth_font(class_id, master_seed, delta, attempt)
            if spec.params_tuple() not in seen:
                break
        else:
            raise SeparationError(
                f"could not find a delta-separated spec for class {class_id} "
                f"after {max_attempts} attempts")
        seen.add(spec.params_tuple())
        specs.append(spec)
    return specs


@dataclass
class GlyphAtlas:
    glyphs: dict[str, tuple[np.ndarray, int]]  # char -> (bitmap, advance px)
    em_height: int

    def bitmap(self, ch: str) -> np.ndarray:
        return self.glyphs[ch][0]

    def advance(self, ch: str) -> int:
        return self.glyphs[ch][1]


# vertical metrics as fractions of the em box
_CAP_FRAC = 0.56
_BASELINE_FRAC = 0.74
_SUPERSAMPLE = 2


def _glyph_segments(ch: str, spec: FontSpec, cap_px: float):
    """Transformed stroke segments: list of (ax, ay, bx, by, halfwidth_px),
    with y measured upward from the baseline in pixels."""
    advance_units, polylines = GLYPHS[ch]
    scale = cap_px
    if is_lowercase(ch):
        scale = cap_px * (spec.x_height_ratio / NOMINAL_X_HEIGHT)
    shear = math.tan(spec.slant)
    base_hw = spec.stroke_width / 2.0
    # below ~half a subpixel a binary-coverage stroke can vanish entirely
    min_hw = 0.5

    def xf(pt):
        x, y = pt
        return (x * scale + shear * (y * scale), y * scale)

    segments = []
    for line in polylines:
        pts = [xf(p) for p in line]
        if len(pts) == 1:  # dot
            segments.append((*pts[0], *pts[0], base_hw))
            continue
        for a, b in zip(pts, pts[1:]):
            dx, dy = b[0] - a[0], b[1] - a[1]
            length = math.hypot(dx, dy)
            horiz = abs(dx) / length if length > 0 else 0.0
            hw = max(min_hw, base_hw * (1.0 - 0.85 * spec.weight_contrast * horiz))
            segments.append((*a, *b, hw))
        # round out corners and stroke terminals
        if spec.corner_radius > 0:
            blob = max(min_hw, base_hw * 0.8 + spec.corner_radius * 0.6)
            for p in pts[1:-1]:
                segments.append((*p, *p, blob))
            for p in (pts[0], pts[-1]):
                segments.append((*p, *p, max(min_hw, base_hw * 0.6 + spec.corner_radius * 0.5)))
        # serifs on near-vertical stroke ends
        if spec.serif_length > 0.05:
            for end, nbr in ((pts[0], pts[1]), (pts[-1], pts[-2])):
                dx, dy = end[0] - nbr[0], end[1] - nbr[1]
                if abs(dy) > abs(dx):
                    half = spec.serif_length / 2.0
                    segments.append((end[0] - half, end[1], end[0] + half, end[1],
                                     max(min_hw, base_hw * 0.9)))
    return segments, advance_units * scale


def _rasterize_segments(segments, height_px: int, base_row: float):
    """Binary-coverage stroke fill at 2x supersampling, box-downsampled."""
    max_hw = max(s[4] for s in segments)
    min_x = min(min(s[0], s[2]) for s in segments) - max_hw - 1.0
    max_x = max(max(s[0], s[2]) for s in segments) + max_hw + 1.0
    width_px = max(1, int(math.ceil(max_x - min_x)))

    ss = _SUPERSAMPLE
    hs, ws = height_px * ss, width_px * ss
    jj, ii = np.meshgrid(np.arange(ws), np.arange(hs))
    px = (jj + 0.5) / ss + min_x          # glyph-space x
    py = base_row - (ii + 0.5) / ss       # y upward from baseline
    ink = np.zeros((hs, ws), dtype=bool)
    for ax, ay, bx, by, hw in segments:
        dx, dy = bx - ax, by - ay
        len2 = dx * dx + dy * dy
        if len2 == 0.0:
            d2 = (px - ax) ** 2 + (py - ay) ** 2
        else:
            t = np.clip(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0)
            d2 = (px - (ax + t * dx)) ** 2 + (py - (ay + t * dy)) ** 2
        ink |= d2 <= hw * hw
    cov = ink.reshape(height_px, ss, width_px, ss).mean(axis=(1, 3))
    return (1.0 - cov).astype(np.float32), -min_x


def rasterize_atlas(spec: FontSpec, em_height: int) -> GlyphAtlas:
    """Render every alphabet character for one font.

    Bitmaps are em_height tall with a shared baseline, so compositing them
    top-aligned lines the text up correctly.
    """
    if em_height < 16:
        raise ValueError(f"em_height must be >= 16, got {em_height}")
    cap_px = _CAP_FRAC * em_height
    base_row = _BASELINE_FRAC * em_height
    glyphs = {}
    for ch in ALPHABET:
        segments, _ = _glyph_segments(ch, spec, cap_px)
        bitmap, _ = _rasterize_segments(segments, em_height, base_row)
        # bitmap width already includes a (stroke halfwidth + 1) side bearing
        glyphs[ch] = (bitmap, bitmap.shape[1])
    return GlyphAtlas(glyphs=glyphs, em_height=em_height)
