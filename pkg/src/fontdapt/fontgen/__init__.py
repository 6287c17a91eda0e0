from .fonts import FontSpec, GlyphAtlas, SeparationError, synth_font, synth_font_set, rasterize_atlas
from .render import TextImage, render_text, ink_extent
from .dataset import DatasetManifest, make_dataset, replay_entry
from .pgm import encode_pgm, decode_pgm, read_pgm, write_pgm
from .skeletons import ALPHABET

__all__ = [
    "FontSpec", "GlyphAtlas", "SeparationError", "synth_font", "synth_font_set",
    "rasterize_atlas", "TextImage", "render_text", "ink_extent",
    "DatasetManifest", "make_dataset", "replay_entry",
    "encode_pgm", "decode_pgm", "read_pgm", "write_pgm", "ALPHABET",
]
