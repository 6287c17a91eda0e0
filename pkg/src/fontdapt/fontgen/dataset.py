"""Dataset synthesis: rendered, degraded, labeled text-line images on disk.

Layout under out_dir: one 8-bit PGM per sample plus manifest.jsonl with one
JSON object per line: {path, label, domain, seed, font_params, text,
spacing, aug_record}. Everything is a pure function of the master seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..augment import AugRecord, DomainProfile, apply_profile
from ..rng import SplitMix64, derive_seed
from .fonts import rasterize_atlas, synth_font_set
from .pgm import read_pgm, write_pgm
from .render import DEFAULT_CANVAS_HEIGHT, DEFAULT_CANVAS_WIDTH, render_text
from .skeletons import ALPHABET

DEFAULT_EM_HEIGHT = 32
TEXT_LEN_RANGE = (4, 10)


@dataclass
class DatasetManifest:
    root: Path
    entries: list[dict]

    @property
    def path(self) -> Path:
        return self.root / "manifest.jsonl"

    def save(self) -> None:
        lines = [json.dumps(e, sort_keys=True) for e in self.entries]
        self.path.write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, manifest_path) -> "DatasetManifest":
        manifest_path = Path(manifest_path)
        entries = [json.loads(line) for line in
                   manifest_path.read_text().splitlines() if line.strip()]
        return cls(root=manifest_path.parent, entries=entries)

    def labels(self) -> np.ndarray:
        return np.array([e["label"] for e in self.entries], dtype=np.int64)

    def domains(self) -> list[str]:
        return [e["domain"] for e in self.entries]

    def num_classes(self) -> int:
        return int(self.labels().max()) + 1 if self.entries else 0

    def load_images(self) -> np.ndarray:
        """All images as a (n, 1, h, w) float32 stack."""
        imgs = []
        for e in self.entries:
            path = self.root / e["path"]
            if not path.exists():
                raise FileNotFoundError(f"manifest references missing image {path}")
            imgs.append(read_pgm(path))
        return np.stack(imgs)[:, None, :, :]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.path.read_bytes())
        for e in self.entries:
            h.update((self.root / e["path"]).read_bytes())
        return h.hexdigest()


def _random_text(rng: SplitMix64) -> str:
    length = TEXT_LEN_RANGE[0] + rng.randint(TEXT_LEN_RANGE[1] - TEXT_LEN_RANGE[0] + 1)
    return "".join(ALPHABET[rng.randint(len(ALPHABET))] for _ in range(length))


def make_dataset(num_classes: int, samples_per_class: int, profile: DomainProfile,
                 master_seed: int, out_dir,
                 canvas_height: int = DEFAULT_CANVAS_HEIGHT,
                 canvas_width: int = DEFAULT_CANVAS_WIDTH,
                 em_height: int = DEFAULT_EM_HEIGHT,
                 delta: float = 0.1) -> DatasetManifest:
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    specs = synth_font_set(num_classes, master_seed, delta)
    entries = []
    for spec in specs:
        atlas = rasterize_atlas(spec, em_height)
        for s in range(samples_per_class):
            sample_seed = derive_seed(master_seed, "sample", spec.class_id, s)
            rng = SplitMix64(sample_seed)
            text = _random_text(rng)
            spacing = rng.uniform(*profile.spacing)
            img = render_text(atlas, text, spacing, canvas_height, canvas_width)
            img, record = apply_profile(img, profile, derive_seed(sample_seed, "aug"))
            rel_path = f"img_{spec.class_id:04d}_{s:04d}.pgm"
            write_pgm(out_dir / rel_path, img)
            entries.append({
                "path": rel_path,
                "label": spec.class_id,
                "domain": profile.domain_tag,
                "seed": sample_seed,
                "font_params": spec.to_dict(),
                "text": text,
                "spacing": spacing,
                "aug_record": record.to_json(),
            })
    manifest = DatasetManifest(root=out_dir, entries=entries)
    manifest.save()
    return manifest


def replay_entry(entry: dict, root: Path, em_height: int = DEFAULT_EM_HEIGHT,
                 canvas_height: int = DEFAULT_CANVAS_HEIGHT,
                 canvas_width: int = DEFAULT_CANVAS_WIDTH) -> np.ndarray:
    """Regenerate one sample from its manifest provenance (pre-quantization)."""
    from .fonts import FontSpec
    from ..augment import replay_record

    spec = FontSpec(**entry["font_params"])
    atlas = rasterize_atlas(spec, em_height)
    img = render_text(atlas, entry["text"], entry["spacing"],
                      canvas_height, canvas_width)
    return replay_record(img, AugRecord.from_json(entry["aug_record"]))
