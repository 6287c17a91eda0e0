"""Top-k evaluation and the three-arm domain-adaptation experiment.

The experiment trains three classifiers with identical budgets:

  arm A — from scratch on clean renders (no degradation),
  arm B — from scratch on augmented synthetic renders,
  arm C — encoder pretrained on unlabeled patches from both domains,
          then supervised on the same augmented renders as B,

and evaluates each on an in-domain test split plus the harsher pseudo-real
test split. Arm B vs A isolates the augmentation effect; arm C vs B isolates
the unsupervised adaptation effect.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .augment import crop_patches
from .classifier import FontCNNClassifier
from .config import Config
from .exceptions import DivergenceError
from .fontgen import DatasetManifest, make_dataset
from .fontgen.pgm import read_pgm
from .rng import derive_seed
from .scae import ConvAutoencoder

RESULT_SCHEMA = "fontdapt-exp/1"

ARM_TRAIN_PROFILE = {"A": "clean", "B": "synthetic_train", "C": "synthetic_train"}
ARM_DESCRIPTIONS = {
    "A": "scratch, clean synthetic training",
    "B": "scratch, augmented synthetic training",
    "C": "encoder-pretrained + augmented synthetic training",
}


def topk_error(predictions, labels, k: int) -> float:
    """Fraction of samples whose true label is not among the k most probable
    classes; ties rank the lower class index first."""
    P = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if P.ndim != 2:
        raise ValueError(f"predictions must be 2-D, got shape {P.shape}")
    if y.shape != (P.shape[0],):
        raise ValueError(f"{P.shape[0]} predictions vs {y.shape[0]} labels")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = min(k, P.shape[1])
    top = np.argsort(-P, axis=1, kind="stable")[:, :k]
    hit = (top == y[:, None]).any(axis=1)
    return float(np.count_nonzero(~hit) / len(y))


@dataclass
class EvalReport:
    dataset: str
    n_samples: int
    top1_error: float
    top5_error: float
    k_errors: dict = field(default_factory=dict)     # str(k) -> error
    per_class: list = field(default_factory=list)    # {class, n, top1_error}
    confused_pairs: list = field(default_factory=list)  # {true, pred, count}

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "n_samples": self.n_samples,
            "top1_error": self.top1_error,
            "top5_error": self.top5_error,
            "k_errors": self.k_errors,
            "per_class": self.per_class,
            "confused_pairs": self.confused_pairs,
        }


def evaluate(model: FontCNNClassifier, manifest: DatasetManifest,
             k_list=(1, 5)) -> EvalReport:
    """Single deterministic pass over a manifest; independent of entry order."""
    if not manifest.entries:
        raise ValueError("manifest is empty")
    y = manifest.labels()
    if int(y.max()) + 1 > model.num_classes:
        raise ValueError(f"manifest labels reach {int(y.max())} but model has "
                         f"only {model.num_classes} classes")
    X = manifest.load_images()
    proba = model.predict_proba(X)
    pred = np.argsort(-proba, axis=1, kind="stable")[:, 0]

    k_errors = {str(k): topk_error(proba, y, k) for k in sorted(set(k_list) | {1, 5})}

    per_class = []
    for cls in sorted(set(int(c) for c in y)):
        mask = y == cls
        per_class.append({
            "class": cls,
            "n": int(mask.sum()),
            "top1_error": float((pred[mask] != cls).mean()),
        })

    confusion = Counter((int(t), int(p)) for t, p in zip(y, pred) if t != p)
    pairs = sorted(confusion.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
    confused_pairs = [{"true": t, "pred": p, "count": c} for (t, p), c in pairs]

    return EvalReport(dataset=manifest.root.name, n_samples=len(manifest.entries),
                      top1_error=k_errors["1"], top5_error=k_errors["5"],
                      k_errors=k_errors, per_class=per_class,
                      confused_pairs=confused_pairs)


@dataclass
class ArmOutcome:
    name: str
    description: str
    train_profile: str
    completed: bool = True
    error: str | None = None
    runs: list = field(default_factory=list)  # {seed, in_domain, pseudo_real}

    def median_top1(self, domain: str):
        if not self.runs:
            return None
        return float(np.median([r[domain]["top1_error"] for r in self.runs]))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "train_profile": self.train_profile,
            "completed": self.completed,
            "error": self.error,
            "runs": self.runs,
            "median": {
                "in_domain_top1": self.median_top1("in_domain"),
                "pseudo_real_top1": self.median_top1("pseudo_real"),
            },
        }


@dataclass
class ExperimentResult:
    schema: str
    config: dict
    seeds: list
    arms: dict  # name -> ArmOutcome
    incomplete: bool

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "config": self.config,
            "seeds": self.seeds,
            "incomplete": self.incomplete,
            "arms": {name: arm.to_dict() for name, arm in sorted(self.arms.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def csv_rows(self):
        """(arm, domain, seed, top1, top5) rows, deterministically ordered."""
        rows = []
        for name in sorted(self.arms):
            for run in self.arms[name].runs:
                for domain in ("in_domain", "pseudo_real"):
                    rep = run[domain]
                    rows.append((name, domain, run["seed"],
                                 rep["top1_error"], rep["top5_error"]))
        return rows

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["arm", "domain", "seed", "top1", "top5"])
            for arm, domain, seed, top1, top5 in self.csv_rows():
                writer.writerow([arm, domain, seed, f"{top1:.6f}", f"{top5:.6f}"])


def split_manifest(manifest: DatasetManifest, train_per_class: int):
    """Per-class head/tail split of a class-major manifest into train/test
    views sharing the same image files."""
    per_class_seen = Counter()
    train_entries, test_entries = [], []
    for entry in manifest.entries:
        cls = entry["label"]
        if per_class_seen[cls] < train_per_class:
            train_entries.append(entry)
        else:
            test_entries.append(entry)
        per_class_seen[cls] += 1
    return (DatasetManifest(root=manifest.root, entries=train_entries),
            DatasetManifest(root=manifest.root, entries=test_entries))


def _pool_patches(manifest: DatasetManifest, entries, count: int,
                  patches_per_image: int, seed: int) -> np.ndarray:
    """Deterministic 48x48 crops from the first images of an unlabeled pool."""
    stacks = []
    for i, entry in enumerate(entries):
        if len(stacks) * patches_per_image >= count:
            break
        img = read_pgm(manifest.root / entry["path"])
        stacks.append(crop_patches(img, 48, patches_per_image,
                                   derive_seed(seed, "patch", entry["domain"], i)))
    if not stacks or sum(s.shape[0] for s in stacks) < count:
        raise ValueError(f"pool too small for {count} patches")
    return np.concatenate(stacks)[:count]


def _generate_seed_datasets(cfg: Config, seed: int, data_dir: Path) -> dict:
    d = cfg.dataset
    per = d.train_per_class + d.test_per_class
    out = {}
    for pname in ("clean", "synthetic_train", "pseudo_real"):
        manifest = make_dataset(d.num_classes, per, cfg.profiles[pname], seed,
                                data_dir / f"seed{seed}" / pname,
                                canvas_height=d.canvas_height,
                                canvas_width=d.canvas_width,
                                em_height=d.em_height, delta=d.delta)
        out[pname] = split_manifest(manifest, d.train_per_class)
    return out


def _train_arm(name: str, cfg: Config, seed: int, datasets: dict) -> FontCNNClassifier:
    c = cfg.cnn
    model = FontCNNClassifier(
        num_classes=cfg.dataset.num_classes, epochs=c.epochs,
        learning_rate=c.learning_rate, momentum=c.momentum,
        weight_decay=c.weight_decay, batch_size=c.batch_size,
        seed=derive_seed(seed, "arm", name)).build()

    if name == "C":
        s = cfg.scae
        n_real = int(round(s.patch_count * s.mixing_ratio))
        syn_train, _ = datasets["synthetic_train"]
        real_pool, _ = datasets["pseudo_real"]  # unlabeled: labels never read
        patches = []
        if s.patch_count - n_real > 0:
            patches.append(_pool_patches(syn_train, syn_train.entries,
                                         s.patch_count - n_real,
                                         s.patches_per_image,
                                         derive_seed(seed, "pool", "syn")))
        if n_real > 0:
            patches.append(_pool_patches(real_pool, real_pool.entries, n_real,
                                         s.patches_per_image,
                                         derive_seed(seed, "pool", "real")))
        scae = ConvAutoencoder(epochs=s.epochs, learning_rate=s.learning_rate,
                               momentum=s.momentum, weight_decay=s.weight_decay,
                               batch_size=s.batch_size,
                               seed=derive_seed(seed, "scae"))
        scae.fit(np.concatenate(patches))
        model.import_encoder(scae.export_encoder(),
                             frozen_prefix=c.frozen_prefix)

    train_manifest, _ = datasets[ARM_TRAIN_PROFILE[name]]
    X = train_manifest.load_images()
    y = train_manifest.labels()
    model.fit(X, y, domains=train_manifest.domains())
    return model


def run_experiment(cfg: Config) -> ExperimentResult:
    """Train and evaluate all arms over all seeds; persist JSON + CSV under
    the work dir. A diverging arm is marked failed and the others continue."""
    work = Path(cfg.work_dir)
    data_dir = work / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    arms = {name: ArmOutcome(name=name, description=ARM_DESCRIPTIONS[name],
                             train_profile=ARM_TRAIN_PROFILE[name])
            for name in ("A", "B", "C")}
    k_list = cfg.experiment.k_list

    for seed in cfg.experiment.seeds:
        datasets = _generate_seed_datasets(cfg, seed, data_dir)
        for name, arm in arms.items():
            if not arm.completed:
                continue
            try:
                model = _train_arm(name, cfg, seed, datasets)
            except DivergenceError as exc:
                arm.completed = False
                arm.error = f"seed {seed}: {exc}"
                continue
            _, in_domain_test = datasets[ARM_TRAIN_PROFILE[name]]
            _, real_test = datasets["pseudo_real"]
            arm.runs.append({
                "seed": seed,
                "in_domain": evaluate(model, in_domain_test, k_list).to_dict(),
                "pseudo_real": evaluate(model, real_test, k_list).to_dict(),
            })

    result = ExperimentResult(
        schema=RESULT_SCHEMA, config=cfg.to_dict(),
        seeds=list(cfg.experiment.seeds), arms=arms,
        incomplete=not all(a.completed for a in arms.values()))
    (work / "experiment.json").write_text(result.to_json())
    result.write_csv(work / "experiment.csv")
    return result
