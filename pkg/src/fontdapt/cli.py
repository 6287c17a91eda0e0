"""Command-line entry point: reproducible subcommands over a JSON config.

Exit codes: 0 success, 2 usage/config error, 3 training divergence,
4 protocol violation, 5 artifact mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .classifier import FontCNNClassifier
from .config import Config, ConfigError, default_config, load_config
from .evaluation import evaluate, run_experiment
from .exceptions import DivergenceError, ProtocolError
from .fontgen import DatasetManifest, make_dataset
from .fontgen.pgm import read_pgm
from .nn import SGDConfig
from .nn.weights import BundleFormatError
from .rng import derive_seed
from .scae import ConvAutoencoder
from .augment import crop_patches

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGENCE = 3
EXIT_PROTOCOL = 4
EXIT_ARTIFACT = 5

GEN_DOMAIN_PROFILES = {"clean": "clean", "synthetic": "synthetic_train",
                       "pseudo_real": "pseudo_real"}


class ArtifactError(ValueError):
    """Artifact does not match what the command expects (exit code 5)."""


def _work_dir(cfg: Config) -> Path:
    work = Path(cfg.work_dir)
    work.mkdir(parents=True, exist_ok=True)
    return work


def _resolve_out(cfg: Config, out: str) -> Path:
    path = Path(out)
    return path if path.is_absolute() else _work_dir(cfg) / path


def _index_artifact(cfg: Config, path: Path, kind: str) -> None:
    """Record an artifact in the work dir's MANIFEST.json index."""
    work = _work_dir(cfg)
    index_path = work / "MANIFEST.json"
    index = json.loads(index_path.read_text()) if index_path.exists() else {}
    try:
        key = str(path.resolve().relative_to(work.resolve()))
    except ValueError:
        key = str(path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest() if path.is_file() else None
    index[key] = {"kind": kind, "sha256": digest}
    index_path.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")


def _load_manifest(path) -> DatasetManifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.jsonl"
    if not path.exists():
        raise ConfigError(f"manifest not found: {path}")
    return DatasetManifest.load(path)


def cmd_print_config(cfg: Config, args) -> int:
    print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_gen_data(cfg: Config, args) -> int:
    profile = cfg.profiles[GEN_DOMAIN_PROFILES[args.domain]]
    samples = args.samples
    if samples is None:
        samples = cfg.dataset.train_per_class + cfg.dataset.test_per_class
    out_dir = _resolve_out(cfg, args.out or f"data/{args.domain}-seed{args.seed}")
    d = cfg.dataset
    manifest = make_dataset(d.num_classes, samples, profile, args.seed, out_dir,
                            canvas_height=d.canvas_height,
                            canvas_width=d.canvas_width, em_height=d.em_height,
                            delta=d.delta)
    _index_artifact(cfg, manifest.path, "dataset-manifest")
    print(manifest.path)
    print(manifest.content_hash())
    return EXIT_OK


def _manifest_patches(manifest: DatasetManifest, count: int,
                      patches_per_image: int, seed: int) -> np.ndarray:
    stacks, got = [], 0
    for i, entry in enumerate(manifest.entries):
        if got >= count:
            break
        img = read_pgm(manifest.root / entry["path"])
        stacks.append(crop_patches(img, 48, patches_per_image,
                                   derive_seed(seed, "patch", entry["domain"], i)))
        got += patches_per_image
    if got < count:
        raise ConfigError(f"manifest {manifest.path} has too few images for "
                          f"{count} patches")
    return np.concatenate(stacks)[:count]


def cmd_pretrain(cfg: Config, args) -> int:
    labeled = _load_manifest(args.labeled_manifest)
    unlabeled = _load_manifest(args.unlabeled_manifest)
    s = cfg.scae
    n_real = int(round(s.patch_count * s.mixing_ratio))
    pools = []
    if s.patch_count - n_real > 0:
        pools.append(_manifest_patches(labeled, s.patch_count - n_real,
                                       s.patches_per_image,
                                       derive_seed(args.seed, "pool", "labeled")))
    if n_real > 0:
        pools.append(_manifest_patches(unlabeled, n_real, s.patches_per_image,
                                       derive_seed(args.seed, "pool", "unlabeled")))
    model = ConvAutoencoder(epochs=s.epochs, learning_rate=s.learning_rate,
                            momentum=s.momentum, weight_decay=s.weight_decay,
                            batch_size=s.batch_size, seed=args.seed)
    model.fit(np.concatenate(pools))
    out = _resolve_out(cfg, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(model.export_encoder())
    loss_csv = out.with_suffix(out.suffix + ".loss.csv")
    model.write_loss_csv(loss_csv)
    _index_artifact(cfg, out, "encoder-weights")
    _index_artifact(cfg, loss_csv, "pretrain-loss-curve")
    print(out)
    return EXIT_OK


def cmd_train(cfg: Config, args) -> int:
    manifest = _load_manifest(args.manifest)
    if not manifest.entries:
        raise ConfigError(f"manifest {manifest.path} is empty")
    c = cfg.cnn
    model = FontCNNClassifier(
        num_classes=manifest.num_classes(), epochs=c.epochs,
        learning_rate=c.learning_rate, momentum=c.momentum,
        weight_decay=c.weight_decay, batch_size=c.batch_size,
        seed=args.seed).build()
    if args.encoder:
        encoder_path = Path(args.encoder)
        if not encoder_path.exists():
            raise ConfigError(f"encoder bundle not found: {encoder_path}")
        try:
            model.import_encoder(encoder_path.read_bytes(),
                                 frozen_prefix=c.frozen_prefix)
        except (ValueError, BundleFormatError) as exc:
            raise ArtifactError(f"encoder bundle {encoder_path}: {exc}") from exc
    model.fit(manifest.load_images(), manifest.labels(),
              domains=manifest.domains())
    out = _resolve_out(cfg, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    weights_path, meta_path = model.save(out)
    report_path = out.with_suffix(out.suffix + ".train.json")
    report_path.write_text(json.dumps(model.train_report_.to_dict(), indent=2) + "\n")
    for path, kind in ((weights_path, "model-weights"), (meta_path, "model-meta"),
                       (report_path, "train-report")):
        _index_artifact(cfg, path, kind)
    print(weights_path)
    return EXIT_OK


def cmd_eval(cfg: Config, args) -> int:
    model_path = Path(args.model)
    if not model_path.exists():
        raise ConfigError(f"model not found: {model_path}")
    manifest = _load_manifest(args.manifest)
    try:
        model = FontCNNClassifier.load(model_path)
    except (ValueError, KeyError, BundleFormatError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"model {model_path}: {exc}") from exc
    k_list = [int(k) for k in args.k.split(",") if k.strip()]
    if not k_list or any(k < 1 for k in k_list):
        raise ConfigError(f"--k must be positive integers, got {args.k!r}")
    try:
        report = evaluate(model, manifest, k_list)
    except ValueError as exc:
        raise ArtifactError(str(exc)) from exc
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_experiment(cfg: Config, args) -> int:
    result = run_experiment(cfg)
    print(f"{'arm':<4} {'domain':<12} {'median top-1':>12}")
    for name in sorted(result.arms):
        arm = result.arms[name]
        if not arm.completed:
            print(f"{name:<4} FAILED: {arm.error}")
            continue
        for domain in ("in_domain", "pseudo_real"):
            print(f"{name:<4} {domain:<12} {arm.median_top1(domain):>12.4f}")
    work = _work_dir(cfg)
    _index_artifact(cfg, work / "experiment.json", "experiment-result")
    _index_artifact(cfg, work / "experiment.csv", "experiment-csv")
    if all(not arm.completed for arm in result.arms.values()):
        print("all arms diverged", file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fontdapt",
        description="Font recognition with synthetic-to-real domain adaptation.")
    parser.add_argument("-c", "--config", help="JSON config file "
                        "(defaults are used when omitted)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("print-config", help="dump the effective config as JSON")

    p = sub.add_parser("gen-data", help="render a labeled dataset")
    p.add_argument("--domain", required=True, choices=sorted(GEN_DOMAIN_PROFILES))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=None,
                   help="samples per class (default: train+test per class)")
    p.add_argument("--out", default=None, help="output dir (under the work dir)")

    p = sub.add_parser("pretrain", help="train the patch auto-encoder")
    p.add_argument("--labeled-manifest", required=True)
    p.add_argument("--unlabeled-manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train the supervised classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--encoder", default=None,
                   help="optional pretrained encoder bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="evaluate a saved model on a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", default="1,5")

    sub.add_parser("experiment", help="run the full three-arm experiment")
    return parser


COMMANDS = {
    "print-config": cmd_print_config,
    "gen-data": cmd_gen_data,
    "pretrain": cmd_pretrain,
    "train": cmd_train,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ProtocolError as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ArtifactError as exc:
        print(f"artifact mismatch: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT


if __name__ == "__main__":
    sys.exit(main())
