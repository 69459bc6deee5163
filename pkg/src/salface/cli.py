"""Command-line front end.

Single-image stages compose through files so the whole preprocessing
chain can be inspected step by step::

    salface prepare  --image photo.ppm --bbox 40,30,120,160 --out face.ppm
    salface saliency --image face.ppm --backend ftuned --out map.pgm
    salface blend    --image face.ppm --map map.pgm --alpha 0.30 --out reweighted.ppm

Training, evaluation, the ratio ablation, and CAM export run on a
manifest (or the built-in synthetic set when none is given). Every
command draws all randomness from --seed; reruns write byte-identical
artifacts. On failure the process exits nonzero after printing one
``error:<category>: ...`` line to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import cam as cam_mod
from .blend import apply_weight_map, reweight_map
from .errors import ConfigError, SalfaceError
from .facecrop import BBox, CropConfig, prepare_face
from .imagekit import Image, load_pnm, resize_bilinear, save_pnm
from .nnet import load_checkpoint, save_checkpoint
from .nnet.presets import preset
from .nnet.train import TrainConfig, train
from .saliency import center_surround, frequency_tuned, load_external_map, map_to_image
from .evalharness import synthetic
from .evalharness.experiment import (
    DEFAULT_ABLATION_ALPHAS,
    ExperimentConfig,
    PipelineConfig,
    build_train_batch,
    evaluate,
    run_experiment,
    run_ratio_ablation,
    write_ablation_report,
    write_report,
)
from .evalharness.manifest import TASK_CLASSES, load_manifest
from .evalharness.metrics import class_weights


def _read_image(path: str) -> Image:
    return load_pnm(Path(path).read_bytes())


def _parse_bbox(text: str) -> BBox:
    try:
        x, y, w, h = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bbox must be x,y,w,h integers, got {text!r}") from exc
    return BBox(x, y, w, h)


def cmd_prepare(args) -> int:
    img = _read_image(args.image)
    cfg = CropConfig(margin=args.margin, out_size=args.out_size)
    face = prepare_face(img, _parse_bbox(args.bbox), cfg)
    Path(args.out).write_bytes(save_pnm(face))
    print(f"wrote {args.out} ({face.width}x{face.height}, {face.channels} channels)")
    return 0


def cmd_saliency(args) -> int:
    img = _read_image(args.image)
    if args.backend == "ftuned":
        sal = frequency_tuned(img)
    elif args.backend == "csurround":
        sal = center_surround(img, args.levels)
    else:
        if not args.map:
            raise ConfigError("--backend external needs --map")
        sal = load_external_map(Path(args.map).read_bytes(), img.width, img.height)
    Path(args.out).write_bytes(save_pnm(map_to_image(sal)))
    print(f"wrote {args.out} (backend {args.backend})")
    return 0


def cmd_blend(args) -> int:
    img = _read_image(args.image)
    sal_img = _read_image(args.map)
    blended = apply_weight_map(img, reweight_map(sal_img.plane(0), args.alpha))
    Path(args.out).write_bytes(save_pnm(blended))
    print(f"wrote {args.out} (alpha {args.alpha})")
    return 0


_SYNTH_TASKS = ("shapes2", "shapes3", "context", "disk")


def _generate_synthetic(kind: str, out_dir: Path, subjects: int, per_subject: int,
                        size: int, seed: int) -> Path:
    if kind == "shapes2":
        samples = synthetic.shapes_task(subjects, per_subject, size=size,
                                        num_classes=2, seed=seed)
    elif kind == "shapes3":
        samples = synthetic.shapes_task(subjects, per_subject, size=size,
                                        num_classes=3, seed=seed)
    elif kind == "context":
        samples = synthetic.context_task(subjects, per_subject, size=size, seed=seed)
    elif kind == "disk":
        samples = synthetic.disk_task(subjects, per_subject, size=size, seed=seed)
    else:
        raise ConfigError(f"unknown synthetic task {kind!r} (have: {_SYNTH_TASKS})")
    return synthetic.write_dataset(samples, out_dir)


def cmd_synth(args) -> int:
    manifest = _generate_synthetic(args.task, Path(args.out_dir), args.subjects,
                                   args.per_subject, args.size, args.seed)
    print(f"wrote {manifest}")
    return 0


def _builtin_manifest(args, out_dir: Path) -> str:
    """Materialize the built-in synthetic set matching the task flag."""
    kind = "shapes2" if TASK_CLASSES[args.task] == 2 else "shapes3"
    data_dir = out_dir / "synthetic"
    manifest = _generate_synthetic(kind, data_dir, args.subjects, args.per_subject,
                                   args.out_size if args.size is None else args.size,
                                   args.seed)
    return str(manifest)


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        return ExperimentConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    out_dir = Path(args.out_dir)
    manifest = args.manifest or _builtin_manifest(args, out_dir)
    num_classes = args.num_classes
    if args.manifest is None and num_classes is None and TASK_CLASSES[args.task] > 3:
        num_classes = 3  # the built-in synthetic set covers three classes
    return ExperimentConfig(
        manifest=manifest,
        task=args.task,
        backend=args.backend,
        alpha=args.alpha,
        levels=args.levels,
        crop=CropConfig(margin=args.margin, out_size=args.out_size),
        preset=args.preset,
        train=TrainConfig(
            epochs=args.epochs,
            learning_rate=args.lr,
            lr_drop_epoch=args.lr_drop_epoch,
            batch_size=args.batch_size,
            dropout_keep=args.dropout_keep,
            seed=args.seed,
            trainable_layers=tuple(args.trainable.split(",")) if args.trainable else (),
        ),
        k=args.k,
        seed=args.seed,
        num_classes=num_classes,
    )


def cmd_train(args) -> int:
    cfg = _experiment_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(cfg.to_json(), encoding="utf-8")
    report = run_experiment(cfg)
    write_report(report, out_dir)
    print(f"mean accuracy: {report.mean_accuracy * 100:.2f}% "
          f"(stderr {report.stderr * 100:.2f}%) over {cfg.k} folds")
    return 0


def cmd_eval(args) -> int:
    spec, params = load_checkpoint(Path(args.checkpoint).read_bytes())
    records = [r for r in load_manifest(args.manifest) if r.task == args.task]
    pipe = PipelineConfig(
        crop=CropConfig(margin=args.margin, out_size=spec.in_height),
        backend=args.backend,
        levels=args.levels,
        alpha=args.alpha,
    )
    accuracy, confusion = evaluate(spec, params, records, pipe,
                                   base_dir=Path(args.manifest).parent,
                                   num_classes=spec.num_classes())
    print(f"accuracy: {accuracy * 100:.2f}% on {int(confusion.sum())} records")
    for row in confusion:
        print(" ".join(f"{int(v):6d}" for v in row))
    return 0


def cmd_ablate(args) -> int:
    cfg = _experiment_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(cfg.to_json(), encoding="utf-8")
    alphas = DEFAULT_ABLATION_ALPHAS
    if args.alphas:
        alphas = tuple(float(v) for v in args.alphas.split(","))
    report = run_ratio_ablation(cfg, alphas, loss_threshold=args.threshold)
    write_ablation_report(report, out_dir)
    print(report.to_text(), end="")
    return 0


def cmd_cam(args) -> int:
    spec, params = load_checkpoint(Path(args.checkpoint).read_bytes())
    if any(l.kind == "gap" for l in spec.layers):
        gap_at = next(i for i, l in enumerate(spec.layers) if l.kind == "gap")
        model = cam_mod.CamModel(spec, params, trunk_layers=gap_at)
    else:
        if not args.manifest:
            raise ConfigError(
                "checkpoint has no GAP head; pass --manifest to fit one"
            )
        records = [r for r in load_manifest(args.manifest) if r.task == args.task]
        pipe = PipelineConfig(
            crop=CropConfig(margin=args.margin, out_size=spec.in_height),
            backend=args.backend, levels=args.levels, alpha=args.alpha,
        )
        x, y = build_train_batch(records, pipe, Path(args.manifest).parent)
        num_classes = int(y.max()) + 1
        model = cam_mod.build_cam_head(spec, params, num_classes, seed=args.seed)
        cam_mod.train_cam_head(
            model, x, y,
            TrainConfig(epochs=args.epochs, learning_rate=args.lr,
                        batch_size=args.batch_size, seed=args.seed),
            class_weights(y, num_classes),
        )
        if args.save_checkpoint:
            Path(args.save_checkpoint).write_bytes(
                save_checkpoint(model.spec, model.params)
            )
    img = _read_image(args.image)
    if (img.height, img.width) != (model.spec.in_height, model.spec.in_width):
        img = resize_bilinear(img, model.spec.in_width, model.spec.in_height)
    heat = cam_mod.compute_cam(model, img, args.class_index)
    Path(args.out).write_bytes(save_pnm(map_to_image(heat)))
    print(f"wrote {args.out} (class {args.class_index})")
    return 0


def _add_pipeline_flags(p: argparse.ArgumentParser, out_size_default: int | None = None):
    p.add_argument("--backend", choices=("ftuned", "csurround", "external", "none"),
                   default="ftuned")
    p.add_argument("--levels", type=int, default=3,
                   help="pyramid levels for the csurround backend")
    p.add_argument("--alpha", type=float, default=0.30,
                   help="reweighted saliency ratio")
    p.add_argument("--margin", type=float, default=0.30,
                   help="bounding-box expansion fraction")
    if out_size_default is not None:
        p.add_argument("--out-size", type=int, default=out_size_default,
                       help="square face size fed to the model")


def _add_experiment_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="experiment config JSON (overrides other flags)")
    p.add_argument("--manifest", help="dataset manifest CSV; omit for the built-in "
                                      "synthetic set")
    p.add_argument("--task", choices=sorted(TASK_CLASSES), default="gender")
    p.add_argument("--preset", default="alexlite")
    p.add_argument("--num-classes", type=int, default=None,
                   help="softmax width when the dataset covers fewer classes "
                        "than the task defines")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--lr-drop-epoch", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--dropout-keep", type=float, default=None)
    p.add_argument("--trainable", default="",
                   help="comma-separated layer names to fine-tune (default: all)")
    p.add_argument("--k", type=int, default=5, help="cross-validation folds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--subjects", type=int, default=30,
                   help="built-in synthetic set: number of subjects")
    p.add_argument("--per-subject", type=int, default=3)
    p.add_argument("--size", type=int, default=None,
                   help="built-in synthetic set: image side (defaults to --out-size)")
    _add_pipeline_flags(p, out_size_default=64)
    p.add_argument("--out-dir", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salface", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="expand a face box, crop, pad, rescale")
    p.add_argument("--image", required=True)
    p.add_argument("--bbox", required=True, help="x,y,w,h in pixels")
    p.add_argument("--margin", type=float, default=0.30)
    p.add_argument("--out-size", type=int, default=224)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("saliency", help="compute or import a saliency map")
    p.add_argument("--image", required=True)
    p.add_argument("--backend", choices=("ftuned", "csurround", "external"),
                   default="ftuned")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--map", help="P5 PGM map for --backend external")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("blend", help="multiply a face by its reweighted map")
    p.add_argument("--image", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--alpha", type=float, default=0.30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_blend)

    p = sub.add_parser("synth", help="write a synthetic dataset + manifest")
    p.add_argument("--task", choices=_SYNTH_TASKS, default="shapes3")
    p.add_argument("--subjects", type=int, default=30)
    p.add_argument("--per-subject", type=int, default=3)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="k-fold cross-validated training run")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint on a manifest")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--task", choices=sorted(TASK_CLASSES), default="gender")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="reweight-ratio sweep with loss curves")
    _add_experiment_flags(p)
    p.add_argument("--alphas", default="",
                   help="comma-separated ratios (default 0.1,0.3,0.5,0.7,0.9)")
    p.add_argument("--threshold", type=float, default=0.2,
                   help="train-loss threshold for epochs-to-threshold")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("cam", help="export a class activation heatmap")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--class-index", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", help="data to fit a GAP head when the checkpoint "
                                      "lacks one")
    p.add_argument("--task", choices=sorted(TASK_CLASSES), default="gender")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--save-checkpoint", help="store the fitted CAM model")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_cam)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SalfaceError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
