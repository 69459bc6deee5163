"""Full-pipeline experiments: preprocessing, evaluation, cross-validation,
and the reweight-ratio ablation.

The per-record pipeline is fixed: face preparation, saliency map,
convex reweighting, multiplication, then the classifier. Training folds
additionally expand every face into its four augmented variants before
the saliency stage, so each variant gets a geometrically aligned map
(external maps are transformed with the face instead of recomputed).

Everything is deterministic given the experiment config: per-fold seeds
derive from (config seed, fold index), artifacts carry no timestamps,
and reruns produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..blend import apply_weight_map, reweight_map
from ..errors import ConfigError, EvaluationError
from ..facecrop import CropConfig, prepare_face
from ..imagekit import Image, load_pnm, resize_bilinear
from ..nnet import build, forward, load_checkpoint, save_checkpoint
from ..nnet.presets import preset
from ..nnet.train import TrainConfig, TrainLog, train
from ..saliency import center_surround, frequency_tuned, load_external_map, normalize
from . import augmentation as augment_mod
from .folds import make_folds
from .manifest import TASK_CLASSES, ManifestRecord, load_manifest
from .metrics import accuracy_from_confusion, class_weights, confusion_matrix
from .reference import REFERENCE_ACCURACY

__all__ = [
    "BACKENDS",
    "PipelineConfig",
    "ExperimentConfig",
    "FoldResult",
    "Report",
    "AblationRun",
    "AblationReport",
    "preprocess_face",
    "evaluate",
    "run_experiment",
    "run_ratio_ablation",
    "write_report",
    "write_ablation_report",
    "DEFAULT_ABLATION_ALPHAS",
]

BACKENDS = ("ftuned", "csurround", "external", "none")
EXTERNAL_MAP_SUFFIX = ".sal.pgm"
DEFAULT_ABLATION_ALPHAS = (0.10, 0.30, 0.50, 0.70, 0.90)


@dataclass(frozen=True)
class PipelineConfig:
    """Preprocessing applied to every record before the classifier."""

    crop: CropConfig = CropConfig()
    backend: str = "ftuned"
    levels: int = 3
    alpha: float = 0.30

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown saliency backend {self.backend!r} "
                              f"(have: {BACKENDS})")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")


def _read_image(path: Path) -> Image:
    try:
        return load_pnm(path.read_bytes())
    except Exception as exc:
        raise EvaluationError(f"cannot read image {path}: {exc}") from exc


def _external_map_image(image_path: Path, face: Image) -> Image:
    map_path = image_path.with_suffix(EXTERNAL_MAP_SUFFIX)
    try:
        raw = map_path.read_bytes()
    except OSError as exc:
        raise EvaluationError(f"cannot read external map {map_path}: {exc}") from exc
    sal = load_external_map(raw, face.width, face.height)
    return Image.from_array(sal)


def _blend_with_map(face: Image, sal: np.ndarray, alpha: float) -> Image:
    return apply_weight_map(face, reweight_map(sal, alpha))


def preprocess_face(face: Image, pipe: PipelineConfig,
                    external_map: Image | None = None) -> Image:
    """Saliency + reweight + multiply for one prepared face."""
    if pipe.backend == "none":
        return face
    if pipe.backend == "ftuned":
        sal = frequency_tuned(face)
    elif pipe.backend == "csurround":
        sal = center_surround(face, pipe.levels)
    else:
        if external_map is None:
            raise EvaluationError("external backend needs a map")
        sal = normalize(external_map.plane(0))
    return _blend_with_map(face, sal, pipe.alpha)


def _record_face(record: ManifestRecord, pipe: PipelineConfig, base_dir: Path) -> tuple:
    path = Path(record.image_path)
    if not path.is_absolute():
        path = base_dir / path
    img = _read_image(path)
    face = prepare_face(img, record.bbox, pipe.crop)
    ext = _external_map_image(path, face) if pipe.backend == "external" else None
    return face, ext


def build_eval_batch(records, pipe: PipelineConfig, base_dir: Path):
    xs, ys = [], []
    for record in records:
        face, ext = _record_face(record, pipe, base_dir)
        xs.append(preprocess_face(face, pipe, ext).data)
        ys.append(record.label)
    return np.stack(xs), np.asarray(ys, dtype=np.int64)


def build_train_batch(records, pipe: PipelineConfig, base_dir: Path):
    """Training arrays with the four-variant augmentation per record."""
    xs, ys = [], []
    for record in records:
        face, ext = _record_face(record, pipe, base_dir)
        variants = augment_mod.augment(face)
        if ext is not None:
            map_variants = augment_mod.aligned_variants(ext)
        else:
            map_variants = [None] * len(variants)
        for var, var_map in zip(variants, map_variants):
            xs.append(preprocess_face(var, pipe, var_map).data)
            ys.append(record.label)
    return np.stack(xs), np.asarray(ys, dtype=np.int64)


def evaluate(spec, params, records, pipe: PipelineConfig, base_dir=Path("."),
             batch_size: int = 64, num_classes: int | None = None):
    """Accuracy and confusion matrix over ``records`` (argmax ties pick the
    lowest class index)."""
    records = list(records)
    if not records:
        raise EvaluationError("empty test set")
    tasks = {r.task for r in records}
    if len(tasks) != 1:
        raise EvaluationError(f"mixed tasks in one evaluation: {sorted(tasks)}")
    k = num_classes or TASK_CLASSES[records[0].task]
    x, y = build_eval_batch(records, pipe, Path(base_dir))
    preds = []
    for start in range(0, len(x), batch_size):
        probs, _ = forward(spec, params, x[start : start + batch_size], mode="eval")
        preds.append(probs.argmax(axis=1))
    mat = confusion_matrix(y, np.concatenate(preds), k)
    return accuracy_from_confusion(mat), mat


@dataclass(frozen=True)
class ExperimentConfig:
    manifest: str
    task: str
    train: TrainConfig
    backend: str = "ftuned"
    alpha: float = 0.30
    crop: CropConfig = CropConfig()
    preset: str = "alexlite"
    levels: int = 3
    k: int = 5
    seed: int = 0
    # Desk-scale datasets may cover fewer classes than the task defines
    # (a 3-class synthetic set under the 7-way expression label space);
    # None sizes the softmax to the task's full class count.
    num_classes: int | None = None

    def __post_init__(self):
        if self.task not in TASK_CLASSES:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.k < 2:
            raise ConfigError(f"k must be >= 2, got {self.k}")
        if self.num_classes is not None and not 2 <= self.num_classes <= TASK_CLASSES[self.task]:
            raise ConfigError(
                f"num_classes {self.num_classes} out of range for task {self.task!r}"
            )
        PipelineConfig(self.crop, self.backend, self.levels, self.alpha)

    @property
    def effective_num_classes(self) -> int:
        return self.num_classes or TASK_CLASSES[self.task]

    def pipeline(self, alpha: float | None = None) -> PipelineConfig:
        return PipelineConfig(
            self.crop, self.backend, self.levels,
            self.alpha if alpha is None else alpha,
        )

    def to_json(self) -> str:
        doc = {
            "manifest": self.manifest,
            "task": self.task,
            "backend": self.backend,
            "alpha": self.alpha,
            "levels": self.levels,
            "crop": {"margin": self.crop.margin, "out_size": self.crop.out_size},
            "preset": self.preset,
            "train": {
                "epochs": self.train.epochs,
                "learning_rate": self.train.learning_rate,
                "lr_drop_epoch": self.train.lr_drop_epoch,
                "batch_size": self.train.batch_size,
                "dropout_keep": self.train.dropout_keep,
                "seed": self.train.seed,
                "trainable_layers": list(self.train.trainable_layers),
            },
            "k": self.k,
            "seed": self.seed,
            "num_classes": self.num_classes,
        }
        return json.dumps(doc, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad experiment config JSON: {exc}") from exc
        try:
            train_doc = dict(doc.get("train", {}))
            train_doc["trainable_layers"] = tuple(train_doc.get("trainable_layers", ()))
            crop_doc = doc.get("crop", {})
            return cls(
                manifest=doc["manifest"],
                task=doc["task"],
                backend=doc.get("backend", "ftuned"),
                alpha=doc.get("alpha", 0.30),
                levels=doc.get("levels", 3),
                crop=CropConfig(
                    margin=crop_doc.get("margin", 0.30),
                    out_size=crop_doc.get("out_size", 224),
                ),
                preset=doc.get("preset", "alexlite"),
                train=TrainConfig(**train_doc),
                k=doc.get("k", 5),
                seed=doc.get("seed", 0),
                num_classes=doc.get("num_classes"),
            )
        except KeyError as exc:
            raise ConfigError(f"experiment config missing key {exc}") from exc
        except TypeError as exc:
            raise ConfigError(f"bad experiment config field: {exc}") from exc


@dataclass
class FoldResult:
    fold: int
    accuracy: float
    confusion: np.ndarray
    train_log: TrainLog
    checkpoint: bytes


@dataclass
class Report:
    config: ExperimentConfig
    per_fold: list[FoldResult] = field(default_factory=list)

    @property
    def accuracies(self) -> list[float]:
        return [f.accuracy for f in self.per_fold]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def stderr(self) -> float:
        accs = self.accuracies
        return float(np.std(accs, ddof=1) / np.sqrt(len(accs)))

    @property
    def pooled_confusion(self) -> np.ndarray:
        return np.sum([f.confusion for f in self.per_fold], axis=0)

    def to_json(self) -> str:
        doc = {
            "task": self.config.task,
            "backend": self.config.backend,
            "alpha": self.config.alpha,
            "preset": self.config.preset,
            "k": self.config.k,
            "seed": self.config.seed,
            "per_fold_accuracy": self.accuracies,
            "mean_accuracy": self.mean_accuracy,
            "stderr": self.stderr,
            "pooled_confusion": self.pooled_confusion.tolist(),
            "train_loss_curves": [
                [e.train_loss for e in f.train_log.epochs] for f in self.per_fold
            ],
            "reference_percent": REFERENCE_ACCURACY[self.config.task],
        }
        return json.dumps(doc, sort_keys=True, indent=2)

    def to_text(self) -> str:
        ref = REFERENCE_ACCURACY[self.config.task]
        lines = [
            f"task: {self.config.task}   backend: {self.config.backend}   "
            f"alpha: {self.config.alpha}   preset: {self.config.preset}",
            f"folds: {self.config.k}   seed: {self.config.seed}",
            "",
            "fold accuracies: "
            + "  ".join(f"{a * 100:.2f}%" for a in self.accuracies),
            f"mean accuracy:   {self.mean_accuracy * 100:.2f}% "
            f"(stderr {self.stderr * 100:.2f}%)",
            "",
            "pooled confusion (rows true, columns predicted):",
        ]
        for row in self.pooled_confusion:
            lines.append("  " + " ".join(f"{int(v):6d}" for v in row))
        lines.append("")
        lines.append(
            "published full-scale reference for this task (documentation only): "
            + ", ".join(f"{key}={val}" for key, val in sorted(ref.items()))
        )
        return "\n".join(lines) + "\n"


def _fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence((seed, fold)).generate_state(1)[0])


def _fold_train_config(cfg: TrainConfig, seed: int) -> TrainConfig:
    return TrainConfig(
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        lr_drop_epoch=cfg.lr_drop_epoch,
        batch_size=cfg.batch_size,
        dropout_keep=cfg.dropout_keep,
        seed=seed,
        trainable_layers=cfg.trainable_layers,
    )


def _load_records(cfg: ExperimentConfig):
    records = [r for r in load_manifest(cfg.manifest) if r.task == cfg.task]
    if not records:
        raise ConfigError(f"manifest {cfg.manifest} has no records for task {cfg.task!r}")
    return records, Path(cfg.manifest).parent


def run_experiment(cfg: ExperimentConfig, eval_each_epoch: bool = False) -> Report:
    """Subject-exclusive k-fold cross-validation of the full pipeline.

    Trains one fresh model per fold on the other folds (augmented,
    class-weighted) and scores the held-out fold.
    """
    records, base_dir = _load_records(cfg)
    plan = make_folds(records, cfg.k, cfg.seed)
    num_classes = cfg.effective_num_classes
    pipe = cfg.pipeline()
    report = Report(config=cfg)
    for fold in range(cfg.k):
        train_records = [r for r in records if plan.fold_of(r.subject_id) != fold]
        test_records = [r for r in records if plan.fold_of(r.subject_id) == fold]
        if not train_records or not test_records:
            raise ConfigError(f"fold {fold} has an empty split; add data or lower k")
        x_train, y_train = build_train_batch(train_records, pipe, base_dir)
        weights = class_weights(y_train, num_classes)
        seed = _fold_seed(cfg.seed, fold)
        spec = preset(cfg.preset, num_classes, in_size=cfg.crop.out_size,
                      in_channels=x_train.shape[1])
        params = build(spec, seed=seed)
        val = None
        if eval_each_epoch:
            val = build_eval_batch(test_records, pipe, base_dir)
        params, log = train(spec, params, x_train, y_train,
                            _fold_train_config(cfg.train, seed), weights, val)
        accuracy, confusion = evaluate(spec, params, test_records, pipe, base_dir,
                                       num_classes=num_classes)
        report.per_fold.append(
            FoldResult(
                fold=fold,
                accuracy=accuracy,
                confusion=confusion,
                train_log=log,
                checkpoint=save_checkpoint(spec, params),
            )
        )
    return report


def write_report(report: Report, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out_dir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    for result in report.per_fold:
        curve = "\n".join(result.train_log.csv_rows()) + "\n"
        (out_dir / f"fold{result.fold}_curve.csv").write_text(curve, encoding="utf-8")
        (out_dir / f"fold{result.fold}.ckpt").write_bytes(result.checkpoint)


@dataclass
class AblationRun:
    alpha: float
    train_log: TrainLog
    epochs_to_threshold: int | None
    final_val_accuracy: float | None


@dataclass
class AblationReport:
    config: ExperimentConfig
    loss_threshold: float
    runs: list[AblationRun] = field(default_factory=list)

    def run_for(self, alpha: float) -> AblationRun:
        for run in self.runs:
            if abs(run.alpha - alpha) < 1e-12:
                return run
        raise KeyError(f"no ablation run for alpha {alpha}")

    def to_json(self) -> str:
        doc = {
            "task": self.config.task,
            "loss_threshold": self.loss_threshold,
            "alphas": [r.alpha for r in self.runs],
            "epochs_to_threshold": {
                f"{r.alpha:.2f}": r.epochs_to_threshold for r in self.runs
            },
            "final_val_accuracy": {
                f"{r.alpha:.2f}": r.final_val_accuracy for r in self.runs
            },
        }
        return json.dumps(doc, sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [
            f"reweight-ratio ablation   task: {self.config.task}   "
            f"backend: {self.config.backend}   seed: {self.config.seed}",
            f"epochs-to-train-loss-{self.loss_threshold}:",
        ]
        for r in self.runs:
            reached = r.epochs_to_threshold if r.epochs_to_threshold else "never"
            acc = "n/a" if r.final_val_accuracy is None else f"{r.final_val_accuracy * 100:.1f}%"
            lines.append(f"  alpha {r.alpha:.2f}: {reached} epochs, final val acc {acc}")
        return "\n".join(lines) + "\n"


def run_ratio_ablation(cfg: ExperimentConfig, alphas=None,
                       loss_threshold: float = 0.2) -> AblationReport:
    """Train once per alpha on a fixed subject-exclusive train/val split.

    Fold 0 of the config's fold plan is the validation set; everything
    else trains. Each run shares seeds and data, so only the reweight
    ratio differs between curves.
    """
    alphas = DEFAULT_ABLATION_ALPHAS if alphas is None else tuple(alphas)
    records, base_dir = _load_records(cfg)
    plan = make_folds(records, cfg.k, cfg.seed)
    num_classes = cfg.effective_num_classes
    train_records = [r for r in records if plan.fold_of(r.subject_id) != 0]
    val_records = [r for r in records if plan.fold_of(r.subject_id) == 0]
    if not train_records or not val_records:
        raise ConfigError("ablation split is empty; add data or lower k")
    seed = _fold_seed(cfg.seed, 0)
    report = AblationReport(config=cfg, loss_threshold=loss_threshold)
    for alpha in alphas:
        pipe = cfg.pipeline(alpha)
        x_train, y_train = build_train_batch(train_records, pipe, base_dir)
        weights = class_weights(y_train, num_classes)
        val = build_eval_batch(val_records, pipe, base_dir)
        spec = preset(cfg.preset, num_classes, in_size=cfg.crop.out_size,
                      in_channels=x_train.shape[1])
        params = build(spec, seed=seed)
        _, log = train(spec, params, x_train, y_train,
                       _fold_train_config(cfg.train, seed), weights, val)
        report.runs.append(
            AblationRun(
                alpha=alpha,
                train_log=log,
                epochs_to_threshold=log.epochs_to_loss(loss_threshold),
                final_val_accuracy=log.final_val_accuracy(),
            )
        )
    return report


def write_ablation_report(report: AblationReport, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "ablation.json").write_text(report.to_json(), encoding="utf-8")
    (out_dir / "ablation.txt").write_text(report.to_text(), encoding="utf-8")
    for run in report.runs:
        curve = "\n".join(run.train_log.csv_rows()) + "\n"
        (out_dir / f"curve_alpha_{run.alpha:.2f}.csv").write_text(curve, encoding="utf-8")
