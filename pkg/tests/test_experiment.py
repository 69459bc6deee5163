import json
from pathlib import Path

import numpy as np
import pytest

from salface.errors import ConfigError, EvaluationError
from salface.evalharness import augmentation
from salface.evalharness.experiment import (
    ExperimentConfig,
    PipelineConfig,
    evaluate,
    run_experiment,
    run_ratio_ablation,
    write_ablation_report,
    write_report,
)
from salface.evalharness.folds import make_folds
from salface.evalharness.manifest import load_manifest
from salface.evalharness.synthetic import shapes_task, write_dataset
from salface.facecrop import CropConfig
from salface.nnet import build
from salface.nnet.presets import alexlite
from salface.nnet.train import TrainConfig


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("shapes")
    samples = shapes_task(40, 2, size=32, num_classes=2, seed=5)
    manifest = write_dataset(samples, root)
    return manifest


def quick_config(manifest, **over):
    defaults = dict(
        manifest=str(manifest),
        task="gender",
        backend="ftuned",
        alpha=0.30,
        crop=CropConfig(margin=0.0, out_size=32),
        preset="alexlite",
        train=TrainConfig(epochs=15, learning_rate=0.02, batch_size=16, seed=1,
                          dropout_keep=0.6),
        k=2,
        seed=0,
    )
    defaults.update(over)
    return ExperimentConfig(**defaults)


@pytest.fixture(scope="module")
def separable_report(dataset_dir):
    return run_experiment(quick_config(dataset_dir))


class TestRunExperiment:
    def test_both_folds_at_least_ninety_percent(self, separable_report):
        assert all(a >= 0.9 for a in separable_report.accuracies)

    def test_mean_and_stderr_match_independent_arithmetic(self, separable_report):
        accs = separable_report.accuracies
        mean = sum(accs) / len(accs)
        var = sum((a - mean) ** 2 for a in accs) / (len(accs) - 1)
        stderr = (var**0.5) / (len(accs) ** 0.5)
        assert abs(separable_report.mean_accuracy - mean) < 1e-12
        assert abs(separable_report.stderr - stderr) < 1e-12

    def test_confusion_row_sums_are_test_counts(self, separable_report, dataset_dir):
        records = load_manifest(dataset_dir)
        pooled = separable_report.pooled_confusion
        assert pooled.sum() == len(records)
        counts = np.bincount([r.label for r in records], minlength=2)
        np.testing.assert_array_equal(pooled.sum(axis=1), counts)

    def test_trace_total_equals_mean_over_records(self, separable_report):
        pooled = separable_report.pooled_confusion
        per_record_acc = np.trace(pooled) / pooled.sum()
        # pooled accuracy is a weighted fold mean; with equal fold sizes it
        # must match the unweighted mean exactly
        assert per_record_acc == pytest.approx(separable_report.mean_accuracy, abs=1e-12)

    def test_report_files_deterministic(self, dataset_dir, tmp_path):
        cfg = quick_config(dataset_dir, train=TrainConfig(
            epochs=2, learning_rate=0.02, batch_size=16, seed=1, dropout_keep=0.6))
        outs = []
        for name in ("a", "b"):
            report = run_experiment(cfg)
            out = tmp_path / name
            write_report(report, out)
            outs.append(out)
        for fname in ("report.json", "report.txt", "fold0.ckpt", "fold1.ckpt",
                      "fold0_curve.csv", "fold1_curve.csv"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()

    def test_alpha_zero_equals_no_saliency_backend_bitwise(self, dataset_dir):
        cfg_zero = quick_config(dataset_dir, alpha=0.0, train=TrainConfig(
            epochs=2, learning_rate=0.02, batch_size=16, seed=1, dropout_keep=0.6))
        cfg_none = quick_config(dataset_dir, backend="none", train=TrainConfig(
            epochs=2, learning_rate=0.02, batch_size=16, seed=1, dropout_keep=0.6))
        a = run_experiment(cfg_zero)
        b = run_experiment(cfg_none)
        assert a.accuracies == b.accuracies
        for fa, fb in zip(a.per_fold, b.per_fold):
            assert fa.checkpoint == fb.checkpoint
            assert [e.train_loss for e in fa.train_log.epochs] == [
                e.train_loss for e in fb.train_log.epochs
            ]

    def test_augmentation_counts_and_eval_isolation(self, dataset_dir):
        cfg = quick_config(dataset_dir, train=TrainConfig(
            epochs=1, learning_rate=0.02, batch_size=16, seed=1))
        records = load_manifest(dataset_dir)
        plan = make_folds(records, cfg.k, cfg.seed)
        expected = sum(
            1
            for fold in range(cfg.k)
            for r in records
            if plan.fold_of(r.subject_id) != fold
        )
        augmentation.reset_call_count()
        run_experiment(cfg)
        assert augmentation.call_count == expected
        # pure evaluation never augments
        spec = alexlite(2, in_size=32)
        params = build(spec, seed=0)
        augmentation.reset_call_count()
        evaluate(spec, params, records[:4], cfg.pipeline(),
                 base_dir=Path(dataset_dir).parent)
        assert augmentation.call_count == 0

    def test_external_backend_uses_sidecar_maps(self, dataset_dir):
        cfg = quick_config(dataset_dir, backend="external", train=TrainConfig(
            epochs=1, learning_rate=0.02, batch_size=16, seed=1))
        report = run_experiment(cfg)
        assert len(report.per_fold) == 2


class TestEvaluate:
    def test_empty_test_set_rejected(self):
        spec = alexlite(2, in_size=32)
        with pytest.raises(EvaluationError, match="empty"):
            evaluate(spec, build(spec, seed=0), [], PipelineConfig(
                crop=CropConfig(margin=0.0, out_size=32)))

    def test_unreadable_image_lists_path(self, dataset_dir):
        records = load_manifest(dataset_dir)
        broken = records[0].__class__(
            "gone_missing.ppm", records[0].bbox, "sX", 0, "gender"
        )
        spec = alexlite(2, in_size=32)
        with pytest.raises(EvaluationError, match="gone_missing.ppm"):
            evaluate(spec, build(spec, seed=0), [broken],
                     PipelineConfig(crop=CropConfig(margin=0.0, out_size=32)),
                     base_dir=Path(dataset_dir).parent)


class TestRatioAblation:
    def test_runs_and_writes_curves(self, dataset_dir, tmp_path):
        cfg = quick_config(dataset_dir, train=TrainConfig(
            epochs=3, learning_rate=0.02, batch_size=16, seed=1))
        report = run_ratio_ablation(cfg, alphas=(0.1, 0.9), loss_threshold=0.5)
        assert [r.alpha for r in report.runs] == [0.1, 0.9]
        for run in report.runs:
            assert len(run.train_log.epochs) == 3
            assert run.final_val_accuracy is not None
        write_ablation_report(report, tmp_path / "ablation")
        files = {p.name for p in (tmp_path / "ablation").iterdir()}
        assert files == {"ablation.json", "ablation.txt",
                         "curve_alpha_0.10.csv", "curve_alpha_0.90.csv"}
        doc = json.loads((tmp_path / "ablation" / "ablation.json").read_text())
        assert set(doc["epochs_to_threshold"]) == {"0.10", "0.90"}

    def test_default_alpha_grid(self, dataset_dir):
        from salface.evalharness.experiment import DEFAULT_ABLATION_ALPHAS

        assert DEFAULT_ABLATION_ALPHAS == (0.10, 0.30, 0.50, 0.70, 0.90)


class TestExperimentConfig:
    def test_json_round_trip(self, dataset_dir):
        cfg = quick_config(dataset_dir, backend="external", alpha=0.5, num_classes=2)
        again = ExperimentConfig.from_json(cfg.to_json())
        assert again == cfg

    def test_bad_json_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json("{not json")
        with pytest.raises(ConfigError, match="missing key"):
            ExperimentConfig.from_json("{}")

    def test_unknown_task_rejected(self, dataset_dir):
        with pytest.raises(ConfigError):
            quick_config(dataset_dir, task="mood")
