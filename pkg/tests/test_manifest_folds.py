import numpy as np
import pytest

from salface.errors import ConfigError, ManifestError
from salface.evalharness.folds import make_folds
from salface.evalharness.manifest import ManifestRecord, load_manifest
from salface.facecrop import BBox

HEADER = "path,x,y,w,h,subject_id,label,task"


def write_manifest(tmp_path, rows):
    p = tmp_path / "manifest.csv"
    p.write_text("\n".join([HEADER] + rows) + "\n", encoding="utf-8")
    return p


class TestLoadManifest:
    def test_three_rows(self, tmp_path):
        p = write_manifest(tmp_path, [
            "a.ppm,0,0,10,10,s1,0,gender",
            "b.ppm,5,5,20,30,s2,1,gender",
            "a.ppm,40,0,10,10,s3,0,gender",
        ])
        records = load_manifest(p)
        assert len(records) == 3
        assert records[1].bbox == BBox(5, 5, 20, 30)
        assert records[2].image_path == "a.ppm"  # duplicate paths allowed

    def test_age_label_range(self, tmp_path):
        p = write_manifest(tmp_path, ["a.ppm,0,0,1,1,s1,8,age"])
        with pytest.raises(ManifestError, match="line 2.*0..7"):
            load_manifest(p)

    def test_header_only_is_empty_list(self, tmp_path):
        assert load_manifest(write_manifest(tmp_path, [])) == []

    def test_bad_header(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("path,x,y\n", encoding="utf-8")
        with pytest.raises(ManifestError, match="line 1"):
            load_manifest(p)

    def test_missing_column_names_line(self, tmp_path):
        p = write_manifest(tmp_path, ["a.ppm,0,0,1,1,s1,0,gender",
                                      "b.ppm,0,0,1,1,s1,0"])
        with pytest.raises(ManifestError, match="line 3"):
            load_manifest(p)

    def test_non_integer_bbox(self, tmp_path):
        p = write_manifest(tmp_path, ["a.ppm,zero,0,1,1,s1,0,gender"])
        with pytest.raises(ManifestError, match="non-integer bbox"):
            load_manifest(p)

    def test_unknown_task(self, tmp_path):
        p = write_manifest(tmp_path, ["a.ppm,0,0,1,1,s1,0,mood"])
        with pytest.raises(ManifestError, match="unknown task"):
            load_manifest(p)

    def test_expression_and_gender_ranges(self, tmp_path):
        good = write_manifest(tmp_path, [
            "a.ppm,0,0,1,1,s1,6,expression",
            "b.ppm,0,0,1,1,s2,1,gender",
        ])
        assert len(load_manifest(good)) == 2
        bad = write_manifest(tmp_path, ["a.ppm,0,0,1,1,s1,2,gender"])
        with pytest.raises(ManifestError):
            load_manifest(bad)


def records_for(subjects, per_subject=1):
    out = []
    for s in range(subjects):
        for i in range(per_subject):
            out.append(ManifestRecord(f"img{s}_{i}.ppm", BBox(0, 0, 4, 4),
                                      f"s{s}", 0, "gender"))
    return out


class TestMakeFolds:
    def test_ten_subjects_five_folds_exact(self):
        plan = make_folds(records_for(10), k=5, seed=0)
        sizes = [len(plan.subjects_in(f)) for f in range(5)]
        assert sizes == [2, 2, 2, 2, 2]

    def test_eleven_subjects_five_folds_within_one(self):
        plan = make_folds(records_for(11), k=5, seed=0)
        sizes = sorted(len(plan.subjects_in(f)) for f in range(5))
        assert sizes == [2, 2, 2, 2, 3]

    def test_same_seed_identical(self):
        recs = records_for(23)
        assert make_folds(recs, 5, seed=9) == make_folds(recs, 5, seed=9)

    def test_different_seed_differs(self):
        recs = records_for(23)
        assert make_folds(recs, 5, seed=1) != make_folds(recs, 5, seed=2)

    def test_every_subject_in_exactly_one_fold(self):
        recs = records_for(37, per_subject=3)
        plan = make_folds(recs, 5, seed=4)
        assert sorted(plan.assignment) == sorted({r.subject_id for r in recs})
        all_subjects = [s for f in range(5) for s in plan.subjects_in(f)]
        assert len(all_subjects) == len(set(all_subjects)) == 37

    def test_no_leakage_across_many_seeds(self):
        recs = records_for(40, per_subject=2)
        for seed in range(10):
            plan = make_folds(recs, 5, seed=seed)
            for fold in range(5):
                test_subjects = set(plan.subjects_in(fold))
                train_subjects = {
                    s for f in range(5) if f != fold for s in plan.subjects_in(f)
                }
                assert not (test_subjects & train_subjects)

    def test_too_few_subjects_rejected(self):
        with pytest.raises(ConfigError, match="subjects"):
            make_folds(records_for(3), k=5, seed=0)
