"""Dataset manifests.

A manifest is a UTF-8 CSV with header ``path,x,y,w,h,subject_id,label,task``
and one face per row. The same image path may appear on several rows
(multiple faces per photo). Labels are class indices checked against the
task's class count: 8 age groups, 2 genders, 7 expressions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..errors import ManifestError
from ..facecrop import BBox

__all__ = ["TASK_CLASSES", "ManifestRecord", "load_manifest"]

TASK_CLASSES = {"age": 8, "gender": 2, "expression": 7}

_HEADER = ["path", "x", "y", "w", "h", "subject_id", "label", "task"]


@dataclass(frozen=True)
class ManifestRecord:
    image_path: str
    bbox: BBox
    subject_id: str
    label: int
    task: str


def load_manifest(path) -> list[ManifestRecord]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ManifestError(f"{path}: empty file, expected header {','.join(_HEADER)}")
    if rows[0] != _HEADER:
        raise ManifestError(
            f"{path}: line 1: bad header {','.join(rows[0])!r}, "
            f"expected {','.join(_HEADER)!r}"
        )
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(_HEADER):
            raise ManifestError(f"{path}: line {lineno}: expected {len(_HEADER)} fields")
        img, x, y, w, h, subject, label, task = row
        try:
            x, y, w, h = int(x), int(y), int(w), int(h)
        except ValueError as exc:
            raise ManifestError(f"{path}: line {lineno}: non-integer bbox field") from exc
        try:
            label = int(label)
        except ValueError as exc:
            raise ManifestError(f"{path}: line {lineno}: non-integer label") from exc
        if task not in TASK_CLASSES:
            raise ManifestError(
                f"{path}: line {lineno}: unknown task {task!r} "
                f"(expected one of {sorted(TASK_CLASSES)})"
            )
        k = TASK_CLASSES[task]
        if not 0 <= label < k:
            raise ManifestError(
                f"{path}: line {lineno}: label {label} out of range 0..{k - 1} "
                f"for task {task!r}"
            )
        try:
            bbox = BBox(x, y, w, h)
        except Exception as exc:
            raise ManifestError(f"{path}: line {lineno}: {exc}") from exc
        records.append(ManifestRecord(img, bbox, subject, label, task))
    return records
