"""Subject-exclusive k-fold assignment.

Every subject lands in exactly one fold, so no identity ever appears on
both sides of a train/test split. Subjects are shuffled by a seeded
generator and dealt round-robin, which keeps fold subject counts within
one of each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

__all__ = ["FoldPlan", "make_folds"]


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: dict[str, int]  # subject id -> fold index

    def fold_of(self, subject_id: str) -> int:
        return self.assignment[subject_id]

    def subjects_in(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f == fold)


def make_folds(records, k: int = 5, seed: int = 0) -> FoldPlan:
    """Deal the distinct subjects of ``records`` into k folds."""
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    subjects = sorted({r.subject_id for r in records})
    if len(subjects) < k:
        raise ConfigError(
            f"need at least {k} distinct subjects for {k} folds, have {len(subjects)}"
        )
    order = np.random.default_rng(seed).permutation(len(subjects))
    assignment = {subjects[int(idx)]: pos % k for pos, idx in enumerate(order)}
    return FoldPlan(k=k, assignment=assignment)
