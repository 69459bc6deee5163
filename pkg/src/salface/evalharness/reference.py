"""Reference results of the full-scale pipeline, shipped for report context.

These numbers come from the published large-scale experiments (Adience
and AffectNet with pretrained backbones on GPU hardware). They are not
reproducible at desk scale and are included only so experiment reports
can print how far a run sits from the published operating points.

Transcription note: in the published age confusion matrix the "4-6" row
sums to 101.8 rather than 100 (a defect in the source itself, kept
verbatim here); every other row sums to 100.0. The published gender
accuracy appears once as 91.8 +- 1.2 (table) and once as 91.8 +- 1.7
(running text); both are kept.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ADIENCE_IMAGES",
    "ADIENCE_SUBJECTS",
    "AGE_GROUPS",
    "EXPRESSIONS",
    "AFFECTNET_TRAIN_COUNTS",
    "AFFECTNET_VAL_COUNTS",
    "AFFECTNET_TEST_COUNTS",
    "REFERENCE_ACCURACY",
    "AGE_CONFUSION_PERCENT",
    "EXPRESSION_CONFUSION_FRAMES",
    "AGE_CONFUSION_ANOMALOUS_ROWS",
]

ADIENCE_IMAGES = 26_000  # approximate published corpus size
ADIENCE_SUBJECTS = 2_284

AGE_GROUPS = ("0-2", "4-6", "8-13", "15-20", "25-32", "38-43", "48-53", "60-")
EXPRESSIONS = ("Neutral", "Happy", "Sad", "Surprise", "Fear", "Disgust", "Anger")

AFFECTNET_TRAIN_COUNTS = {
    "Neutral": 59_900,
    "Happy": 107_532,
    "Sad": 20_367,
    "Surprise": 11_272,
    "Fear": 5_102,
    "Disgust": 3_042,
    "Anger": 19_906,
}
AFFECTNET_VAL_COUNTS = {
    "Neutral": 14_973,
    "Happy": 26_883,
    "Sad": 5_092,
    "Surprise": 2_818,
    "Fear": 1_276,
    "Disgust": 761,
    "Anger": 4_976,
}
AFFECTNET_TEST_COUNTS = {name: 500 for name in EXPRESSIONS}

# Published accuracy (percent) of the saliency-reweighted pipeline and of
# the identical pipeline with the saliency stage disabled.
REFERENCE_ACCURACY = {
    "age": {
        "with_saliency": 62.11,
        "with_saliency_stderr": 3.2,
        "without_saliency": 52.2,
        "without_saliency_stderr": 3.9,
    },
    "gender": {
        "with_saliency": 91.8,
        "with_saliency_stderr": 1.2,
        "with_saliency_stderr_text": 1.7,  # the prose states 1.7
        "without_saliency": 83.4,
        "without_saliency_stderr": 1.6,
    },
    "expression": {
        "with_saliency": 67.65,
        "without_saliency": 59.2,
    },
}

# Rows are true age groups, columns predicted, values percent.
AGE_CONFUSION_PERCENT = np.array(
    [
        [92.1, 4.2, 0.0, 1.3, 0.0, 2.4, 0.0, 0.0],
        [22.2, 70.2, 5.8, 3.1, 0.0, 0.0, 0.4, 0.1],
        [3.6, 12.6, 52.8, 13.2, 11.7, 3.8, 2.3, 0.0],
        [1.4, 0.3, 13.7, 36.3, 42.6, 3.7, 1.2, 0.8],
        [0.2, 0.0, 0.1, 4.7, 88.4, 3.8, 2.3, 0.5],
        [0.0, 0.4, 0.7, 3.8, 49.8, 29.2, 13.8, 2.3],
        [0.8, 0.0, 0.0, 0.9, 2.6, 18.3, 47.8, 29.6],
        [0.0, 0.3, 0.4, 2.8, 1.7, 3.5, 11.2, 80.1],
    ]
)

# Source rows that do not sum to 100 within rounding slop (see module
# docstring); index into AGE_GROUPS.
AGE_CONFUSION_ANOMALOUS_ROWS = (1,)

# Rows are true expressions, columns predicted, values are frame counts
# out of 500 test frames per class.
EXPRESSION_CONFUSION_FRAMES = np.array(
    [
        [312, 33, 39, 37, 16, 19, 44],
        [19, 382, 10, 25, 6, 42, 16],
        [106, 14, 322, 17, 20, 18, 3],
        [39, 25, 15, 365, 43, 7, 6],
        [11, 26, 30, 58, 342, 24, 9],
        [25, 17, 7, 19, 91, 331, 10],
        [30, 8, 29, 28, 29, 62, 314],
    ],
    dtype=np.int64,
)
