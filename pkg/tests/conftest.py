import numpy as np
import pytest

from salface.imagekit import Image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, channels=3, h=8, w=8):
    return Image(rng.random((channels, h, w)))


def gray_image(values):
    """2D list/array -> one-channel Image."""
    return Image(np.asarray(values, dtype=np.float64)[None, :, :])
