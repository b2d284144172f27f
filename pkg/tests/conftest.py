import random

import pytest

from logoground.geometry import BBox


def random_box(rng: random.Random, lo: int = 0, hi: int = 100, max_side: int = 60) -> BBox:
    """Integer-coordinate box inside [lo, hi]^2 with sides in [1, max_side]."""
    x1 = rng.randint(lo, hi - 1)
    y1 = rng.randint(lo, hi - 1)
    w = rng.randint(1, min(max_side, hi - x1))
    h = rng.randint(1, min(max_side, hi - y1))
    return BBox(float(x1), float(y1), float(x1 + w), float(y1 + h))


def random_box_set(rng: random.Random, n: int, **kwargs) -> list:
    return [random_box(rng, **kwargs) for _ in range(n)]


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
