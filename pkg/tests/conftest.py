from pathlib import Path

import numpy as np
import pytest

from qtmt_ssimv.media_io import Plane, load_pgm

CORPUS = Path(__file__).resolve().parent.parent / "data" / "corpus"


def random_plane(rng, h, w, bit_depth=8, smooth=False):
    hi = (1 << bit_depth) - 1
    if smooth:
        # low-frequency content with mild noise, closer to natural images
        ys, xs = np.mgrid[0:h, 0:w]
        base = hi / 2 + hi / 3 * np.sin(xs / rng.uniform(3, 9) + rng.uniform(0, 6)) \
            * np.cos(ys / rng.uniform(3, 9))
        arr = base + rng.normal(0, hi / 40, size=(h, w))
        return Plane(np.clip(np.rint(arr), 0, hi).astype(np.uint16), bit_depth)
    return Plane(rng.integers(0, hi + 1, size=(h, w)), bit_depth)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def corpus():
    paths = sorted(CORPUS.glob("*.pgm"))
    return [(p.stem, load_pgm(p)) for p in paths]
