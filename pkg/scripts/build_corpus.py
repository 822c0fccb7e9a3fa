"""Regenerate the bundled test corpus from scikit-image sample images.

Each image is converted to 8-bit grey and centre-cropped to 256x256, then
written as binary PGM under data/corpus/. Needs scikit-image (dev only).

    python scripts/build_corpus.py
"""

from pathlib import Path

import numpy as np
from skimage import color, data, util

from qtmt_ssimv.media_io import Plane, write_pgm

SIZE = 256
IMAGES = ("camera", "astronaut", "coffee", "chelsea", "moon", "coins")
OUT = Path(__file__).resolve().parent.parent / "data" / "corpus"


def centre_crop(img: np.ndarray, size: int) -> np.ndarray:
    h, w = img.shape
    y, x = (h - size) // 2, (w - size) // 2
    return img[y:y + size, x:x + size]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name in IMAGES:
        img = getattr(data, name)()
        if img.ndim == 3:
            img = color.rgb2gray(img[..., :3])
        grey = util.img_as_ubyte(img)
        write_pgm(Plane(centre_crop(grey, SIZE)), OUT / f"{name}.pgm")
        print(name, grey.shape)


if __name__ == "__main__":
    main()
