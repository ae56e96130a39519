"""Lossless 512x512 RGB test corpus built from scikit-image's bundled samples."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

SIZE = 512


def natural_sources():
    """Color photographs."""
    from skimage import data
    from sklearn.datasets import load_sample_images

    left, right, _ = data.stereo_motorcycle()
    china, flower = load_sample_images().images
    return {
        "astronaut": data.astronaut(),
        "coffee": data.coffee(),
        "chelsea": data.chelsea(),
        "rocket": data.rocket(),
        "retina": data.retina(),
        "hubble": data.hubble_deep_field(),
        "ihc": data.immunohistochemistry(),
        "motorcycle_left": left,
        "motorcycle_right": right,
        "china": china,
        "flower": flower,
    }


def synthetic_sources():
    """Flat-colored graphics with large saturated areas: a stress set, not photographs."""
    from skimage import data

    logo = data.logo().astype(np.float64)
    alpha = logo[..., 3:] / 255.0
    logo_on_white = np.round(logo[..., :3] * alpha + 255.0 * (1 - alpha)).astype(np.uint8)
    return {"colorwheel": data.colorwheel(), "logo": logo_on_white}


def _square(arr: np.ndarray) -> np.ndarray:
    h, w = arr.shape[:2]
    s = min(h, w)
    r0, c0 = (h - s) // 2, (w - s) // 2
    im = Image.fromarray(arr[r0:r0 + s, c0:c0 + s])
    if s != SIZE:
        im = im.resize((SIZE, SIZE), Image.LANCZOS)
    return np.asarray(im)


def build_corpus(directory, synthetic: bool = False) -> list[Path]:
    """Write each sample as PNG (once) and return the paths, sorted by name."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    sources = synthetic_sources() if synthetic else natural_sources()
    for name, arr in sources.items():
        p = d / f"{name}.png"
        if not p.exists():
            Image.fromarray(_square(arr)).save(p)
        paths.append(p)
    return sorted(paths)
