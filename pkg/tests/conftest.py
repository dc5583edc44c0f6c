"""Shared test-image generators."""

import numpy as np
from scipy import ndimage

from photocraft.attributes import measure_attributes
from photocraft.color import (
    Image,
    bradford_adaptation,
    chromaticity_to_cct,
    estimate_white_chromaticity,
    linear_to_srgb,
    planckian_chromaticity,
    srgb_to_linear,
)


def natural_image(rng, width=32, height=32, low=0.2, high=0.75, chroma=0.5):
    """Smooth random image with mid-range tones and bounded chroma."""
    coarse = rng.random((6, 6, 3))
    up = ndimage.zoom(coarse, (height / 6, width / 6, 1), order=3, mode="nearest")
    up = np.clip(up[:height, :width], 0.0, 1.0)
    gray = up.mean(axis=2, keepdims=True)
    return Image(low + (high - low) * (gray + chroma * (up - gray)))


def balanced_corpus_image(rng, sat_target, lo=0.30, hi=0.72, width=32, height=32):
    """Synthesis-corpus image: tones in [lo, hi], mean chroma near sat_target,
    and the gray-world white balanced onto the Planckian locus so that color
    temperature edits are invertible."""
    coarse = rng.random((6, 6, 3))
    up = ndimage.zoom(coarse, (height / 6, width / 6, 1), order=3, mode="nearest")
    up = np.clip(up[:height, :width], 0.0, 1.0)
    tone = lo + (hi - lo) * up.mean(axis=2, keepdims=True)
    dev = up - up.mean(axis=2, keepdims=True)
    probe = Image(np.clip(tone + 0.1 * dev, 0.0, 1.0))
    probe_sat = max(measure_attributes(probe).saturation, 1e-6)
    amp = 0.1 * sat_target / probe_sat
    img = Image(np.clip(tone + amp * dev, 0.0, 1.0))
    white = estimate_white_chromaticity(img)
    target = planckian_chromaticity(chromaticity_to_cct(white))
    adapt = bradford_adaptation(white, target)
    return Image(linear_to_srgb(srgb_to_linear(img.data) @ adapt.T))


def gamut_clipped_fraction(img: Image) -> float:
    """Fraction of pixels with any channel pinned at the gamut boundary."""
    at_edge = (img.data <= 0.0) | (img.data >= 1.0)
    return float(np.mean(np.any(at_edge, axis=2)))
