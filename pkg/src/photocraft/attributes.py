"""Scalar photographic attribute measurements and their deltas.

Four global attributes, all computed in Lab/D65: exposure (mean L*/100),
contrast (population std of L*/100), saturation (mean chroma/100, clamped),
and color temperature in mireds (gray-world estimate). Mireds rather than
kelvin keep one tolerance meaningful across the whole temperature range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .color import D65, Image, chromaticity_to_cct, estimate_white_chromaticity, kelvin_to_mired, rgb_to_lab
from .errors import AllBlackImage, OutOfLocus

ATTRIBUTE_KEYS = ("exposure", "contrast", "saturation", "cct")

D65_FALLBACK_MIRED = kelvin_to_mired(chromaticity_to_cct(D65))


@dataclass(frozen=True)
class AttributeVector:
    """One image's attribute values; cct_fallback marks a failed estimate."""

    exposure: float
    contrast: float
    saturation: float
    cct_mired: float
    cct_fallback: bool = False

    def value_for(self, attribute: str) -> float:
        if attribute == "cct":
            return self.cct_mired
        if attribute in ("exposure", "contrast", "saturation"):
            return getattr(self, attribute)
        raise KeyError(attribute)

    def as_dict(self) -> dict:
        return {
            "exposure": self.exposure,
            "contrast": self.contrast,
            "saturation": self.saturation,
            "cct_mired": self.cct_mired,
            "cct_fallback": self.cct_fallback,
        }


@dataclass(frozen=True)
class AttributeDelta:
    """Signed per-attribute differences, same units as AttributeVector."""

    exposure: float
    contrast: float
    saturation: float
    cct_mired: float

    def value_for(self, attribute: str) -> float:
        if attribute == "cct":
            return self.cct_mired
        if attribute in ("exposure", "contrast", "saturation"):
            return getattr(self, attribute)
        raise KeyError(attribute)

    def as_dict(self) -> dict:
        return {
            "exposure": self.exposure,
            "contrast": self.contrast,
            "saturation": self.saturation,
            "cct_mired": self.cct_mired,
        }


def measure_attributes(img: Image) -> AttributeVector:
    """Measure the four attributes; a failed CCT estimate falls back to D65."""
    lab = rgb_to_lab(img).data
    lightness = lab[..., 0]
    exposure = min(1.0, max(0.0, float(lightness.mean()) / 100.0))
    contrast = min(0.5, float(lightness.std()) / 100.0)
    chroma = np.hypot(lab[..., 1], lab[..., 2])
    saturation = min(1.0, float(chroma.mean()) / 100.0)
    try:
        mired = kelvin_to_mired(chromaticity_to_cct(estimate_white_chromaticity(img)))
        fallback = False
    except (AllBlackImage, OutOfLocus):
        mired = D65_FALLBACK_MIRED
        fallback = True
    return AttributeVector(exposure, contrast, saturation, mired, fallback)


def attribute_delta(a: Image, b: Image) -> AttributeDelta:
    """Per-attribute measure(a) - measure(b); exactly antisymmetric."""
    va = measure_attributes(a)
    vb = measure_attributes(b)
    return AttributeDelta(
        exposure=va.exposure - vb.exposure,
        contrast=va.contrast - vb.contrast,
        saturation=va.saturation - vb.saturation,
        cct_mired=va.cct_mired - vb.cct_mired,
    )
