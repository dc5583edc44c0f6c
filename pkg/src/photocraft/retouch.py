"""Parameterized retouching operators and rule-based suggestion application.

Exposure acts in linear light; contrast and saturation act in Lab; color
temperature shifts use gray-world estimation plus Bradford adaptation. The
stack composes in a fixed canonical order (exposure -> contrast ->
saturation -> cct) so that pairs and rewards are reproducible.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .color import (
    Image,
    LabImage,
    bradford_adaptation,
    chromaticity_to_cct,
    estimate_white_chromaticity,
    kelvin_to_mired,
    lab_to_rgb,
    linear_to_srgb,
    mired_to_kelvin,
    planckian_chromaticity,
    rgb_to_lab,
    srgb_to_linear,
)
from .dsl import MAGNITUDE_WORDS, EditSuggestion
from .errors import DuplicateAttribute, ParamOutOfRange

log = logging.getLogger(__name__)

MAX_EXPOSURE_EV = 4.0
MAX_SCALE = 4.0
MAX_CCT_SHIFT_MIRED = 200.0


@dataclass(frozen=True)
class RetouchParams:
    """One global retouch: EV gain, L* contrast scale, chroma scale, mired shift.

    The identity element is (0, 1, 1, 0).
    """

    exposure_ev: float = 0.0
    contrast_scale: float = 1.0
    saturation_scale: float = 1.0
    cct_shift_mired: float = 0.0

    def __post_init__(self):
        if not abs(self.exposure_ev) <= MAX_EXPOSURE_EV:
            raise ParamOutOfRange(f"|exposure_ev| must be <= {MAX_EXPOSURE_EV}")
        if not 0.0 < self.contrast_scale <= MAX_SCALE:
            raise ParamOutOfRange(f"contrast_scale must be in (0, {MAX_SCALE}]")
        if not 0.0 <= self.saturation_scale <= MAX_SCALE:
            raise ParamOutOfRange(f"saturation_scale must be in [0, {MAX_SCALE}]")
        if not abs(self.cct_shift_mired) <= MAX_CCT_SHIFT_MIRED:
            raise ParamOutOfRange(f"|cct_shift_mired| must be <= {MAX_CCT_SHIFT_MIRED}")

    def is_identity(self) -> bool:
        return self == IDENTITY_PARAMS

    def inverse(self) -> "RetouchParams":
        """Parameters undoing this retouch; raises if a reciprocal leaves bounds."""
        if self.saturation_scale == 0.0:
            raise ParamOutOfRange("saturation_scale 0 is not invertible")
        return RetouchParams(
            exposure_ev=-self.exposure_ev,
            contrast_scale=1.0 / self.contrast_scale,
            saturation_scale=1.0 / self.saturation_scale,
            cct_shift_mired=-self.cct_shift_mired,
        )

    def as_dict(self) -> dict:
        return {
            "exposure_ev": self.exposure_ev,
            "contrast_scale": self.contrast_scale,
            "saturation_scale": self.saturation_scale,
            "cct_shift_mired": self.cct_shift_mired,
        }


IDENTITY_PARAMS = RetouchParams()


def _check_words(name, mapping, decreasing=False):
    missing = [w for w in MAGNITUDE_WORDS if w not in mapping]
    if missing:
        raise ValueError(f"{name} is missing magnitude words: {missing}")
    values = [mapping[w] for w in MAGNITUDE_WORDS]
    ordered = all(a > b for a, b in zip(values, values[1:])) if decreasing else \
        all(a < b for a, b in zip(values, values[1:]))
    if not ordered:
        raise ValueError(f"{name} must be monotone over {MAGNITUDE_WORDS}: {values}")


@dataclass(frozen=True)
class MagnitudeTable:
    """Numeric parameters behind the magnitude words, overridable via JSON."""

    exposure_ev: dict = field(default_factory=lambda: {"slight": 0.3, "moderate": 0.7, "strong": 1.2})
    contrast_increase: dict = field(default_factory=lambda: {"slight": 1.10, "moderate": 1.25, "strong": 1.50})
    contrast_decrease: dict = field(default_factory=lambda: {"slight": 0.90, "moderate": 0.80, "strong": 0.67})
    saturation_increase: dict = field(default_factory=lambda: {"slight": 1.10, "moderate": 1.25, "strong": 1.50})
    saturation_decrease: dict = field(default_factory=lambda: {"slight": 0.90, "moderate": 0.80, "strong": 0.67})
    cct_mired: dict = field(default_factory=lambda: {"slight": 10.0, "moderate": 25.0, "strong": 50.0})

    def __post_init__(self):
        _check_words("exposure_ev", self.exposure_ev)
        _check_words("contrast_increase", self.contrast_increase)
        _check_words("contrast_decrease", self.contrast_decrease, decreasing=True)
        _check_words("saturation_increase", self.saturation_increase)
        _check_words("saturation_decrease", self.saturation_decrease, decreasing=True)
        _check_words("cct_mired", self.cct_mired)
        if any(v <= 0 for v in self.exposure_ev.values()):
            raise ValueError("exposure_ev magnitudes must be positive")
        if any(v <= 0 for v in self.cct_mired.values()):
            raise ValueError("cct_mired magnitudes must be positive")
        if any(v <= 1.0 for v in list(self.contrast_increase.values()) + list(self.saturation_increase.values())):
            raise ValueError("increase ratios must exceed 1")
        if any(not 0.0 < v < 1.0 for v in list(self.contrast_decrease.values()) + list(self.saturation_decrease.values())):
            raise ValueError("decrease ratios must lie in (0, 1)")

    def parameter(self, attribute: str, direction: str, magnitude: str = "moderate") -> float:
        """Signed/ratio operator parameter for one suggestion.

        An unspecified magnitude applies as "moderate".
        """
        word = "moderate" if magnitude in (None, "unspecified") else magnitude
        if attribute == "exposure":
            value = self.exposure_ev[word]
            return value if direction == "increase" else -value
        if attribute == "contrast":
            return self.contrast_increase[word] if direction == "increase" else self.contrast_decrease[word]
        if attribute == "saturation":
            return self.saturation_increase[word] if direction == "increase" else self.saturation_decrease[word]
        if attribute == "cct":
            value = self.cct_mired[word]
            return value if direction == "warmer" else -value
        raise ValueError(f"no numeric parameter for attribute {attribute!r}")


DEFAULT_MAGNITUDES = MagnitudeTable()


def load_magnitude_table(path: str | os.PathLike) -> MagnitudeTable:
    """Load a JSON magnitude table; given fields merge over the defaults."""
    with open(path, encoding="utf-8") as fh:
        overrides = json.load(fh)
    base = DEFAULT_MAGNITUDES
    kwargs = {}
    for name in ("exposure_ev", "contrast_increase", "contrast_decrease",
                 "saturation_increase", "saturation_decrease", "cct_mired"):
        merged = dict(getattr(base, name))
        merged.update(overrides.get(name, {}))
        kwargs[name] = merged
    return MagnitudeTable(**kwargs)


def apply_exposure(img: Image, ev: float) -> Image:
    """Scale linear light by 2**ev; ev = 0 returns the input unchanged."""
    if not abs(ev) <= MAX_EXPOSURE_EV:
        raise ParamOutOfRange(f"|ev| must be <= {MAX_EXPOSURE_EV}, got {ev}")
    if ev == 0.0:
        return img
    lin = srgb_to_linear(img.data) * 2.0**ev
    return Image(linear_to_srgb(lin))


def apply_contrast(img: Image, scale: float) -> Image:
    """Scale L* about the mid pivot 50; a*, b* untouched."""
    if not 0.0 < scale <= MAX_SCALE:
        raise ParamOutOfRange(f"contrast scale must be in (0, {MAX_SCALE}], got {scale}")
    if scale == 1.0:
        return img
    lab = rgb_to_lab(img).data.copy()
    lab[..., 0] = np.clip(50.0 + scale * (lab[..., 0] - 50.0), 0.0, 100.0)
    return lab_to_rgb(LabImage(lab))


def apply_saturation(img: Image, scale: float) -> Image:
    """Scale Lab chroma (a*, b*); L* untouched."""
    if not 0.0 <= scale <= MAX_SCALE:
        raise ParamOutOfRange(f"saturation scale must be in [0, {MAX_SCALE}], got {scale}")
    if scale == 1.0:
        return img
    lab = rgb_to_lab(img).data.copy()
    lab[..., 1] *= scale
    lab[..., 2] *= scale
    return lab_to_rgb(LabImage(lab))


def apply_cct_shift(img: Image, shift_mired: float) -> Image:
    """Shift the estimated white point along the Planckian locus by `shift_mired`.

    Positive shifts warm the image (higher mired, lower kelvin). The pixel
    transform is a Bradford adaptation from the gray-world source white to
    the shifted target white, applied in linear RGB.
    """
    if not abs(shift_mired) <= MAX_CCT_SHIFT_MIRED:
        raise ParamOutOfRange(f"|shift_mired| must be <= {MAX_CCT_SHIFT_MIRED}, got {shift_mired}")
    if shift_mired == 0.0:
        return img
    source = estimate_white_chromaticity(img)
    source_kelvin = chromaticity_to_cct(source)
    target_kelvin = mired_to_kelvin(kelvin_to_mired(source_kelvin) + shift_mired)
    target = planckian_chromaticity(target_kelvin)
    adapt = bradford_adaptation(source, target)
    lin = srgb_to_linear(img.data) @ adapt.T
    return Image(linear_to_srgb(lin))


def apply_stack(img: Image, params: RetouchParams) -> Image:
    """Apply the four operators in canonical order; identity steps short-circuit."""
    out = apply_exposure(img, params.exposure_ev)
    out = apply_contrast(out, params.contrast_scale)
    out = apply_saturation(out, params.saturation_scale)
    return apply_cct_shift(out, params.cct_shift_mired)


def invert_stack(img: Image, params: RetouchParams) -> Image:
    """Exact inverse pipeline of apply_stack(.., params).

    Applies the inverse operators in reverse canonical order, so that
    apply_stack(invert_stack(img, p), p) recovers img up to gamut clipping
    and storage rounding. Applying the inverse parameters in forward order
    instead would leave order-of-composition residuals.
    """
    inv = params.inverse()
    out = apply_cct_shift(img, inv.cct_shift_mired)
    out = apply_saturation(out, inv.saturation_scale)
    out = apply_contrast(out, inv.contrast_scale)
    return apply_exposure(out, inv.exposure_ev)


_PARAM_FIELD = {
    "exposure": "exposure_ev",
    "contrast": "contrast_scale",
    "saturation": "saturation_scale",
    "cct": "cct_shift_mired",
}


def params_from_suggestions(
    suggestions: list[EditSuggestion],
    table: MagnitudeTable = DEFAULT_MAGNITUDES,
) -> tuple[RetouchParams, list[EditSuggestion]]:
    """Map color/tone retouch suggestions to stack parameters.

    Returns (params, skipped) where `skipped` holds restoration and
    unsupported (dof) suggestions that have no operator.
    """
    params = IDENTITY_PARAMS
    skipped = []
    seen = set()
    for s in suggestions:
        if s.kind == "restore" or s.attribute == "dof":
            skipped.append(s)
            continue
        if s.attribute in seen:
            raise DuplicateAttribute(f"duplicate suggestion for attribute {s.attribute!r}")
        seen.add(s.attribute)
        value = table.parameter(s.attribute, s.direction, s.magnitude)
        params = replace(params, **{_PARAM_FIELD[s.attribute]: value})
    return params, skipped


def apply_suggestions(
    img: Image,
    suggestions: list[EditSuggestion],
    table: MagnitudeTable = DEFAULT_MAGNITUDES,
) -> Image:
    """Rule-based application of a suggestion list in canonical operator order.

    Restoration and dof suggestions have no operator here; they are skipped
    with a warning rather than silently dropped from the record.
    """
    params, skipped = params_from_suggestions(suggestions, table)
    for s in skipped:
        reason = "unsupported attribute" if s.kind == "retouch" else "restoration task"
        log.warning("skipping %s (%s)", s.source or s.as_dict(), reason)
    return apply_stack(img, params)
