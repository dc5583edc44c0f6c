"""The reward system: compliance gating, photometric control, perceptual consistency.

The edit reward has a multiplicative structure

    total = compliance x (lambda1 * photometric + lambda2 * perceptual)

so instruction faithfulness is a prerequisite for any reward. The critic-side
rewards (format, score ranking, suggestion exploration) live here too.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter

from .attributes import ATTRIBUTE_KEYS, AttributeDelta, attribute_delta
from .color import Image, rgb_to_lab
from .dsl import (
    MEASURABLE_ATTRIBUTES,
    CriticOutput,
    EditSuggestion,
    normalize_restoration_label,
    validate_critic_output,
)
from .errors import (
    MetricFailure,
    NoApplicableSuggestion,
    ScoreOutOfRange,
    UnmeasurableAttribute,
)
from .image_io import write_png
from .retouch import DEFAULT_MAGNITUDES, MagnitudeTable, apply_suggestions

DEFAULT_TAU = {"exposure": 0.01, "contrast": 0.01, "saturation": 0.01, "cct": 3.0}

PerceptualDistance = Callable[[Image, Image], float]


@dataclass(frozen=True)
class RewardConfig:
    """Weights and tolerances of the reward system."""

    lambda1: float = 1.0
    lambda2: float = 0.5
    tau: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_TAU))
    epsilon: float = 1e-6
    dead_zone: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("reward weights must be nonnegative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        for key in ATTRIBUTE_KEYS:
            if self.tau.get(key, 0.0) <= 0.0:
                raise ValueError(f"tau[{key!r}] must be positive")
        if self.dead_zone is None:
            object.__setattr__(self, "dead_zone", dict(self.tau))

    def tau_for(self, attribute: str) -> float:
        return self.tau[attribute]

    def dead_zone_for(self, attribute: str) -> float:
        return self.dead_zone[attribute]


@dataclass(frozen=True, eq=False)
class RewardBreakdown:
    """All reward terms for one (input, edited, ground-truth, suggestions) tuple."""

    compliance: float
    per_attribute: dict
    photometric: float
    perceptual: float
    total: float
    compliance_details: tuple

    @classmethod
    def from_components(cls, compliance, per_attribute, perceptual, cfg: RewardConfig,
                        compliance_details=()) -> "RewardBreakdown":
        photometric = sum(per_attribute.values()) / len(per_attribute)
        total = compliance * (cfg.lambda1 * photometric + cfg.lambda2 * perceptual)
        return cls(compliance=compliance, per_attribute=dict(per_attribute),
                   photometric=photometric, perceptual=perceptual, total=total,
                   compliance_details=tuple(compliance_details))

    def as_dict(self) -> dict:
        return {
            "compliance": self.compliance,
            "per_attribute": dict(self.per_attribute),
            "photometric": self.photometric,
            "perceptual": self.perceptual,
            "total": self.total,
            "compliance_details": list(self.compliance_details),
        }


def compliance_indicator(suggestion: EditSuggestion, delta_e: AttributeDelta,
                         cfg: RewardConfig) -> int:
    """1 iff the measured change matches the suggested direction beyond the dead zone."""
    if suggestion.kind != "retouch" or suggestion.attribute not in MEASURABLE_ATTRIBUTES:
        raise UnmeasurableAttribute(
            f"no measurable attribute for suggestion {suggestion.as_dict()}")
    change = delta_e.value_for(suggestion.attribute)
    wants_positive = suggestion.direction in ("increase", "warmer")
    dead_zone = cfg.dead_zone_for(suggestion.attribute)
    satisfied = abs(change) >= dead_zone and (change > 0) == wants_positive
    return 1 if satisfied else 0


def _compliance_bits(suggestions: Sequence[EditSuggestion], delta_e: AttributeDelta,
                     cfg: RewardConfig) -> list:
    bits = []
    for s in suggestions:
        if s.kind != "retouch" or s.attribute not in MEASURABLE_ATTRIBUTES:
            bits.append(None)
        else:
            bits.append(compliance_indicator(s, delta_e, cfg))
    return bits


def semantic_compliance(suggestions: Sequence[EditSuggestion], x: Image, xe: Image,
                        cfg: RewardConfig | None = None) -> float:
    """Mean compliance over the color/tone suggestions; 1.0 when none apply.

    Vacuous compliance keeps the gate from zeroing restoration-only samples.
    """
    cfg = cfg or RewardConfig()
    bits = [b for b in _compliance_bits(suggestions, attribute_delta(xe, x), cfg)
            if b is not None]
    return 1.0 if not bits else sum(bits) / len(bits)


def attribute_reward(delta_e: float, delta_gt: float, tau: float, epsilon: float) -> float:
    """Three-branch attribute score in [0, 1].

    Negligible ground-truth change (|delta_gt| < tau): 1 when the edit also
    stays inside tau, else 0. Otherwise the reward falls off linearly with
    the residual |delta_e - delta_gt| relative to |delta_gt|, clamped to
    [0, 1], so a perfect edit scores 1 and the penalty grows monotonically
    with the miss.
    """
    if abs(delta_gt) < tau:
        return 1.0 if abs(delta_e) <= tau else 0.0
    miss = abs(delta_e - delta_gt) / (abs(delta_gt) + epsilon)
    return min(1.0, max(0.0, 1.0 - miss))


def photometric_from_deltas(delta_e: AttributeDelta, delta_gt: AttributeDelta,
                            cfg: RewardConfig) -> dict:
    return {
        key: attribute_reward(delta_e.value_for(key), delta_gt.value_for(key),
                              cfg.tau_for(key), cfg.epsilon)
        for key in ATTRIBUTE_KEYS
    }


def photometric_reward(x: Image, xe: Image, xgt: Image,
                       cfg: RewardConfig | None = None) -> float:
    """Mean attribute reward over the four attributes."""
    cfg = cfg or RewardConfig()
    per = photometric_from_deltas(attribute_delta(xe, x), attribute_delta(xgt, x), cfg)
    return sum(per.values()) / len(per)


def _ssim_mean(a: np.ndarray, b: np.ndarray, data_range: float = 100.0) -> float:
    # 11x11 Gaussian window: sigma 1.5 truncated at radius 5.
    sigma, truncate = 1.5, 3.5
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2

    def blur(x):
        return gaussian_filter(x, sigma=sigma, truncate=truncate, mode="reflect")

    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a * mu_a
    var_b = blur(b * b) - mu_b * mu_b
    cov = blur(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def structural_distance(xe: Image, xgt: Image) -> float:
    """Built-in perceptual distance: 1 - SSIM of the L* channels."""
    if xe.data.shape != xgt.data.shape:
        raise ValueError("images must share dimensions for the structural distance")
    la = rgb_to_lab(xe).data[..., 0]
    lb = rgb_to_lab(xgt).data[..., 0]
    return max(0.0, 1.0 - _ssim_mean(la, lb))


class ExternalMetric:
    """Adapter for an out-of-process perceptual metric.

    The configured command receives two absolute image paths (edited first,
    ground truth second), one per line on stdin, and must print a single
    nonnegative decimal distance. Nonzero exit status or unparseable output
    raises MetricFailure.
    """

    def __init__(self, command: str | Sequence[str], timeout: float = 60.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout

    def __call__(self, xe: Image, xgt: Image) -> float:
        with tempfile.TemporaryDirectory(prefix="photocraft-metric-") as tmp:
            edited = Path(tmp) / "edited.png"
            reference = Path(tmp) / "reference.png"
            write_png(xe, edited)
            write_png(xgt, reference)
            try:
                proc = subprocess.run(
                    self.argv,
                    input=f"{edited.resolve()}\n{reference.resolve()}\n",
                    capture_output=True, text=True, timeout=self.timeout,
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise MetricFailure(f"metric command failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise MetricFailure(
                f"metric command exited with {proc.returncode}: {proc.stderr.strip()}")
        try:
            distance = float(proc.stdout.strip())
        except ValueError as exc:
            raise MetricFailure(f"unparseable metric output: {proc.stdout!r}") from exc
        if not math.isfinite(distance) or distance < 0:
            raise MetricFailure(f"metric distance must be finite and >= 0, got {distance}")
        return distance


def perceptual_reward(xe: Image, xgt: Image,
                      metric: PerceptualDistance | None = None) -> float:
    """exp(-d) for a perceptual distance d; defaults to the structural distance."""
    distance = (metric or structural_distance)(xe, xgt)
    if not math.isfinite(distance) or distance < 0:
        raise MetricFailure(f"perceptual distance must be finite and >= 0, got {distance}")
    return math.exp(-distance)


def artist_reward(x: Image, xe: Image, xgt: Image,
                  suggestions: Sequence[EditSuggestion],
                  cfg: RewardConfig | None = None,
                  metric: PerceptualDistance | None = None) -> RewardBreakdown:
    """Full gated reward breakdown for one edit."""
    cfg = cfg or RewardConfig()
    delta_e = attribute_delta(xe, x)
    bits = _compliance_bits(suggestions, delta_e, cfg)
    measured = [b for b in bits if b is not None]
    compliance = 1.0 if not measured else sum(measured) / len(measured)
    per = photometric_from_deltas(delta_e, attribute_delta(xgt, x), cfg)
    perceptual = perceptual_reward(xe, xgt, metric)
    return RewardBreakdown.from_components(compliance, per, perceptual, cfg, bits)


def format_reward(text: str) -> float:
    """1.0 iff the text satisfies the critic output template."""
    return 1.0 if isinstance(validate_critic_output(text), CriticOutput) else 0.0


def score_ranking_reward(score_x: int, score_xe: int) -> int:
    """1 iff the edited image is scored strictly higher than the input."""
    for score in (score_x, score_xe):
        if not 0 <= score <= 100:
            raise ScoreOutOfRange(f"score {score} outside [0, 100]")
    return 1 if score_x < score_xe else 0


def suggestion_exploration_reward(x: Image, xgt: Image,
                                  suggestions: Sequence[EditSuggestion],
                                  cfg: RewardConfig | None = None,
                                  *,
                                  table: MagnitudeTable = DEFAULT_MAGNITUDES,
                                  restoration_label: str | None = None) -> float:
    """Score suggested edits by applying them rule-based and rewarding the result.

    The retouch subset is applied to `x` (unspecified magnitudes as moderate)
    to produce a pseudo-edited reference, which is scored with the
    photometric reward against the ground truth. When the sample carries a
    restoration label, the suggestions must name the matching task; a
    mismatch zeroes the reward.
    """
    cfg = cfg or RewardConfig()
    retouch_subset = [s for s in suggestions
                      if s.kind == "retouch" and s.attribute in MEASURABLE_ATTRIBUTES]
    if not retouch_subset and restoration_label is None:
        raise NoApplicableSuggestion(
            "no retouch suggestions to apply and no restoration label to check")
    factor = 1.0
    if restoration_label is not None:
        task = normalize_restoration_label(restoration_label)
        restore_tasks = {s.task for s in suggestions if s.kind == "restore"}
        factor = 1.0 if task in restore_tasks else 0.0
    reference = apply_suggestions(x, retouch_subset, table)
    return factor * photometric_reward(x, reference, xgt, cfg)
