"""Deterministic toolkit for reasoning-guided photo enhancement: retouching
operators, attribute measurement, suggestion grammar, reward arithmetic,
policy-optimization math, and paired-dataset synthesis."""

from .attributes import ATTRIBUTE_KEYS, AttributeDelta, AttributeVector, attribute_delta, measure_attributes
from .color import (
    D65,
    Chromaticity,
    Image,
    LabImage,
    chromaticity_to_cct,
    estimate_white_chromaticity,
    lab_to_rgb,
    linear_to_srgb,
    planckian_chromaticity,
    rgb_to_lab,
    srgb_to_linear,
)
from .datagen import (
    SampleManifestRecord,
    SynthesisPlan,
    generate_reference,
    read_manifest,
    synthesize_multi_edit,
    synthesize_pair,
    write_manifest,
)
from .dsl import (
    CriticOutput,
    EditSuggestion,
    FormatViolation,
    parse_suggestion,
    parse_suggestion_list,
    render_instruction,
    validate_critic_output,
)
from .image_io import read_image, write_png
from .retouch import (
    DEFAULT_MAGNITUDES,
    MagnitudeTable,
    RetouchParams,
    apply_cct_shift,
    apply_contrast,
    apply_exposure,
    apply_saturation,
    apply_stack,
    apply_suggestions,
    invert_stack,
)
from .rewards import (
    ExternalMetric,
    RewardBreakdown,
    RewardConfig,
    artist_reward,
    attribute_reward,
    compliance_indicator,
    format_reward,
    perceptual_reward,
    photometric_reward,
    score_ranking_reward,
    semantic_compliance,
    structural_distance,
    suggestion_exploration_reward,
)
from .rl import (
    AdvantageResult,
    NftConfig,
    RewardGroup,
    group_advantages,
    grpo_surrogate,
    kl_penalty,
    nft_loss,
    nft_negative_velocity,
    nft_positive_velocity,
    reward_to_probability,
)

__version__ = "0.1.0"
