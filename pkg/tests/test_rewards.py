import math
import sys

import numpy as np
import pytest

from photocraft.attributes import ATTRIBUTE_KEYS, AttributeDelta, attribute_delta
from photocraft.color import Image
from photocraft.dsl import EditSuggestion
from photocraft.errors import (
    MetricFailure,
    NoApplicableSuggestion,
    ScoreOutOfRange,
    UnmeasurableAttribute,
)
from photocraft.retouch import RetouchParams, apply_exposure, apply_stack, apply_suggestions
from photocraft.rewards import (
    ExternalMetric,
    RewardBreakdown,
    RewardConfig,
    artist_reward,
    attribute_reward,
    compliance_indicator,
    format_reward,
    perceptual_reward,
    photometric_from_deltas,
    photometric_reward,
    score_ranking_reward,
    semantic_compliance,
    structural_distance,
    suggestion_exploration_reward,
)

from conftest import balanced_corpus_image, natural_image
from test_dsl import sample_text


def delta(exposure=0.0, contrast=0.0, saturation=0.0, cct=0.0) -> AttributeDelta:
    return AttributeDelta(exposure, contrast, saturation, cct)


# --- attribute reward branches ------------------------------------------------

def test_attribute_reward_branch1():
    assert attribute_reward(0.004, 0.005, tau=0.01, epsilon=1e-6) == 1.0


def test_attribute_reward_branch2():
    assert attribute_reward(0.02, 0.005, tau=0.01, epsilon=1e-6) == 0.0


def test_attribute_reward_branch3():
    # 1 - |0.1 - 0.2| / (0.2 + 1e-6)
    assert attribute_reward(0.1, 0.2, tau=0.01, epsilon=1e-6) == pytest.approx(0.500002, abs=1e-6)


def test_attribute_reward_perfect_edit_continuity():
    # with delta_e == delta_gt the reward stays 1 as |delta_gt| crosses tau
    for dgt in (0.5, 0.05, 0.011, 0.0099, 0.001, 0.0):
        assert attribute_reward(dgt, dgt, tau=0.01, epsilon=1e-6) == 1.0


def test_attribute_reward_monotone_penalty():
    dgt = 0.2
    misses = [attribute_reward(dgt + err, dgt, 0.01, 1e-6) for err in np.linspace(0, 0.5, 40)]
    assert all(a >= b for a, b in zip(misses, misses[1:]))


def test_attribute_reward_matches_branch_oracle():
    rng = np.random.default_rng(21)
    for _ in range(200):
        de = float(rng.uniform(-0.3, 0.3))
        dgt = float(rng.uniform(-0.3, 0.3))
        tau = float(rng.uniform(0.001, 0.05))
        eps = float(10.0 ** rng.uniform(-9, -3))
        # independent re-statement of the three branches
        if abs(dgt) < tau and abs(de) <= tau:
            expected = 1.0
        elif abs(dgt) < tau:
            expected = 0.0
        else:
            expected = min(1.0, max(0.0, 1.0 - abs(de - dgt) / (abs(dgt) + eps)))
        assert attribute_reward(de, dgt, tau, eps) == expected


# --- compliance ----------------------------------------------------------------

def test_compliance_indicator_satisfied():
    s = EditSuggestion.retouch("exposure", "increase", "moderate")
    assert compliance_indicator(s, delta(exposure=0.05), RewardConfig()) == 1


def test_compliance_indicator_wrong_sign():
    s = EditSuggestion.retouch("exposure", "increase", "moderate")
    assert compliance_indicator(s, delta(exposure=-0.05), RewardConfig()) == 0


def test_compliance_indicator_below_dead_zone():
    s = EditSuggestion.retouch("cct", "warmer", "slight")
    assert compliance_indicator(s, delta(cct=0.5), RewardConfig()) == 0
    assert compliance_indicator(s, delta(cct=5.0), RewardConfig()) == 1


def test_compliance_indicator_rejects_unmeasurable():
    with pytest.raises(UnmeasurableAttribute):
        compliance_indicator(EditSuggestion.restore("deblur"), delta(), RewardConfig())
    with pytest.raises(UnmeasurableAttribute):
        compliance_indicator(EditSuggestion.retouch("dof", "increase"), delta(), RewardConfig())


def test_semantic_compliance_all_satisfied():
    rng = np.random.default_rng(22)
    x = natural_image(rng)
    xe = apply_exposure(x, 0.7)
    suggestions = [EditSuggestion.retouch("exposure", "increase", "moderate")]
    assert semantic_compliance(suggestions, x, xe) == 1.0


def test_semantic_compliance_half_satisfied():
    rng = np.random.default_rng(23)
    x = natural_image(rng)
    xe = apply_exposure(x, 0.7)  # saturation barely moves, exposure does
    suggestions = [
        EditSuggestion.retouch("exposure", "increase", "moderate"),
        EditSuggestion.retouch("saturation", "decrease", "strong"),
    ]
    assert semantic_compliance(suggestions, x, xe) == 0.5


def test_semantic_compliance_vacuous_for_restore_only():
    rng = np.random.default_rng(24)
    x = natural_image(rng)
    assert semantic_compliance([EditSuggestion.restore("deblur")], x, x) == 1.0
    assert semantic_compliance([], x, x) == 1.0


# --- photometric ----------------------------------------------------------------

def test_photometric_perfect_edit():
    rng = np.random.default_rng(25)
    x = natural_image(rng)
    gt = apply_stack(x, RetouchParams(0.5, 1.2, 1.2, 10.0))
    assert photometric_reward(x, gt, gt) == 1.0


def test_photometric_no_edit_when_gt_moved():
    rng = np.random.default_rng(26)
    x = natural_image(rng, chroma=0.6)
    gt = apply_stack(x, RetouchParams(0.7, 1.4, 1.5, 30.0))
    dgt = attribute_delta(gt, x)
    assert all(abs(dgt.value_for(k)) > RewardConfig().tau_for(k) for k in ATTRIBUTE_KEYS)
    assert photometric_reward(x, x, gt) == pytest.approx(0.0, abs=1e-3)


def test_photometric_mean_of_mixed_branches():
    per = photometric_from_deltas(
        delta(exposure=0.1, contrast=0.1, saturation=0.5, cct=0.0),
        delta(exposure=0.1, contrast=0.1, saturation=0.25, cct=5.0),
        RewardConfig(),
    )
    # two exact matches -> 1, one miss-by-|dgt| -> 0, one zero edit -> 0
    assert per["exposure"] == 1.0 and per["contrast"] == 1.0
    assert per["saturation"] == pytest.approx(0.0, abs=1e-5)
    assert per["cct"] == pytest.approx(0.0, abs=1e-5)
    assert sum(per.values()) / 4 == pytest.approx(0.5, abs=1e-5)


def test_photometric_decomposition_matches_breakdown():
    rng = np.random.default_rng(27)
    x = natural_image(rng)
    gt = apply_stack(x, RetouchParams(0.4, 1.1, 1.1, 8.0))
    xe = apply_stack(x, RetouchParams(0.3, 1.15, 1.0, 5.0))
    breakdown = artist_reward(x, xe, gt, [])
    assert breakdown.photometric == sum(breakdown.per_attribute.values()) / 4


# --- perceptual ------------------------------------------------------------------

def test_perceptual_identity_is_one():
    rng = np.random.default_rng(28)
    x = natural_image(rng)
    assert perceptual_reward(x, x) == 1.0
    assert structural_distance(x, x) == 0.0


def test_perceptual_exponential_of_distance():
    rng = np.random.default_rng(29)
    x = natural_image(rng)
    assert perceptual_reward(x, x, metric=lambda a, b: 0.5) == pytest.approx(
        0.6065306597126334, abs=1e-12)


def test_perceptual_monotone_in_distance():
    rng = np.random.default_rng(30)
    x = natural_image(rng)
    rewards = [perceptual_reward(x, x, metric=lambda a, b, d=d: d) for d in (0.1, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(rewards, rewards[1:]))


def test_structural_distance_grows_with_distortion():
    rng = np.random.default_rng(31)
    x = natural_image(rng)
    near = apply_exposure(x, 0.1)
    far = apply_exposure(x, 1.5)
    assert structural_distance(near, x) < structural_distance(far, x)


def test_perceptual_rejects_negative_distance():
    rng = np.random.default_rng(32)
    x = natural_image(rng)
    with pytest.raises(MetricFailure):
        perceptual_reward(x, x, metric=lambda a, b: -0.1)


# --- gated total -----------------------------------------------------------------

def test_gating_zero_compliance_zeroes_total():
    rng = np.random.default_rng(33)
    x = natural_image(rng)
    gt = apply_exposure(x, 0.7)
    suggestions = [EditSuggestion.retouch("exposure", "decrease", "moderate")]
    breakdown = artist_reward(x, gt, gt, suggestions)
    assert breakdown.compliance == 0.0
    assert breakdown.total == 0.0


def test_perfect_edit_reaches_weight_sum():
    rng = np.random.default_rng(34)
    x = natural_image(rng)
    gt = apply_exposure(x, 0.7)
    suggestions = [EditSuggestion.retouch("exposure", "increase", "moderate")]
    breakdown = artist_reward(x, gt, gt, suggestions)
    assert breakdown.compliance == 1.0
    assert breakdown.total == pytest.approx(1.5, abs=1e-12)


def test_breakdown_arithmetic():
    cfg = RewardConfig()
    breakdown = RewardBreakdown.from_components(
        0.5, {k: 0.8 for k in ATTRIBUTE_KEYS}, 1.0, cfg)
    assert breakdown.total == pytest.approx(0.65, abs=1e-12)
    assert breakdown.total == breakdown.compliance * (
        cfg.lambda1 * breakdown.photometric + cfg.lambda2 * breakdown.perceptual)


def test_compliance_details_mark_unmeasured_suggestions():
    rng = np.random.default_rng(35)
    x = natural_image(rng)
    xe = apply_exposure(x, 0.7)
    suggestions = [
        EditSuggestion.retouch("exposure", "increase", "moderate"),
        EditSuggestion.restore("deblur"),
        EditSuggestion.retouch("dof", "increase"),
    ]
    breakdown = artist_reward(x, xe, xe, suggestions)
    assert breakdown.compliance_details == (1, None, None)
    assert breakdown.compliance == 1.0


def test_reward_bounds_random_tuples():
    rng = np.random.default_rng(36)
    cfg = RewardConfig()
    for _ in range(20):
        x = natural_image(rng)
        xe = apply_stack(x, RetouchParams(float(rng.uniform(-1, 1)),
                                          float(rng.uniform(0.7, 1.4)),
                                          float(rng.uniform(0.7, 1.4)),
                                          float(rng.uniform(-30, 30))))
        gt = apply_stack(x, RetouchParams(float(rng.uniform(-1, 1)),
                                          float(rng.uniform(0.7, 1.4)),
                                          float(rng.uniform(0.7, 1.4)),
                                          float(rng.uniform(-30, 30))))
        suggestions = [EditSuggestion.retouch("exposure", "increase", "moderate")]
        b = artist_reward(x, xe, gt, suggestions, cfg)
        assert 0.0 <= b.compliance <= 1.0
        assert all(0.0 <= v <= 1.0 for v in b.per_attribute.values())
        assert 0.0 <= b.photometric <= 1.0
        assert 0.0 < b.perceptual <= 1.0
        assert 0.0 <= b.total <= cfg.lambda1 + cfg.lambda2


# --- critic rewards ---------------------------------------------------------------

def test_format_reward_matches_validator():
    assert format_reward(sample_text(1)) == 1.0
    assert format_reward("not a critic output") == 0.0
    broken = "\n".join(line for line in sample_text(1).splitlines()
                       if "Predicted Score" not in line)
    assert format_reward(broken) == 0.0


def test_score_ranking_reward():
    assert score_ranking_reward(72, 80) == 1
    assert score_ranking_reward(80, 80) == 0
    assert score_ranking_reward(80, 72) == 0
    with pytest.raises(ScoreOutOfRange):
        score_ranking_reward(-1, 50)
    with pytest.raises(ScoreOutOfRange):
        score_ranking_reward(50, 101)


def test_exploration_reward_self_consistency():
    rng = np.random.default_rng(37)
    gt = balanced_corpus_image(rng, sat_target=0.18)
    suggestions = [
        EditSuggestion.retouch("exposure", "increase", "moderate"),
        EditSuggestion.retouch("saturation", "decrease", "moderate"),
    ]
    from photocraft.retouch import params_from_suggestions, invert_stack
    correction, _ = params_from_suggestions(suggestions)
    x = invert_stack(gt, correction)
    assert suggestion_exploration_reward(x, gt, suggestions) >= 0.95


def test_exploration_reward_restore_only_with_matching_label():
    rng = np.random.default_rng(38)
    x = natural_image(rng)
    gt = apply_exposure(x, 0.3)
    suggestions = [EditSuggestion.restore("dehaze")]
    reward = suggestion_exploration_reward(x, gt, suggestions, restoration_label="haze")
    # restore factor 1; photometric part computed on an unretouched reference
    assert reward == photometric_reward(x, x, gt)


def test_exploration_reward_label_mismatch_is_zero():
    rng = np.random.default_rng(39)
    x = natural_image(rng)
    gt = apply_exposure(x, 0.3)
    suggestions = [EditSuggestion.restore("dehaze"),
                   EditSuggestion.retouch("exposure", "increase", "slight")]
    assert suggestion_exploration_reward(x, gt, suggestions, restoration_label="blur") == 0.0


def test_exploration_reward_requires_something_to_check():
    rng = np.random.default_rng(40)
    x = natural_image(rng)
    with pytest.raises(NoApplicableSuggestion):
        suggestion_exploration_reward(x, x, [EditSuggestion.restore("deblur")])
    with pytest.raises(NoApplicableSuggestion):
        suggestion_exploration_reward(x, x, [])


# --- external metric adapter --------------------------------------------------------

def _stub(tmp_path, body: str) -> str:
    script = tmp_path / "metric_stub.py"
    script.write_text(body)
    return f"{sys.executable} {script}"


def test_external_metric_constant_distance(tmp_path):
    rng = np.random.default_rng(41)
    x = natural_image(rng, 8, 8)
    cmd = _stub(tmp_path, "import sys\nsys.stdin.read()\nprint('0.375')\n")
    assert perceptual_reward(x, x, ExternalMetric(cmd)) == pytest.approx(
        math.exp(-0.375), abs=1e-12)


def test_external_metric_receives_two_paths(tmp_path):
    rng = np.random.default_rng(42)
    x = natural_image(rng, 8, 8)
    cmd = _stub(tmp_path, (
        "import sys\n"
        "lines = [l for l in sys.stdin.read().splitlines() if l.strip()]\n"
        "assert len(lines) == 2, lines\n"
        "import os\n"
        "assert all(os.path.isabs(l) and os.path.exists(l) for l in lines)\n"
        "print(0.0)\n"
    ))
    assert ExternalMetric(cmd)(x, x) == 0.0


def test_external_metric_crash_raises_metric_failure(tmp_path):
    rng = np.random.default_rng(43)
    x = natural_image(rng, 8, 8)
    cmd = _stub(tmp_path, "import sys\nsys.exit(3)\n")
    with pytest.raises(MetricFailure):
        perceptual_reward(x, x, ExternalMetric(cmd))


def test_external_metric_garbage_output_raises(tmp_path):
    rng = np.random.default_rng(44)
    x = natural_image(rng, 8, 8)
    cmd = _stub(tmp_path, "import sys\nsys.stdin.read()\nprint('not-a-number')\n")
    with pytest.raises(MetricFailure):
        ExternalMetric(cmd)(x, x)


def test_external_metric_failure_does_not_poison_batch(tmp_path):
    rng = np.random.default_rng(45)
    good = ExternalMetric(_stub(tmp_path, "import sys\nsys.stdin.read()\nprint('0.25')\n"))
    bad_script = tmp_path / "bad.py"
    bad_script.write_text("import sys\nsys.exit(1)\n")
    bad = ExternalMetric(f"{sys.executable} {bad_script}")
    results = []
    for metric in (good, bad, good):
        x = natural_image(rng, 8, 8)
        try:
            results.append(perceptual_reward(x, x, metric))
        except MetricFailure:
            results.append(None)
    assert results[0] == pytest.approx(math.exp(-0.25), abs=1e-12)
    assert results[1] is None
    assert results[2] == pytest.approx(math.exp(-0.25), abs=1e-12)
