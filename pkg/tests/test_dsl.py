from pathlib import Path

import numpy as np
import pytest

from photocraft.dsl import (
    CriticOutput,
    EditSuggestion,
    MEASURABLE_ATTRIBUTES,
    RESTORE_TASKS,
    normalize_restoration_label,
    parse_score,
    parse_suggestion,
    parse_suggestion_list,
    render_instruction,
    validate_critic_output,
)
from photocraft.errors import (
    DuplicateAttribute,
    ScoreOutOfRange,
    UnknownRestorationLabel,
    UnparseableSuggestion,
)

DATA = Path(__file__).parent / "data"


def sample_text(n: int) -> str:
    return (DATA / f"critic_sample_{n}.txt").read_text(encoding="utf-8")


def test_parse_exposure_suggestion():
    s = parse_suggestion("moderately increase light&exposure")
    assert s == EditSuggestion.retouch("exposure", "increase", "moderate")


def test_parse_cct_suggestion():
    s = parse_suggestion("change color temperature to slightly warmer")
    assert s == EditSuggestion.retouch("cct", "warmer", "slight")


def test_parse_restore_suggestion():
    assert parse_suggestion("remove blur") == EditSuggestion.restore("deblur")


def test_parse_is_case_insensitive():
    s = parse_suggestion("Moderately Increase Light&Exposure")
    assert s.attribute == "exposure" and s.magnitude == "moderate"


def test_parse_synonyms():
    assert parse_suggestion("increase brightness").attribute == "exposure"
    assert parse_suggestion("slightly increase vibrance").attribute == "saturation"
    assert parse_suggestion("reduce the saturation").direction == "decrease"


def test_parse_unspecified_magnitude():
    s = parse_suggestion("decrease light&exposure")
    assert s.magnitude == "unspecified"
    assert s.direction == "decrease"


def test_parse_dof_with_bokeh_parenthetical():
    s = parse_suggestion("slightly decrease the depth of field (enhance the bokeh effect)")
    assert s == EditSuggestion.retouch("dof", "decrease", "slight")
    assert not s.supported
    s = parse_suggestion("moderately increase the depth of field (reduce the bokeh effect)")
    assert s == EditSuggestion.retouch("dof", "increase", "moderate")


def test_parse_bokeh_phrasing_inverts_direction():
    assert parse_suggestion("enhance the bokeh effect").direction == "decrease"
    assert parse_suggestion("reduce the bokeh effect").direction == "increase"


def test_parse_numbered_prefix():
    s = parse_suggestion("2. slightly increase contrast")
    assert s == EditSuggestion.retouch("contrast", "increase", "slight")


def test_parse_rejects_out_of_grammar():
    for text in ("make it pop", "increase color temperature", ")(", ""):
        with pytest.raises(UnparseableSuggestion):
            parse_suggestion(text)


def test_unparseable_carries_span():
    with pytest.raises(UnparseableSuggestion) as err:
        parse_suggestion("sharpen the midtones")
    assert err.value.span == "sharpen the midtones"


def test_parse_list_mixed_separators():
    parsed = parse_suggestion_list(
        "remove blur, slightly decrease exposure and moderately increase saturation")
    assert parsed == [
        EditSuggestion.restore("deblur"),
        EditSuggestion.retouch("exposure", "decrease", "slight"),
        EditSuggestion.retouch("saturation", "increase", "moderate"),
    ]


def test_parse_list_empty():
    assert parse_suggestion_list("") == []


def test_parse_list_numbered_lines():
    parsed = parse_suggestion_list("1. increase contrast;\n2. slightly decrease exposure")
    assert [s.attribute for s in parsed] == ["contrast", "exposure"]


def test_parse_list_rejects_duplicate_attribute():
    with pytest.raises(DuplicateAttribute):
        parse_suggestion_list("1. increase contrast; 2. increase contrast")
    with pytest.raises(DuplicateAttribute):
        parse_suggestion_list("increase contrast, decrease contrast")


def test_render_examples():
    assert render_instruction([EditSuggestion.retouch("exposure", "decrease", "slight")]) == \
        "slightly decrease exposure"
    assert render_instruction([]) == ""
    assert render_instruction([EditSuggestion.restore("dehaze"),
                               EditSuggestion.retouch("cct", "warmer", "moderate")]) == \
        "remove haze; change color temperature to moderately warmer"


def _random_suggestions(rng) -> list:
    suggestions = []
    tasks = list(RESTORE_TASKS)
    rng.shuffle(tasks)
    for task in tasks[: rng.integers(0, 3)]:
        suggestions.append(EditSuggestion.restore(task))
    attrs = list(MEASURABLE_ATTRIBUTES) + ["dof"]
    rng.shuffle(attrs)
    for attribute in attrs[: rng.integers(0, len(attrs) + 1)]:
        directions = ("warmer", "cooler") if attribute == "cct" else ("increase", "decrease")
        suggestions.append(EditSuggestion.retouch(
            attribute,
            directions[rng.integers(0, 2)],
            ("slight", "moderate", "strong", "unspecified")[rng.integers(0, 4)],
        ))
    return suggestions


def test_render_parse_round_trip_1000():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        suggestions = _random_suggestions(rng)
        assert parse_suggestion_list(render_instruction(suggestions)) == suggestions


def test_validator_accepts_samples():
    for n, expected_score in ((1, 82), (2, 72), (3, 37)):
        result = validate_critic_output(sample_text(n))
        assert isinstance(result, CriticOutput), result
        assert result.score == expected_score
        assert len(result.reasoning) == 5


def test_validator_extracts_suggestions():
    result = validate_critic_output(sample_text(3))
    assert isinstance(result, CriticOutput)
    parsed = parse_suggestion_list("\n".join(result.suggestions))
    assert parsed[0] == EditSuggestion.restore("deblur")


def test_validator_rejects_missing_score():
    text = "\n".join(line for line in sample_text(1).splitlines()
                     if "Predicted Score" not in line)
    violations = validate_critic_output(text)
    assert isinstance(violations, list)
    assert any(v.kind == "MissingScore" for v in violations)


def test_validator_rejects_permuted_blocks():
    lines = sample_text(2).splitlines()
    score_at = next(i for i, ln in enumerate(lines) if ln.strip() == "Image Quality Scoring")
    permuted = "\n".join(lines[score_at:] + lines[:score_at])
    violations = validate_critic_output(permuted)
    assert isinstance(violations, list)
    assert any(v.kind == "OutOfOrder" for v in violations)


def test_validator_rejects_missing_section():
    text = sample_text(1).replace("3. Composition&Layout Analysis:",
                                  "3. Some Other Heading:")
    violations = validate_critic_output(text)
    assert isinstance(violations, list)
    assert any(v.kind == "MissingSection" for v in violations)


def test_validator_rejects_score_above_100():
    text = sample_text(1).replace("Predicted Score: 82/100", "Predicted Score: 105/100")
    violations = validate_critic_output(text)
    assert isinstance(violations, list)
    assert any(v.kind == "ScoreOutOfRange" for v in violations)


def test_validator_total_on_arbitrary_text():
    for junk in ("", "hello world", "1. 2. 3.", "Predicted Score: 50/100", "\x00\x01"):
        result = validate_critic_output(junk)
        assert isinstance(result, (CriticOutput, list))


def test_parse_score():
    assert parse_score("Predicted Score: 82/100") == 82
    with pytest.raises(ScoreOutOfRange):
        parse_score("Predicted Score: 101/100")
    with pytest.raises(ScoreOutOfRange):
        parse_score("no score here")


def test_normalize_restoration_label():
    assert normalize_restoration_label("blur") == "deblur"
    assert normalize_restoration_label("deblur") == "deblur"
    assert normalize_restoration_label("Haze") == "dehaze"
    assert normalize_restoration_label("low light") == "lowlight"
    with pytest.raises(UnknownRestorationLabel):
        normalize_restoration_label("scratches")


def test_suggestion_validation():
    with pytest.raises(ValueError):
        EditSuggestion.retouch("cct", "increase")
    with pytest.raises(ValueError):
        EditSuggestion.retouch("sharpness", "increase")
    with pytest.raises(ValueError):
        EditSuggestion.restore("sharpen")
    assert not EditSuggestion.retouch("dof", "increase").supported
