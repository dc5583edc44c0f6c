"""Edit-suggestion grammar: parser, renderer, and critic-output template validator.

The grammar is a closed keyword grammar. Text outside it is rejected rather
than guessed, which keeps every downstream reward deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    DuplicateAttribute,
    ScoreOutOfRange,
    UnknownRestorationLabel,
    UnparseableSuggestion,
)

RETOUCH_ATTRIBUTES = ("exposure", "contrast", "saturation", "cct", "dof")
MEASURABLE_ATTRIBUTES = ("exposure", "contrast", "saturation", "cct")
RESTORE_TASKS = ("deblur", "dehaze", "denoise", "demoire", "deshadow", "lowlight", "derain")
MAGNITUDE_WORDS = ("slight", "moderate", "strong")


@dataclass(frozen=True)
class EditSuggestion:
    """One parsed edit suggestion: a directed retouch or a restoration task."""

    kind: str
    attribute: str | None = None
    direction: str | None = None
    magnitude: str = "unspecified"
    task: str | None = None
    supported: bool = True
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind == "retouch":
            if self.attribute not in RETOUCH_ATTRIBUTES:
                raise ValueError(f"unknown retouch attribute: {self.attribute}")
            valid = ("warmer", "cooler") if self.attribute == "cct" else ("increase", "decrease")
            if self.direction not in valid:
                raise ValueError(f"invalid direction {self.direction} for {self.attribute}")
            if self.magnitude not in MAGNITUDE_WORDS + ("unspecified",):
                raise ValueError(f"unknown magnitude: {self.magnitude}")
            if self.task is not None:
                raise ValueError("retouch suggestion cannot carry a task")
            if self.attribute == "dof":
                object.__setattr__(self, "supported", False)
        elif self.kind == "restore":
            if self.task not in RESTORE_TASKS:
                raise ValueError(f"unknown restoration task: {self.task}")
            if self.attribute is not None or self.direction is not None:
                raise ValueError("restore suggestion cannot carry attribute/direction")
        else:
            raise ValueError(f"unknown suggestion kind: {self.kind}")

    @classmethod
    def retouch(cls, attribute, direction, magnitude="unspecified", source=""):
        return cls(kind="retouch", attribute=attribute, direction=direction,
                   magnitude=magnitude, source=source)

    @classmethod
    def restore(cls, task, source=""):
        return cls(kind="restore", task=task, source=source)

    def as_dict(self) -> dict:
        if self.kind == "retouch":
            return {"kind": "retouch", "attribute": self.attribute,
                    "direction": self.direction, "magnitude": self.magnitude,
                    "supported": self.supported}
        return {"kind": "restore", "task": self.task}


_ADVERBS = {"slightly": "slight", "moderately": "moderate", "strongly": "strong"}
_ADVERB_FOR = {"slight": "slightly ", "moderate": "moderately ", "strong": "strongly ",
               "unspecified": ""}
_INCREASE_WORDS = ("increase", "raise", "boost")
_DECREASE_WORDS = ("decrease", "reduce", "lower")

_ATTRIBUTE_SYNONYMS = {
    "exposure": "exposure",
    "light&exposure": "exposure",
    "light": "exposure",
    "brightness": "exposure",
    "contrast": "contrast",
    "saturation": "saturation",
    "vibrance": "saturation",
    "depth of field": "dof",
}

_RESTORE_PHRASES = {
    "remove blur": "deblur",
    "remove motion blur": "deblur",
    "deblur": "deblur",
    "remove haze": "dehaze",
    "dehaze": "dehaze",
    "remove noise": "denoise",
    "denoise": "denoise",
    "remove moire": "demoire",
    "demoire": "demoire",
    "remove shadow": "deshadow",
    "remove shadows": "deshadow",
    "deshadow": "deshadow",
    "enhance low light": "lowlight",
    "enhance low-light": "lowlight",
    "remove rain": "derain",
    "derain": "derain",
}

_RESTORE_CANONICAL = {
    "deblur": "remove blur",
    "dehaze": "remove haze",
    "denoise": "remove noise",
    "demoire": "remove moire",
    "deshadow": "remove shadow",
    "lowlight": "enhance low light",
    "derain": "remove rain",
}

_RESTORE_LABEL_ALIASES = {
    "blur": "deblur",
    "haze": "dehaze",
    "fog": "dehaze",
    "noise": "denoise",
    "moire": "demoire",
    "shadow": "deshadow",
    "low light": "lowlight",
    "low-light": "lowlight",
    "rain": "derain",
}

_ATTRIBUTE_CANONICAL = {"exposure": "exposure", "contrast": "contrast",
                        "saturation": "saturation", "dof": "depth of field"}

_ADV_GROUP = "(?:(slightly|moderately|strongly) )?"
_CCT_CHANGE_RE = re.compile(
    rf"change (?:the )?colou?r temperature to {_ADV_GROUP}(warmer|cooler)")
_CCT_BARE_RE = re.compile(rf"{_ADV_GROUP}(warmer|cooler) colou?r temperature")
_BOKEH_RE = re.compile(
    rf"{_ADV_GROUP}(enhance|increase|boost|strengthen|reduce|decrease|weaken) "
    r"(?:the )?bokeh(?: effect)?")
_GENERIC_RE = re.compile(
    rf"{_ADV_GROUP}({'|'.join(_INCREASE_WORDS + _DECREASE_WORDS)}) (?:the )?(.+)")
_BOKEH_PAREN_RE = re.compile(r"\s*\((?:enhance|reduce) the bokeh effect\)\s*$")
_NUMBERING_RE = re.compile(r"^\s*\d+\s*[.)]\s*")


def _normalize(text: str) -> str:
    s = _NUMBERING_RE.sub("", text.strip().lower())
    s = re.sub(r"\s*&\s*", "&", s)
    s = re.sub(r"\s+", " ", s)
    return s.strip(" .;,")


def normalize_restoration_label(label: str) -> str:
    """Map a dataset degradation tag to its canonical restoration task."""
    key = re.sub(r"\s+", " ", label.strip().lower())
    if key in RESTORE_TASKS:
        return key
    if key in _RESTORE_LABEL_ALIASES:
        return _RESTORE_LABEL_ALIASES[key]
    raise UnknownRestorationLabel(f"unknown restoration label: {label!r}")


def parse_suggestion(text: str) -> EditSuggestion:
    """Parse one suggestion; raises UnparseableSuggestion outside the grammar."""
    s = _normalize(text)
    if not s:
        raise UnparseableSuggestion("empty suggestion", span=text)

    if s in _RESTORE_PHRASES:
        return EditSuggestion.restore(_RESTORE_PHRASES[s], source=text)

    m = _CCT_CHANGE_RE.fullmatch(s) or _CCT_BARE_RE.fullmatch(s)
    if m:
        magnitude = _ADVERBS.get(m.group(1) or "", "unspecified")
        return EditSuggestion.retouch("cct", m.group(2), magnitude, source=text)

    m = _BOKEH_RE.fullmatch(s)
    if m:
        # Bokeh phrasing is inverted relative to depth of field.
        direction = "decrease" if m.group(2) in ("enhance", "increase", "boost", "strengthen") else "increase"
        magnitude = _ADVERBS.get(m.group(1) or "", "unspecified")
        return EditSuggestion.retouch("dof", direction, magnitude, source=text)

    stripped = _BOKEH_PAREN_RE.sub("", s)
    m = _GENERIC_RE.fullmatch(stripped)
    if m:
        phrase = m.group(3).strip()
        attribute = _ATTRIBUTE_SYNONYMS.get(phrase)
        if attribute is not None:
            direction = "increase" if m.group(2) in _INCREASE_WORDS else "decrease"
            magnitude = _ADVERBS.get(m.group(1) or "", "unspecified")
            return EditSuggestion.retouch(attribute, direction, magnitude, source=text)

    raise UnparseableSuggestion(f"cannot parse suggestion: {text!r}", span=text)


def _split_items(text: str) -> list[str]:
    items = []
    for part in re.split(r"[;\n]+", text):
        for chunk in part.split(","):
            items.extend(re.split(r"\band\b", chunk))
    return [i for i in (x.strip() for x in items) if _normalize(i)]


def parse_suggestion_list(text: str) -> list[EditSuggestion]:
    """Parse a suggestion list split on numbered lines, semicolons, commas, or "and".

    Two suggestions on the same retouch attribute raise DuplicateAttribute.
    """
    suggestions = [parse_suggestion(item) for item in _split_items(text)]
    seen = set()
    for s in suggestions:
        if s.kind != "retouch":
            continue
        if s.attribute in seen:
            raise DuplicateAttribute(f"duplicate suggestion for attribute {s.attribute!r}")
        seen.add(s.attribute)
    return suggestions


def render_instruction(suggestions: list[EditSuggestion]) -> str:
    """Canonical phrasing; parse_suggestion_list(render_instruction(s)) == s."""
    parts = []
    for s in suggestions:
        if s.kind == "restore":
            parts.append(_RESTORE_CANONICAL[s.task])
        elif s.attribute == "cct":
            parts.append(f"change color temperature to {_ADVERB_FOR[s.magnitude]}{s.direction}")
        else:
            parts.append(f"{_ADVERB_FOR[s.magnitude]}{s.direction} "
                         f"{_ATTRIBUTE_CANONICAL[s.attribute]}")
    return "; ".join(parts)


# --- critic-output template -------------------------------------------------

REASONING_SECTIONS = (
    "image quality/degradations analysis",
    "color performance&lighting analysis",
    "composition&layout analysis",
    "aesthetic impression analysis",
    "comprehensive evaluation",
)

_BLOCK_HEADERS = {
    "reasoning": "image quality&aesthetic reasoning",
    "suggestions": "edit suggestions",
    "scoring": "image quality scoring",
}

_SCORE_RE = re.compile(r"predicted score:\s*(\d+)\s*/\s*100", re.IGNORECASE)


@dataclass(frozen=True)
class FormatViolation:
    kind: str
    detail: str


@dataclass(frozen=True, eq=False)
class CriticOutput:
    """Structured critic response: 5 reasoning sections, suggestions, score."""

    reasoning: dict
    suggestions: tuple
    score: int


def _canon_line(line: str) -> str:
    s = line.strip().strip("*#=-[]: \t").lower()
    s = re.sub(r"\s*&\s*", "&", s)
    s = re.sub(r"\s+and\s+", "&", s)
    return re.sub(r"\s+", " ", s)


def _find_headers(lines: list[str]) -> dict[str, int]:
    found = {}
    for idx, line in enumerate(lines):
        canon = _canon_line(line)
        for name, header in _BLOCK_HEADERS.items():
            if canon == header and name not in found:
                found[name] = idx
    return found


def _split_sections(block_lines: list[str]):
    """Locate the five numbered analysis sections and collect their bodies."""
    order: list[int] = []
    acc: dict[str, list[str]] = {}
    current = None
    section_re = re.compile(r"^\s*[1-9]\s*[.)]\s*(.*)$")
    for line in block_lines:
        m = section_re.match(line)
        started = False
        if m:
            head = _canon_line(m.group(1))
            for i, canonical in enumerate(REASONING_SECTIONS):
                if head.startswith(canonical):
                    # Keep the original casing of any body text after the title.
                    parts = m.group(1).split(":", 1)
                    acc[canonical] = [parts[1].strip()] if len(parts) == 2 else []
                    order.append(i)
                    current = canonical
                    started = True
                    break
        if not started and current is not None:
            acc[current].append(line.strip())
    bodies = {k: " ".join(x for x in v if x).strip() for k, v in acc.items()}
    return order, bodies


def validate_critic_output(text: str):
    """Check text against the [reasoning -> suggestion -> score] template.

    Total on arbitrary input: returns a CriticOutput on success, otherwise a
    list of FormatViolation records. Never raises.
    """
    violations: list[FormatViolation] = []
    lines = text.splitlines()
    headers = _find_headers(lines)

    for name in _BLOCK_HEADERS:
        if name not in headers:
            violations.append(FormatViolation("MissingBlock", f"missing {name} block header"))
    if len(headers) == 3:
        if not headers["reasoning"] < headers["suggestions"] < headers["scoring"]:
            violations.append(FormatViolation(
                "OutOfOrder", "blocks must appear as reasoning, suggestions, score"))
    if violations:
        return violations

    reasoning_lines = lines[headers["reasoning"] + 1 : headers["suggestions"]]
    suggestion_lines = lines[headers["suggestions"] + 1 : headers["scoring"]]
    scoring_lines = lines[headers["scoring"] + 1 :]

    order, bodies = _split_sections(reasoning_lines)
    for i, canonical in enumerate(REASONING_SECTIONS):
        if i not in order:
            violations.append(FormatViolation("MissingSection", canonical))
    if order != sorted(order):
        violations.append(FormatViolation("OutOfOrder", "reasoning sections out of order"))

    sources: tuple = ()
    try:
        parsed = parse_suggestion_list("\n".join(suggestion_lines))
        sources = tuple(s.source for s in parsed)
    except UnparseableSuggestion as exc:
        violations.append(FormatViolation("UnparseableSuggestion", exc.span))
    except DuplicateAttribute as exc:
        violations.append(FormatViolation("DuplicateAttribute", str(exc)))

    score = None
    m = _SCORE_RE.search("\n".join(scoring_lines))
    if m is None:
        violations.append(FormatViolation("MissingScore", 'no "Predicted Score: N/100" line'))
    else:
        score = int(m.group(1))
        if score > 100:
            violations.append(FormatViolation("ScoreOutOfRange", f"score {score} > 100"))

    if violations:
        return violations
    return CriticOutput(reasoning=bodies, suggestions=sources, score=score)


def parse_score(text: str) -> int:
    """Extract the integer from a "Predicted Score: N/100" line."""
    m = _SCORE_RE.search(text)
    if m is None:
        raise ScoreOutOfRange("no predicted-score line found")
    score = int(m.group(1))
    if score > 100:
        raise ScoreOutOfRange(f"score {score} outside [0, 100]")
    return score
