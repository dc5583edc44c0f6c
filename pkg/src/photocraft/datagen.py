"""Paired-dataset synthesis: perturb references away and store the corrective
instruction, so every sample carries an exact ground-truth edit.

Corrections are sampled as magnitude words, mapped to operator parameters,
and the stored input is produced by the exact inverse pipeline. Per-sample
seeds derive from (master_seed, index) by hashing, so synthesis is a pure,
order-insensitive function of the plan and reference set.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .color import Image
from .dsl import (
    MAGNITUDE_WORDS,
    MEASURABLE_ATTRIBUTES,
    EditSuggestion,
    normalize_restoration_label,
    render_instruction,
)
from .errors import IoError, SchemaViolation
from .retouch import (
    DEFAULT_MAGNITUDES,
    MagnitudeTable,
    RetouchParams,
    apply_suggestions,
    invert_stack,
    params_from_suggestions,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthesisPlan:
    """What to perturb, how strongly, and under which master seed."""

    attributes: tuple = MEASURABLE_ATTRIBUTES
    magnitudes: tuple = MAGNITUDE_WORDS
    multi_edit_probability: float = 0.3
    identity_probability: float = 0.0
    master_seed: int = 0
    source_tag: str = "synth"

    def __post_init__(self):
        attrs = tuple(self.attributes)
        if not attrs or any(a not in MEASURABLE_ATTRIBUTES for a in attrs):
            raise ValueError(f"attributes must be a nonempty subset of {MEASURABLE_ATTRIBUTES}")
        mags = tuple(self.magnitudes)
        if not mags or any(m not in MAGNITUDE_WORDS for m in mags):
            raise ValueError(f"magnitudes must be a nonempty subset of {MAGNITUDE_WORDS}")
        for name in ("multi_edit_probability", "identity_probability"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "magnitudes", mags)


def load_plan(path: str | os.PathLike) -> SynthesisPlan:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {k: raw[k] for k in ("attributes", "magnitudes", "multi_edit_probability",
                                 "identity_probability", "master_seed", "source_tag")
             if k in raw}
    return SynthesisPlan(**known)


@dataclass(frozen=True)
class SampleManifestRecord:
    """One synthesized training pair, reproducible from its seed."""

    sample_id: str
    input_path: str
    gt_path: str
    instruction: str
    params: RetouchParams
    restoration_label: str | None
    seed: int
    source: str

    _FIELDS = ("sample_id", "input_path", "gt_path", "instruction", "params",
               "restoration_label", "seed", "source")

    def to_json_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "input_path": self.input_path,
            "gt_path": self.gt_path,
            "instruction": self.instruction,
            "params": self.params.as_dict(),
            "restoration_label": self.restoration_label,
            "seed": self.seed,
            "source": self.source,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SampleManifestRecord":
        missing = [k for k in cls._FIELDS if k not in data]
        if missing:
            raise SchemaViolation(f"missing fields: {missing}")
        params = data["params"]
        if not isinstance(params, dict):
            raise SchemaViolation("params must be an object")
        try:
            params = RetouchParams(**params)
        except TypeError as exc:
            raise SchemaViolation(f"bad params object: {exc}") from exc
        if not isinstance(data["seed"], int):
            raise SchemaViolation("seed must be an integer")
        return cls(
            sample_id=str(data["sample_id"]),
            input_path=str(data["input_path"]),
            gt_path=str(data["gt_path"]),
            instruction=str(data["instruction"]),
            params=params,
            restoration_label=data["restoration_label"],
            seed=data["seed"],
            source=str(data["source"]),
        )


def sample_seed(master_seed: int, index: int) -> int:
    """Stable 63-bit per-sample seed from (master_seed, index)."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


_CANONICAL_ORDER = {a: i for i, a in enumerate(MEASURABLE_ATTRIBUTES)}


def sample_corrections(plan: SynthesisPlan, rng: np.random.Generator) -> list[EditSuggestion]:
    """Sample the corrective suggestion set for one sample, in canonical order."""
    if plan.identity_probability and rng.random() < plan.identity_probability:
        return []
    count = 1
    if len(plan.attributes) >= 2 and rng.random() < plan.multi_edit_probability:
        count = int(rng.integers(2, len(plan.attributes) + 1))
    chosen = rng.choice(len(plan.attributes), size=count, replace=False)
    corrections = []
    for idx in sorted(int(i) for i in chosen):
        attribute = plan.attributes[idx]
        directions = ("warmer", "cooler") if attribute == "cct" else ("increase", "decrease")
        direction = directions[int(rng.integers(0, 2))]
        magnitude = plan.magnitudes[int(rng.integers(0, len(plan.magnitudes)))]
        corrections.append(EditSuggestion.retouch(attribute, direction, magnitude))
    corrections.sort(key=lambda s: _CANONICAL_ORDER[s.attribute])
    return corrections


def _synthesize(base: Image, plan: SynthesisPlan, index: int, table: MagnitudeTable,
                restoration_task: str | None):
    seed = sample_seed(plan.master_seed, index)
    rng = np.random.Generator(np.random.PCG64(seed))
    corrections = sample_corrections(plan, rng)
    correction_params, _ = params_from_suggestions(corrections, table)
    perturbed = invert_stack(base, correction_params)
    suggestions = list(corrections)
    if restoration_task is not None:
        suggestions = [EditSuggestion.restore(restoration_task)] + suggestions
    sample_id = f"{plan.source_tag}-{index:06d}"
    record = SampleManifestRecord(
        sample_id=sample_id,
        input_path=f"{sample_id}_input.png",
        gt_path=f"{sample_id}_gt.png",
        instruction=render_instruction(suggestions),
        params=correction_params.inverse(),
        restoration_label=restoration_task,
        seed=seed,
        source=plan.source_tag,
    )
    return perturbed, record


def synthesize_pair(gt: Image, plan: SynthesisPlan, index: int,
                    table: MagnitudeTable = DEFAULT_MAGNITUDES):
    """Perturb a reference image away from itself and keep the corrective instruction.

    Returns (input_image, record); record.params holds the applied GT->input
    perturbation, and the instruction maps the input back toward the reference.
    """
    return _synthesize(gt, plan, index, table, restoration_task=None)


def synthesize_multi_edit(degraded: Image, restoration_label: str, plan: SynthesisPlan,
                          index: int, table: MagnitudeTable = DEFAULT_MAGNITUDES):
    """Stack a sampled retouch perturbation on an already-degraded image.

    The instruction prepends the restoration phrase for the dataset-supplied
    degradation to the corrective retouch suggestions. The degradation itself
    is not synthesized here; the source dataset owns it.
    """
    task = normalize_restoration_label(restoration_label)
    return _synthesize(degraded, plan, index, table, restoration_task=task)


def generate_reference(x: Image, suggestions: list[EditSuggestion],
                       table: MagnitudeTable = DEFAULT_MAGNITUDES) -> Image:
    """Rule-based pseudo-edit: apply the retouch suggestions in canonical order.

    Shared with the suggestion-exploration reward, so the reference an
    instruction is scored against is the same image this returns.
    """
    return apply_suggestions(x, suggestions, table)


def write_manifest(records, path: str | os.PathLike) -> None:
    """Write newline-delimited JSON, one record per line, UTF-8."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(json.dumps(record.to_json_dict(), sort_keys=True,
                                    separators=(",", ":")))
                fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write manifest {path}: {exc}") from exc


def read_manifest(path: str | os.PathLike) -> list[SampleManifestRecord]:
    """Read a manifest; schema problems name the offending line."""
    records = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read manifest {path}: {exc}") from exc
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"line {number}: invalid JSON ({exc})") from exc
        try:
            records.append(SampleManifestRecord.from_json_dict(data))
        except SchemaViolation as exc:
            raise SchemaViolation(f"line {number}: {exc}") from exc
    return records
