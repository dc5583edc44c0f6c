"""Batch reward reports over a synthesized manifest: CSV plus summary figures.

For each manifest record the instruction is parsed, applied rule-based to the
input image, and the resulting pseudo-edit is scored against the ground
truth. Per-record failures are recorded in the CSV rather than aborting the
batch.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .attributes import ATTRIBUTE_KEYS, attribute_delta
from .datagen import generate_reference, read_manifest
from .dsl import parse_suggestion_list
from .errors import PhotocraftError
from .image_io import read_image
from .retouch import DEFAULT_MAGNITUDES, MagnitudeTable
from .rewards import (
    NoApplicableSuggestion,
    PerceptualDistance,
    RewardConfig,
    artist_reward,
    suggestion_exploration_reward,
)

_CSV_COLUMNS = (
    "sample_id", "instruction", "compliance",
    "r_exposure", "r_contrast", "r_saturation", "r_cct",
    "photometric", "perceptual", "total", "exploration", "error",
)


@dataclass(frozen=True)
class ReportSummary:
    samples: int
    failures: int
    mean_total: float | None
    csv_path: Path
    figure_paths: tuple


def _fmt(value) -> str:
    return "" if value is None else f"{value:.6f}"


def generate_report(manifest_path, out_dir,
                    cfg: RewardConfig | None = None,
                    table: MagnitudeTable = DEFAULT_MAGNITUDES,
                    metric: PerceptualDistance | None = None) -> ReportSummary:
    cfg = cfg or RewardConfig()
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = manifest_path.parent

    records = read_manifest(manifest_path)
    rows = []
    totals = []
    deltas_e = {k: [] for k in ATTRIBUTE_KEYS}
    deltas_gt = {k: [] for k in ATTRIBUTE_KEYS}
    per_attr = {k: [] for k in ATTRIBUTE_KEYS}

    for record in records:
        row = {c: "" for c in _CSV_COLUMNS}
        row["sample_id"] = record.sample_id
        row["instruction"] = record.instruction
        try:
            x = read_image(base / record.input_path)
            gt = read_image(base / record.gt_path)
            suggestions = parse_suggestion_list(record.instruction)
            reference = generate_reference(x, suggestions, table)
            breakdown = artist_reward(x, reference, gt, suggestions, cfg, metric)
            de = attribute_delta(reference, x)
            dg = attribute_delta(gt, x)
            row["compliance"] = _fmt(breakdown.compliance)
            for key in ATTRIBUTE_KEYS:
                row[f"r_{key}"] = _fmt(breakdown.per_attribute[key])
                per_attr[key].append(breakdown.per_attribute[key])
                deltas_e[key].append(de.value_for(key))
                deltas_gt[key].append(dg.value_for(key))
            row["photometric"] = _fmt(breakdown.photometric)
            row["perceptual"] = _fmt(breakdown.perceptual)
            row["total"] = _fmt(breakdown.total)
            totals.append(breakdown.total)
            try:
                row["exploration"] = _fmt(suggestion_exploration_reward(
                    x, gt, suggestions, cfg, table=table,
                    restoration_label=record.restoration_label))
            except NoApplicableSuggestion:
                pass
        except PhotocraftError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    csv_path = out_dir / "rewards.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    figures = []
    if totals:
        figures.append(_total_histogram(totals, cfg, out_dir))
        figures.append(_attribute_bars(per_attr, out_dir))
        figures.append(_delta_scatter(deltas_e, deltas_gt, out_dir))

    failures = sum(1 for r in rows if r["error"])
    mean_total = float(np.mean(totals)) if totals else None
    return ReportSummary(samples=len(rows), failures=failures, mean_total=mean_total,
                         csv_path=csv_path, figure_paths=tuple(figures))


def _total_histogram(totals, cfg, out_dir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(totals, bins=20, range=(0.0, cfg.lambda1 + cfg.lambda2), color="#4878a8",
            edgecolor="white")
    ax.set_xlabel("total reward")
    ax.set_ylabel("samples")
    ax.set_title("Gated reward distribution")
    path = out_dir / "reward_histogram.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _attribute_bars(per_attr, out_dir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    keys = list(ATTRIBUTE_KEYS)
    means = [float(np.mean(per_attr[k])) for k in keys]
    stds = [float(np.std(per_attr[k])) for k in keys]
    ax.bar(keys, means, yerr=stds, capsize=4, color="#6aa84f")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("mean attribute reward")
    ax.set_title("Per-attribute photometric rewards")
    path = out_dir / "attribute_rewards.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _delta_scatter(deltas_e, deltas_gt, out_dir: Path) -> Path:
    fig, axes = plt.subplots(2, 2, figsize=(8, 7))
    for ax, key in zip(axes.ravel(), ATTRIBUTE_KEYS):
        gt = np.asarray(deltas_gt[key])
        ed = np.asarray(deltas_e[key])
        ax.scatter(gt, ed, s=12, alpha=0.7, color="#b45f06")
        span = max(1e-6, float(np.max(np.abs(np.concatenate([gt, ed])))))
        ax.plot([-span, span], [-span, span], lw=1, color="gray")
        ax.set_title(key)
        ax.set_xlabel("ground-truth delta")
        ax.set_ylabel("applied delta")
    fig.suptitle("Attribute deltas: rule-based edit vs ground truth")
    path = out_dir / "attribute_deltas.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
