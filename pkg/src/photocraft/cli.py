"""photocraft command-line interface."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .attributes import measure_attributes
from .datagen import (
    load_plan,
    read_manifest,
    synthesize_multi_edit,
    synthesize_pair,
    write_manifest,
)
from .dsl import CriticOutput, parse_suggestion_list, validate_critic_output
from .errors import PhotocraftError
from .image_io import read_image, write_png
from .retouch import DEFAULT_MAGNITUDES, load_magnitude_table
from .rewards import ExternalMetric, RewardConfig, artist_reward
from .rl import RewardGroup, group_advantages, reward_to_probability

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


def _fail(message: str):
    raise click.ClickException(message)


def _load_table(path):
    return load_magnitude_table(path) if path else DEFAULT_MAGNITUDES


@click.group()
def main():
    """Deterministic rewards, retouching operators, and dataset synthesis."""


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
def measure(image):
    """Print the attribute vector of IMAGE as JSON."""
    try:
        vector = measure_attributes(read_image(image))
    except PhotocraftError as exc:
        _fail(str(exc))
    click.echo(json.dumps(vector.as_dict(), indent=2))


@main.command(name="parse")
@click.option("--suggestions", "suggestions_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Text file with a suggestion list.")
def parse_cmd(suggestions_path):
    """Parse a suggestion list and print it as JSON."""
    text = Path(suggestions_path).read_text(encoding="utf-8")
    try:
        parsed = parse_suggestion_list(text)
    except PhotocraftError as exc:
        _fail(str(exc))
    click.echo(json.dumps([s.as_dict() for s in parsed], indent=2))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def validate(file):
    """Validate a critic output template; exit nonzero on violations."""
    result = validate_critic_output(Path(file).read_text(encoding="utf-8"))
    if isinstance(result, CriticOutput):
        click.echo(json.dumps({
            "reasoning": result.reasoning,
            "suggestions": list(result.suggestions),
            "score": result.score,
        }, indent=2))
        return
    click.echo(json.dumps([{"kind": v.kind, "detail": v.detail} for v in result], indent=2))
    sys.exit(1)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--edited", "edited_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--suggestions", "suggestions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--metric-cmd", default=None,
              help="External perceptual metric command (reads two paths on stdin, prints a distance).")
def score(input_path, edited_path, gt_path, suggestions_path, metric_cmd):
    """Print the reward breakdown for one (input, edited, ground-truth) tuple."""
    try:
        x = read_image(input_path)
        xe = read_image(edited_path)
        xgt = read_image(gt_path)
        suggestions = parse_suggestion_list(Path(suggestions_path).read_text(encoding="utf-8"))
        metric = ExternalMetric(metric_cmd) if metric_cmd else None
        breakdown = artist_reward(x, xe, xgt, suggestions, RewardConfig(), metric)
    except PhotocraftError as exc:
        _fail(str(exc))
    click.echo(json.dumps(breakdown.as_dict(), indent=2))


@main.command()
@click.option("--rewards", "rewards_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Text file with one reward per line.")
def advantages(rewards_path):
    """Print group-normalized advantages and optimality probabilities as JSON."""
    lines = [ln for ln in Path(rewards_path).read_text(encoding="utf-8").splitlines()
             if ln.strip()]
    try:
        group = RewardGroup(tuple(float(ln) for ln in lines))
    except ValueError as exc:
        _fail(str(exc))
    result = group_advantages(group)
    click.echo(json.dumps({
        "advantages": list(result.advantages),
        "optimality": list(reward_to_probability(group)),
        "degenerate": result.degenerate,
    }, indent=2))


@main.command()
@click.option("--gt-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(dir_okay=False))
@click.option("--multi-edit", is_flag=True, default=False,
              help="Treat --gt-dir images as degraded bases; requires --labels.")
@click.option("--labels", "labels_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="JSON map of file name to restoration label.")
@click.option("--magnitudes", "magnitudes_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON magnitude table overriding the defaults.")
def synth(gt_dir, plan_path, out_dir, manifest_path, multi_edit, labels_path, magnitudes_path):
    """Synthesize retouching pairs and write images plus an NDJSON manifest."""
    if multi_edit and labels_path is None:
        _fail("--multi-edit requires --labels")
    plan = load_plan(plan_path)
    table = _load_table(magnitudes_path)
    labels = {}
    if labels_path:
        labels = json.loads(Path(labels_path).read_text(encoding="utf-8"))
    files = sorted(p for p in Path(gt_dir).iterdir()
                   if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not files:
        _fail(f"no images found in {gt_dir}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    try:
        for index, path in enumerate(files):
            base = read_image(path)
            if multi_edit:
                if path.name not in labels:
                    _fail(f"no restoration label for {path.name}")
                perturbed, record = synthesize_multi_edit(
                    base, labels[path.name], plan, index, table)
            else:
                perturbed, record = synthesize_pair(base, plan, index, table)
            write_png(perturbed, out / record.input_path)
            write_png(base, out / record.gt_path)
            records.append(record)
        write_manifest(records, manifest_path)
    except PhotocraftError as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(records)} samples to {out} (manifest: {manifest_path})")


@main.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False),
              help="Report directory (default: <manifest dir>/report).")
@click.option("--metric-cmd", default=None,
              help="External perceptual metric command.")
@click.option("--magnitudes", "magnitudes_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def report(manifest_path, out_dir, metric_cmd, magnitudes_path):
    """Score every manifest record and render a CSV plus summary figures."""
    from .report import generate_report

    manifest = Path(manifest_path)
    destination = Path(out_dir) if out_dir else manifest.parent / "report"
    metric = ExternalMetric(metric_cmd) if metric_cmd else None
    try:
        summary = generate_report(manifest, destination, RewardConfig(),
                                  _load_table(magnitudes_path), metric)
    except PhotocraftError as exc:
        _fail(str(exc))
    click.echo(f"scored {summary.samples} samples ({summary.failures} failures)")
    if summary.mean_total is not None:
        click.echo(f"mean total reward: {summary.mean_total:.4f}")
    click.echo(f"csv: {summary.csv_path}")
    for fig in summary.figure_paths:
        click.echo(f"figure: {fig}")


if __name__ == "__main__":
    main()
