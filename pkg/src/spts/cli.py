"""Experiment-runner CLI: single config file in, CSV/JSON reports and figures out.

Exit codes: 0 success, 2 config error, 3 runtime numerical error.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, config_hash, load_config
from .dictionary import export_atom_grids_csv, load_dictionary, save_dictionary
from .recovery import write_reconstructions_jsonl
from . import experiments, figures


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    header = list(rows[0].keys())
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in header])


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, sort_keys=True, indent=2)
        f.write("\n")


def _prepare(config_path, out, seed) -> tuple[ExperimentConfig, Path]:
    cfg = load_config(config_path)
    if seed is not None:
        raw = dict(cfg.raw)
        raw["master_seed"] = seed
        cfg = dataclasses.replace(cfg, master_seed=seed, raw=raw)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


def _manifest(out_dir: Path, cfg: ExperimentConfig, command: str) -> None:
    _write_json(out_dir / "manifest.json", {
        "command": command,
        "config_hash": config_hash(cfg),
        "master_seed": cfg.master_seed,
        "version": __version__,
    })


def _load_psi(out_dir: Path):
    path = out_dir / "dictionary.spts"
    if not path.exists():
        raise ConfigError(
            f"dictionary file {path} not found; run 'spts dict-train' first")
    return load_dictionary(path)


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="Experiment config file (YAML).")(fn)
    fn = click.option("--out", default="out", show_default=True,
                      help="Output directory.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config master seed.")(fn)
    fn = click.option("--jobs", type=int, default=1, show_default=True,
                      help="Worker limit (runs are deterministic regardless).")(fn)
    fn = click.option("--figures/--no-figures", "render_figures", default=True,
                      show_default=True, help="Render PNG figures next to the CSVs.")(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """Single-output tactile skin emulator and experiment runner."""


def _run(command, config_path, out, seed, body):
    try:
        cfg, out_dir = _prepare(config_path, out, seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    try:
        body(cfg, out_dir)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except (np.linalg.LinAlgError, FloatingPointError, AssertionError) as exc:
        click.echo(f"numerical error: {exc}", err=True)
        sys.exit(3)
    _manifest(out_dir, cfg, command)


@main.command("dict-train")
@_common_options
def dict_train(config_path, out, seed, jobs, render_figures):
    """Learn the tactile dictionary and write it with a training log."""

    def body(cfg, out_dir):
        psi = experiments.train_dictionary(cfg)
        save_dictionary(out_dir / "dictionary.spts", psi)
        export_atom_grids_csv(out_dir / "dictionary_atoms.csv", psi,
                              cfg.geometry.rows, cfg.geometry.cols)
        log_rows = [{"iteration": i, "error": e}
                    for i, e in enumerate(psi.meta.get("errors", []))]
        _write_csv(out_dir / "dictionary_training_log.csv", log_rows)

    _run("dict-train", config_path, out, seed, body)


@main.command("classify-sweep")
@_common_options
def classify_sweep(config_path, out, seed, jobs, render_figures):
    """Classification accuracy vs measurement level, with raster baseline."""

    def body(cfg, out_dir):
        psi = _load_psi(out_dir)
        rows, summary = experiments.run_classify_sweep(cfg, psi)
        _write_csv(out_dir / "classify_sweep.csv", rows)
        _write_json(out_dir / "classify_summary.json", summary)
        if render_figures:
            figures.classify_figure(rows, out_dir / "classify_accuracy.png")
            figures.frame_rate_figure(rows, out_dir / "frame_rate.png")

    _run("classify-sweep", config_path, out, seed, body)


@main.command("support-sweep")
@_common_options
def support_sweep(config_path, out, seed, jobs, render_figures):
    """Support-accuracy sweep split by small/large contact area."""

    def body(cfg, out_dir):
        psi = _load_psi(out_dir)
        rows = experiments.run_support_sweep(cfg, psi)
        _write_csv(out_dir / "support_sweep.csv", rows)
        if render_figures:
            figures.support_figure(rows, out_dir / "support_accuracy.png")

    _run("support-sweep", config_path, out, seed, body)


@main.command("bounce")
@_common_options
def bounce(config_path, out, seed, jobs, render_figures):
    """High-speed bounce capture: frame counts, delta pressure, max-pressure traces."""

    def body(cfg, out_dir):
        psi = _load_psi(out_dir)
        rows, trace_rows = experiments.run_bounce(cfg, psi)
        _write_csv(out_dir / "bounce.csv", rows)
        _write_csv(out_dir / "bounce_traces.csv", trace_rows)
        if render_figures:
            figures.bounce_figure(rows, trace_rows, out_dir / "bounce.png")

    _run("bounce", config_path, out, seed, body)


@main.command("localize")
@_common_options
def localize(config_path, out, seed, jobs, render_figures):
    """Contact-localization error vs measurement level over bounce trials."""

    def body(cfg, out_dir):
        psi = _load_psi(out_dir)
        rows, summary = experiments.run_localize(cfg, psi)
        _write_csv(out_dir / "localize.csv", rows)
        _write_json(out_dir / "localize_summary.json", summary)
        if render_figures:
            figures.localize_figure(summary, out_dir / "localize_error.png")

    _run("localize", config_path, out, seed, body)


@main.command("adapt")
@_common_options
def adapt(config_path, out, seed, jobs, render_figures):
    """Progressive-prefix reconstructions of a chosen scene."""

    def body(cfg, out_dir):
        psi = _load_psi(out_dir)
        recons, rows, truth = experiments.run_adapt(cfg, psi)
        write_reconstructions_jsonl(out_dir / "adapt_frames.jsonl", recons)
        _write_csv(out_dir / "adapt.csv", rows)
        if render_figures:
            figures.adapt_figure(recons, truth, out_dir / "adapt.png")

    _run("adapt", config_path, out, seed, body)


if __name__ == "__main__":
    main()
