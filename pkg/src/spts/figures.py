"""Matplotlib figure rendering for the CLI report path.

Figures are rendered to PNG next to the delimited output. The core pipeline
never imports this module, so headless use of the library stays
matplotlib-free.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams.update({
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
})


def _mean_by_m(rows, key, predicate=None):
    ms = sorted({r["m"] for r in rows})
    means = []
    for m in ms:
        sel = [r[key] for r in rows if r["m"] == m
               and (predicate is None or predicate(r))]
        means.append(np.mean(sel) if sel else np.nan)
    return ms, means


def classify_figure(rows, path) -> None:
    ms, acc = _mean_by_m(rows, "correct")
    _, racc = _mean_by_m(rows, "raster_correct")
    fig, ax = plt.subplots()
    ax.plot(ms, acc, "o-", label="compressive")
    ax.plot(ms, racc, "s--", label="raster baseline")
    ax.set_xlabel("measurements per frame M")
    ax.set_ylabel("classification accuracy")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def frame_rate_figure(rows, path) -> None:
    ms = sorted({r["m"] for r in rows})
    fps = [next(r["fps"] for r in rows if r["m"] == m) / 1000.0 for m in ms]
    fig, ax = plt.subplots()
    ax.plot(ms, fps, "o-")
    ax.set_xlabel("measurements per frame M")
    ax.set_ylabel("frame rate (kHz)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def support_figure(rows, path) -> None:
    fig, ax = plt.subplots()
    for cls, style in (("small", "o-"), ("large", "s--")):
        ms, acc = _mean_by_m(rows, "accuracy", lambda r, c=cls: r["size_class"] == c)
        if not all(np.isnan(acc)):
            ax.plot(ms, acc, style, label=f"{cls} objects")
    ms, racc = _mean_by_m(rows, "raster_accuracy")
    ax.plot(ms, racc, "^:", label="raster baseline")
    ax.set_xlabel("measurements per frame M")
    ax.set_ylabel("support accuracy")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def bounce_figure(rows, trace_rows, path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))
    ms, dp = _mean_by_m(rows, "delta_pressure")
    ax1.plot(ms, dp, "o-")
    ax1.set_xlabel("measurements per frame M")
    ax1.set_ylabel("mean Δ intensity per frame (S)")
    for m in sorted({r["m"] for r in trace_rows}):
        sel = [r for r in trace_rows if r["m"] == m and r["trial"] == 0]
        ax2.plot([r["t"] * 1000 for r in sel], [r["max_intensity"] for r in sel],
                 ".-", label=f"M={m}")
    ax2.set_xlabel("time (ms)")
    ax2.set_ylabel("max intensity (S)")
    ax2.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def localize_figure(summary, path) -> None:
    ms = sorted(int(k) for k in summary)
    errs = [summary[str(m)]["mean_error_px"] for m in ms]
    fig, ax = plt.subplots()
    ax.plot(ms, errs, "o-")
    ax.set_xlabel("measurements per frame M")
    ax.set_ylabel("mean CoM error (px)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def adapt_figure(recons, truth, path) -> None:
    n = len(recons) + 1
    cols = min(6, n)
    rows_ = int(np.ceil(n / cols))
    fig, axes = plt.subplots(rows_, cols, figsize=(2.0 * cols, 2.0 * rows_))
    axes = np.atleast_1d(axes).ravel()
    vmax = max(truth.conductance.max(),
               max(r.frame.conductance.max() for r in recons)) or 1.0
    axes[0].imshow(truth.grid(), vmin=0, vmax=vmax, cmap="inferno")
    axes[0].set_title("truth", fontsize=8)
    for ax, r in zip(axes[1:], recons):
        ax.imshow(r.frame.grid(), vmin=0, vmax=vmax, cmap="inferno")
        ax.set_title(f"M={r.m_used}", fontsize=8)
    for ax in axes:
        ax.set_xticks([])
        ax.set_yticks([])
        ax.grid(False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
