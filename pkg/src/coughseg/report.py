"""Evaluation report assembly: JSON, printed tables, and figures.

The JSON keeps full double precision; rounding to table style (kappa to 3
decimals, precision to a 2-decimal percentage) happens only in the printed
and plotted views.
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from coughseg.audio import AudioClip, waveform_peaks
from coughseg.segment import SegmentBounds

_BAND_EDGES = [0.0, 0.20, 0.40, 0.60, 0.80, 1.00]
_BAND_LABELS = ["slight", "fair", "moderate", "substantial", "almost perfect"]


def print_report(report: dict, stream=None) -> None:
    """Human-readable summary of an evaluation report (diagnostic stream)."""
    stream = stream or sys.stderr
    rows = []
    for section in report["methods"]:
        agreement = section["agreement"]
        prec = section["precision"]
        if "error" in agreement:
            kappa_text, interp = "undef", agreement["error"]
        else:
            kappa_text, interp = f"{agreement['kappa']:.3f}", agreement["interpretation"]
        rows.append(
            (
                section["method"],
                str(prec["N"]),
                str(agreement.get("n", "-")),
                kappa_text,
                interp,
                str(prec["tp"]),
                f"{prec['precision'] * 100:.2f}%",
            )
        )
    header = ("method", "N", "raters", "kappa", "interpretation", "single-cough", "precision")
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) if rows else len(header[c]) for c in range(len(header))]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    print(line, file=stream)
    print("-" * len(line), file=stream)
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)), file=stream)
    worst = [
        (section["method"], section["rater_diagnostics"][0])
        for section in report["methods"]
        if section.get("rater_diagnostics")
    ]
    for method, entry in worst:
        print(
            f"lowest rater agreement ({method}): {entry['rater_id']} at "
            f"{entry['agreement_rate']:.3f} of items",
            file=stream,
        )


def save_report_figures(report: dict, out_dir: str | Path) -> list[Path]:
    """Render the metric charts next to the delimited outputs.

    Produces kappa_by_method.png, precision_by_method.png, and
    rater_agreement.png (skipping charts with nothing to plot).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    methods = [s["method"] for s in report["methods"]]
    kappas = [
        s["agreement"].get("kappa") for s in report["methods"]
    ]
    if any(k is not None for k in kappas):
        path = out_dir / "kappa_by_method.png"
        _kappa_figure(methods, kappas, path)
        written.append(path)

    precisions = [s["precision"]["precision"] for s in report["methods"]]
    path = out_dir / "precision_by_method.png"
    _precision_figure(methods, precisions, path)
    written.append(path)

    diag = {
        s["method"]: s["rater_diagnostics"]
        for s in report["methods"]
        if s.get("rater_diagnostics")
    }
    if diag:
        path = out_dir / "rater_agreement.png"
        _rater_figure(diag, path)
        written.append(path)
    return written


def _kappa_figure(methods, kappas, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(len(methods))
    values = [k if k is not None else 0.0 for k in kappas]
    ax.bar(xs, values, color="#4878b0", width=0.6)
    for edge, label in zip(_BAND_EDGES[1:], _BAND_LABELS):
        ax.axhline(edge, color="grey", linewidth=0.6, linestyle=":")
        ax.text(len(methods) - 0.45, edge - 0.02, label, fontsize=7, color="grey", ha="right")
    for x, k in zip(xs, kappas):
        ax.text(x, (k or 0) + 0.02, "undef" if k is None else f"{k:.3f}", ha="center", fontsize=9)
    ax.set_xticks(xs, methods)
    ax.set_ylim(min(0.0, min(values)) - 0.05, 1.05)
    ax.set_ylabel("Fleiss' kappa")
    ax.set_title("Annotator agreement by segmentation method")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _precision_figure(methods, precisions, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(len(methods))
    ax.bar(xs, [p * 100 for p in precisions], color="#5f9e6e", width=0.6)
    for x, p in zip(xs, precisions):
        ax.text(x, p * 100 + 1, f"{p * 100:.2f}%", ha="center", fontsize=9)
    ax.set_xticks(xs, methods)
    ax.set_ylim(0, 105)
    ax.set_ylabel("precision (%)")
    ax.set_title("Single-cough precision by segmentation method")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _rater_figure(diagnostics_by_method, path):
    methods = list(diagnostics_by_method)
    raters = sorted({d["rater_id"] for rows in diagnostics_by_method.values() for d in rows})
    width = 0.8 / len(methods)
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(raters)), 4))
    xs = np.arange(len(raters))
    for i, method in enumerate(methods):
        rates = {d["rater_id"]: d["agreement_rate"] for d in diagnostics_by_method[method]}
        ax.bar(
            xs + (i - (len(methods) - 1) / 2) * width,
            [rates.get(r, 0.0) for r in raters],
            width=width,
            label=method,
        )
    ax.set_xticks(xs, raters)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("agreement with leave-one-out majority")
    ax.set_title("Per-rater agreement with consensus")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_segment_overlay(
    clip: AudioClip, segments: list[SegmentBounds], path: str | Path
) -> None:
    """Waveform with detected segments shaded, for visual error inspection."""
    peaks = waveform_peaks(clip.samples, max_pairs=1600)
    n = max(1, clip.samples.size)
    duration = n / clip.sample_rate
    times = np.arange(len(peaks)) / max(1, len(peaks)) * duration

    fig, ax = plt.subplots(figsize=(10, 3))
    if peaks:
        lows = [p[0] for p in peaks]
        highs = [p[1] for p in peaks]
        ax.fill_between(times, lows, highs, color="#444444", linewidth=0)
    for seg in segments:
        ax.axvspan(
            seg.start_sample / clip.sample_rate,
            seg.end_sample / clip.sample_rate,
            color="#d65f5f",
            alpha=0.3,
        )
    ax.set_xlim(0, duration)
    ax.set_ylim(-1.05, 1.05)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("amplitude")
    method = segments[0].method if segments else ""
    ax.set_title(f"{clip.source_id}: {len(segments)} segment(s) {method}".strip())
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
