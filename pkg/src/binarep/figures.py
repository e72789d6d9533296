"""Matplotlib figures written next to the CLI's CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_KIND_TITLES = {"ba": "Background activity", "occlusion": "Occlusion"}


def save_rad_figure(rows, path):
    """Severity vs relative-accuracy-drop curves, one panel per corruption.

    rows: dicts with corruption, severity, score.
    """
    kinds = sorted({row["corruption"] for row in rows})
    fig, axes = plt.subplots(len(kinds), 1, figsize=(5, 3.2 * len(kinds)), squeeze=False)
    for ax, kind in zip(axes[:, 0], kinds):
        points = sorted(
            ((row["severity"], row["score"]) for row in rows if row["corruption"] == kind)
        )
        ax.plot([s for s, _ in points], [v for _, v in points], marker="o")
        ax.set_title(_KIND_TITLES.get(kind, kind))
        ax.set_xlabel("severity level")
        ax.set_ylabel("relative accuracy drop (%)")
        ax.set_xticks([s for s, _ in points])
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_stats_figure(rows, path):
    """Mean density and saturation per representation, as grouped bars.

    rows: dicts with name, density, saturation.
    """
    names = []
    density = []
    saturation = []
    for row in rows:
        if row["name"] not in names:
            names.append(row["name"])
            density.append([])
            saturation.append([])
        i = names.index(row["name"])
        density[i].append(row["density"])
        saturation[i].append(row["saturation"])

    mean = lambda vals: sum(vals) / len(vals)
    fig, ax = plt.subplots(figsize=(1.6 * len(names) + 2, 3.6))
    xs = range(len(names))
    width = 0.38
    ax.bar([x - width / 2 for x in xs], [mean(d) for d in density], width, label="density")
    ax.bar([x + width / 2 for x in xs], [mean(s) for s in saturation], width, label="saturation")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("fraction of pixels")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
