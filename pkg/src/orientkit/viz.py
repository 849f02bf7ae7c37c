"""Matplotlib figure rendering for annotation and evaluation reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .distributions import make_periodic_target
from .geometry import symmetry_candidates


def save_rose_figure(path, bins, curve=None, candidates=(), title=""):
    """Polar rose of an azimuth histogram with an optional fitted-curve overlay."""
    bins = np.asarray(bins, dtype=float)
    theta = np.deg2rad(np.arange(bins.size, dtype=float))
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(5, 5))
    ax.set_theta_zero_location("N")
    ax.set_theta_direction(-1)
    ax.bar(theta, bins, width=np.deg2rad(1.0), color="#4878b0", alpha=0.7, label="histogram")
    rmax = float(bins.max()) if bins.size else 1.0
    if curve is not None:
        curve = np.asarray(curve, dtype=float)
        ax.plot(np.append(theta, theta[0]), np.append(curve, curve[0]), color="#d1495b", lw=1.5, label="fit")
        rmax = max(rmax, float(curve.max()))
    for cand in candidates:
        ax.plot([np.deg2rad(cand)] * 2, [0, rmax], color="#222222", ls="--", lw=1.0)
    ax.set_yticklabels([])
    if title:
        ax.set_title(title, fontsize=10)
    if curve is not None:
        ax.legend(loc="lower right", fontsize=8)
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)


def save_annotation_figure(path, annotation, histogram_bins):
    """Rose diagram of one asset's pseudo-label histogram and fitted model."""
    curve = make_periodic_target(annotation.params).bins
    cands = symmetry_candidates(annotation.params.phi_deg, annotation.params.alpha)
    title = (
        f"{annotation.asset_id}  alpha={annotation.params.alpha}  "
        f"phi={annotation.params.phi_deg:.1f}  status={annotation.status}"
    )
    save_rose_figure(path, histogram_bins, curve=curve, candidates=cands, title=title)


def save_error_histogram(path, errors, thresholds=(15.0, 30.0), title="Angular error"):
    """Histogram plus empirical CDF of per-sample angular errors."""
    errors = np.asarray(list(errors), dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.hist(errors, bins=36, range=(0, 180), color="#4878b0")
    ax1.set_xlabel("error (deg)")
    ax1.set_ylabel("count")
    srt = np.sort(errors)
    ax2.plot(srt, np.arange(1, srt.size + 1) / srt.size, color="#4878b0")
    for t in thresholds:
        ax2.axvline(t, color="#d1495b", ls="--", lw=1.0)
    med = float(np.median(errors))
    ax2.axvline(med, color="#222222", ls=":", lw=1.0)
    ax2.set_xlabel("error (deg)")
    ax2.set_ylabel("fraction below")
    ax2.set_xlim(0, 180)
    ax2.set_ylim(0, 1.02)
    fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_category_overview(path, reports):
    """Per-class asset counts and the flagged-category share."""
    classes = [0, 1, 2, 4]
    totals = {c: 0 for c in classes}
    for r in reports:
        for c, n in r.alpha_histogram.items():
            totals[c] = totals.get(c, 0) + n
    flagged = sum(1 for r in reports if not r.consistent)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax1.bar(range(len(classes)), [totals[c] for c in classes], color="#4878b0")
    ax1.set_xticks(range(len(classes)), [str(c) for c in classes])
    ax1.set_xlabel("symmetry class")
    ax1.set_ylabel("assets")
    ax2.bar(["consistent", "flagged"], [len(reports) - flagged, flagged], color=["#4878b0", "#d1495b"])
    ax2.set_ylabel("categories")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
