"""Intra-asset ensemble annotation from multi-view pseudo-labels.

Per-view azimuth predictions are projected into the asset's canonical world
frame, accumulated into a 360-bin histogram (optionally confidence-weighted
and circularly smoothed), and fitted with the periodic circular model to
recover the asset's main direction and rotational-symmetry class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DiscreteCircularDistribution, PeriodicVonMisesParams
from .errors import InsufficientDataError, ValidationError
from .fitting import FitConfig, canonicalize_phase, fit_periodic, map_symmetry_class
from .geometry import OrientationTriplet

STATUS_AUTO = "auto"
STATUS_NEEDS_REVIEW = "needs_review"
STATUS_HUMAN_OVERRIDDEN = "human_overridden"
STATUS_DISCARDED = "discarded"
STATUSES = (STATUS_AUTO, STATUS_NEEDS_REVIEW, STATUS_HUMAN_OVERRIDDEN, STATUS_DISCARDED)


@dataclass(frozen=True)
class PseudoLabelRecord:
    """One model prediction for one rendering of one asset."""

    asset_id: str
    category: str
    view_id: str
    camera_azimuth_deg: float
    predicted: OrientationTriplet
    confidence: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.camera_azimuth_deg < 360.0):
            raise ValidationError(
                f"camera_azimuth_deg must be in [0, 360), got {self.camera_azimuth_deg!r}"
            )
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence must be in [0, 1], got {self.confidence!r}")


@dataclass(frozen=True)
class AnnotatorConfig:
    smoothing_sigma_deg: float = 3.0
    use_confidence_weights: bool = True
    min_views: int = 8
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.smoothing_sigma_deg < 0:
            raise ValidationError("smoothing_sigma_deg must be >= 0")
        if self.min_views < 1:
            raise ValidationError("min_views must be >= 1")


@dataclass
class AssetAnnotation:
    """Fitted orientation + symmetry label for one asset."""

    asset_id: str
    category: str
    params: PeriodicVonMisesParams
    residual: float
    n_views: int
    status: str = STATUS_AUTO
    reason: str | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValidationError(f"unknown status {self.status!r}")


def project_to_canonical(record: PseudoLabelRecord) -> float:
    """Azimuth of the record's prediction in the canonical world frame."""
    return (record.predicted.azimuth_deg + record.camera_azimuth_deg) % 360.0


def smooth_circular(hist: np.ndarray, sigma_deg: float) -> np.ndarray:
    """Circular Gaussian smoothing of a 1-degree histogram.

    Kernel support is truncated at 4 sigma; the caller renormalizes.
    """
    if sigma_deg <= 0:
        return hist
    radius = min(int(math.ceil(4.0 * sigma_deg)), hist.size // 2)
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (offsets / sigma_deg) ** 2)
    kernel /= kernel.sum()
    out = np.zeros_like(hist)
    for k, w in zip(offsets, kernel):
        out += w * np.roll(hist, k)
    return out


def build_histogram(records, config: AnnotatorConfig = AnnotatorConfig()) -> DiscreteCircularDistribution:
    """Confidence-weighted canonical-azimuth histogram over 360 integer bins.

    Each record deposits its weight into the nearest integer-degree bin
    (bin centers sit on the integers, matching the fitted model's sampling),
    then the histogram is smoothed and normalized.
    """
    records = list(records)
    if len(records) < config.min_views:
        raise InsufficientDataError(
            f"need at least {config.min_views} views, got {len(records)}"
        )
    hist = np.zeros(360)
    for rec in records:
        b = int(round(project_to_canonical(rec))) % 360
        hist[b] += rec.confidence if config.use_confidence_weights else 1.0
    if hist.sum() <= 0.0:
        raise ValidationError("all records carry zero weight")
    hist = smooth_circular(hist, config.smoothing_sigma_deg)
    return DiscreteCircularDistribution(hist / hist.sum(), period_deg=360.0)


def annotate_asset(records, config: AnnotatorConfig = AnnotatorConfig()) -> AssetAnnotation:
    """Histogram, fit, and label one asset's pseudo-label ensemble."""
    records = list(records)
    if not records:
        raise InsufficientDataError("no records given")
    asset_ids = {r.asset_id for r in records}
    if len(asset_ids) != 1:
        raise ValidationError(f"records span multiple assets: {sorted(asset_ids)}")
    hist = build_histogram(records, config)
    fit = fit_periodic(hist, config.fit)
    alpha = map_symmetry_class(fit.params.alpha)
    phi = canonicalize_phase(fit.params.phi_deg, alpha) if alpha >= 1 else 0.0
    return AssetAnnotation(
        asset_id=records[0].asset_id,
        category=records[0].category,
        params=PeriodicVonMisesParams(phi, alpha, fit.params.sigma),
        residual=fit.sse,
        n_views=len(records),
    )


def weighted_circular_mean_deg(angles_deg, weights=None) -> float:
    """Weighted circular mean of angles in degrees, in [0, 360)."""
    a = np.deg2rad(np.asarray(list(angles_deg), dtype=float))
    if a.size == 0:
        raise ValidationError("angles must be non-empty")
    w = np.ones_like(a) if weights is None else np.asarray(list(weights), dtype=float)
    mean = math.atan2(float(np.sum(w * np.sin(a))), float(np.sum(w * np.cos(a))))
    return math.degrees(mean) % 360.0


def aggregate_polar_inplane(records, config: AnnotatorConfig = AnnotatorConfig()) -> tuple[float, float]:
    """Confidence-weighted circular means of the polar and in-plane predictions.

    The azimuth head is the fitted quantity; these aggregates accompany it for
    inspection (review API and figures).
    """
    records = list(records)
    weights = [r.confidence if config.use_confidence_weights else 1.0 for r in records]
    polar = weighted_circular_mean_deg([r.predicted.polar_deg for r in records], weights)
    if polar >= 180.0:  # mean of near-0/near-179 values cannot wrap meaningfully
        polar = polar - 360.0 if polar > 350.0 else 179.999999
        polar = max(polar, 0.0)
    inplane = weighted_circular_mean_deg([r.predicted.inplane_deg for r in records], weights)
    return polar, inplane
