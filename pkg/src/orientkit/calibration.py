"""Inter-asset consistency calibration and the human decision log.

Assets of one category are expected to share a rotational-symmetry class.
Categories where every annotation agrees are accepted outright; disagreeing
categories have all their assets flagged for human review.  Reviewer
decisions form an append-only log resolved per target by timestamp.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .annotator import (
    STATUS_AUTO,
    STATUS_DISCARDED,
    STATUS_HUMAN_OVERRIDDEN,
    STATUS_NEEDS_REVIEW,
    AssetAnnotation,
)
from .distributions import PeriodicVonMisesParams
from .errors import UnknownTargetError, ValidationError
from .fitting import SYMMETRY_CLASSES, canonicalize_phase

ACTION_ACCEPT = "accept"
ACTION_OVERRIDE = "override"
ACTION_DISCARD = "discard"
ACTIONS = (ACTION_ACCEPT, ACTION_OVERRIDE, ACTION_DISCARD)

WHOLE_CATEGORY = "*"


@dataclass
class CategoryReport:
    category: str
    alpha_histogram: dict[int, int]
    consistent: bool
    majority_alpha: int | None
    flagged_asset_ids: list[str]


@dataclass(frozen=True)
class CalibrationDecision:
    """One reviewer verdict for an asset or a whole category ('*')."""

    category: str
    asset_id: str
    action: str
    alpha: int | None = None
    phi_deg: float | None = None
    reviewer: str = "reviewer"
    timestamp: str = ""

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ValidationError(f"action must be one of {ACTIONS}, got {self.action!r}")
        if self.action == ACTION_OVERRIDE:
            if self.alpha not in SYMMETRY_CLASSES:
                raise ValidationError(
                    f"override alpha must be one of {SYMMETRY_CLASSES}, got {self.alpha!r}"
                )
            if self.phi_deg is None:
                raise ValidationError("override requires phi_deg")


def check_category(annotations: list[AssetAnnotation]) -> CategoryReport:
    """Consistency check over one category's annotations.

    When classes disagree, every asset in the category is flagged and any
    annotation still in the automatic state moves to needs_review (discarded
    and human-overridden annotations keep their status).
    """
    if not annotations:
        raise ValidationError("annotations must be non-empty")
    categories = {a.category for a in annotations}
    if len(categories) != 1:
        raise ValidationError(f"annotations span multiple categories: {sorted(categories)}")
    counts = Counter(a.params.alpha for a in annotations)
    histogram = {c: counts.get(c, 0) for c in SYMMETRY_CLASSES}
    consistent = sum(1 for v in histogram.values() if v > 0) == 1
    majority = max(sorted(histogram), key=lambda c: histogram[c])
    flagged: list[str] = []
    if not consistent:
        flagged = [a.asset_id for a in annotations]
        for a in annotations:
            if a.status in (STATUS_AUTO, STATUS_NEEDS_REVIEW):
                a.status = STATUS_NEEDS_REVIEW
    return CategoryReport(
        category=annotations[0].category,
        alpha_histogram=histogram,
        consistent=consistent,
        majority_alpha=majority,
        flagged_asset_ids=flagged,
    )


def _decision_sort_key(indexed_decision):
    i, d = indexed_decision
    return (d.timestamp, i)


def _apply_one(annotation: AssetAnnotation, decision: CalibrationDecision) -> AssetAnnotation:
    if decision.action == ACTION_ACCEPT:
        return replace(annotation, status=STATUS_AUTO)
    if decision.action == ACTION_DISCARD:
        return replace(annotation, status=STATUS_DISCARDED)
    phi = canonicalize_phase(decision.phi_deg, decision.alpha) if decision.alpha >= 1 else 0.0
    params = PeriodicVonMisesParams(phi, decision.alpha, annotation.params.sigma)
    return replace(annotation, params=params, status=STATUS_HUMAN_OVERRIDDEN)


def apply_decisions(
    annotations: list[AssetAnnotation], decisions: list[CalibrationDecision]
) -> list[AssetAnnotation]:
    """Apply a decision log; returns new annotations, inputs untouched.

    Whole-category decisions expand per asset at apply time; for each asset
    only the latest decision (by timestamp, then log order) takes effect.
    Annotations that arrive already discarded never change.
    """
    by_asset = {a.asset_id: a for a in annotations}
    by_category: dict[str, list[str]] = {}
    for a in annotations:
        by_category.setdefault(a.category, []).append(a.asset_id)

    unknown = []
    effective: dict[str, CalibrationDecision] = {}
    for _, d in sorted(enumerate(decisions), key=_decision_sort_key):
        if d.asset_id == WHOLE_CATEGORY:
            ids = by_category.get(d.category)
            if ids is None:
                unknown.append(f"{d.category}/*")
                continue
            for asset_id in ids:
                effective[asset_id] = d
        else:
            target = by_asset.get(d.asset_id)
            if target is None or target.category != d.category:
                unknown.append(f"{d.category}/{d.asset_id}")
                continue
            effective[d.asset_id] = d
    if unknown:
        raise UnknownTargetError(f"decisions reference unknown targets: {sorted(set(unknown))}")

    out = []
    for a in annotations:
        d = effective.get(a.asset_id)
        if d is None or a.status == STATUS_DISCARDED:
            out.append(replace(a))
        else:
            out.append(_apply_one(a, d))
    return out


@dataclass
class CalibrationSummary:
    total_categories: int
    inconsistent_categories: int
    flag_rate: float
    alpha_distribution: dict[int, int]


def summarize(reports: list[CategoryReport]) -> CalibrationSummary:
    """Aggregate flag rate and class distribution over category reports."""
    total = len(reports)
    inconsistent = sum(1 for r in reports if not r.consistent)
    dist = {c: 0 for c in SYMMETRY_CLASSES}
    for r in reports:
        for c, n in r.alpha_histogram.items():
            dist[c] = dist.get(c, 0) + n
    return CalibrationSummary(
        total_categories=total,
        inconsistent_categories=inconsistent,
        flag_rate=(inconsistent / total) if total else 0.0,
        alpha_distribution=dist,
    )
