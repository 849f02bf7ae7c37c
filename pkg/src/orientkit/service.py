"""HTTP review service backing the human calibration UI.

Serves category reports and per-asset detail (histogram plus fitted curve for
the rose diagram), accepts reviewer decisions, and appends every accepted
decision to an append-only JSONL log before mutating in-memory state.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from filelock import FileLock

from . import io
from .annotator import (
    STATUS_DISCARDED,
    STATUS_NEEDS_REVIEW,
    AnnotatorConfig,
    AssetAnnotation,
    aggregate_polar_inplane,
    build_histogram,
)
from .calibration import ACTIONS, WHOLE_CATEGORY, CalibrationDecision, apply_decisions, check_category
from .distributions import make_periodic_target
from .errors import InsufficientDataError, UnknownTargetError, ValidationError
from .fitting import SYMMETRY_CLASSES
from .geometry import symmetry_candidates


@dataclass
class ReviewState:
    annotations: dict[str, AssetAnnotation]
    records_by_asset: dict[str, list] = field(default_factory=dict)
    decision_log_path: str = "decisions.jsonl"
    decided_asset_ids: set[str] = field(default_factory=set)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def categories(self) -> dict[str, list[AssetAnnotation]]:
        out: dict[str, list[AssetAnnotation]] = {}
        for a in self.annotations.values():
            out.setdefault(a.category, []).append(a)
        return out


def build_state(annotations_path, pseudo_labels_path=None, decision_log_path="decisions.jsonl") -> ReviewState:
    """Load annotations, replay any existing decision log, and flag inconsistencies."""
    annotations = io.read_annotations(annotations_path)
    if Path(decision_log_path).exists():
        decisions = io.read_decisions(decision_log_path)
        annotations = apply_decisions(annotations, decisions)
        decided = {d.asset_id for d in decisions if d.asset_id != WHOLE_CATEGORY}
    else:
        decided = set()
    state = ReviewState(
        annotations={a.asset_id: a for a in annotations},
        decision_log_path=str(decision_log_path),
        decided_asset_ids=decided,
    )
    if pseudo_labels_path:
        for r in io.read_pseudo_labels(pseudo_labels_path):
            state.records_by_asset.setdefault(r.asset_id, []).append(r)
    for members in state.categories().values():
        active = [a for a in members if a.status != STATUS_DISCARDED]
        if active:
            check_category(active)
    return state


def _live_report(category: str, members: list[AssetAnnotation]) -> dict:
    """Read-only category report over non-discarded annotations."""
    active = [a for a in members if a.status != STATUS_DISCARDED]
    counts = {c: 0 for c in SYMMETRY_CLASSES}
    for a in active:
        counts[a.params.alpha] += 1
    consistent = sum(1 for v in counts.values() if v > 0) == 1
    pending = [a.asset_id for a in active if a.status == STATUS_NEEDS_REVIEW]
    majority = max(sorted(counts), key=lambda c: counts[c]) if active else None
    return {
        "category": category,
        "alpha_histogram": {str(c): counts[c] for c in SYMMETRY_CLASSES},
        "consistent": consistent,
        "majority_alpha": majority,
        "flagged_asset_ids": pending,
        "n_assets": len(members),
        "n_pending": len(pending),
    }


def _annotation_view(a: AssetAnnotation) -> dict:
    return {
        "asset_id": a.asset_id,
        "category": a.category,
        "alpha": a.params.alpha,
        "phi_deg": round(a.params.phi_deg, 6),
        "sigma": a.params.sigma,
        "residual": a.residual,
        "n_views": a.n_views,
        "status": a.status,
        "reason": a.reason,
    }


_FALLBACK_PAGE = """<!doctype html>
<html><head><title>orientkit review</title></head>
<body><h1>orientkit review service</h1>
<p>No UI bundle is installed. The JSON API lives under <code>/api</code>:
<code>/api/status</code>, <code>/api/categories?status=flagged</code>,
<code>/api/categories/{name}</code>, <code>/api/assets/{id}</code>,
<code>POST /api/decisions</code>.</p></body></html>
"""


def _bad_request(errors: dict) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": errors})


def _validate_decision_payload(payload: dict, state: ReviewState):
    errors = {}
    if not isinstance(payload, dict):
        return None, {"body": "must be a JSON object"}
    category = payload.get("category")
    asset_id = payload.get("asset_id")
    action = payload.get("action")
    if not isinstance(category, str) or not category:
        errors["category"] = "required string"
    if not isinstance(asset_id, str) or not asset_id:
        errors["asset_id"] = "required string (asset id or '*')"
    if action not in ACTIONS:
        errors["action"] = f"must be one of {list(ACTIONS)}"
    alpha = payload.get("alpha")
    phi = payload.get("phi_deg")
    if action == "override":
        if alpha not in SYMMETRY_CLASSES:
            errors["alpha"] = f"must be one of {list(SYMMETRY_CLASSES)}"
        if not isinstance(phi, (int, float)):
            errors["phi_deg"] = "required number"
    if errors:
        return None, errors
    decision = CalibrationDecision(
        category=category,
        asset_id=asset_id,
        action=action,
        alpha=None if alpha is None else int(alpha),
        phi_deg=None if phi is None else float(phi) % 360.0,
        reviewer=str(payload.get("reviewer", "reviewer")),
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
    return decision, None


def create_app(state: ReviewState, ui_dir=None) -> FastAPI:
    app = FastAPI(title="orientkit review service")
    file_lock = FileLock(state.decision_log_path + ".lock")

    @app.get("/api/status")
    def status():
        annotations = list(state.annotations.values())
        reports = [_live_report(c, m) for c, m in sorted(state.categories().items())]
        return {
            "assets": len(annotations),
            "categories": len(reports),
            "flagged_categories": sum(1 for r in reports if not r["consistent"]),
            "pending": sum(1 for a in annotations if a.status == STATUS_NEEDS_REVIEW),
            "resolved": len(state.decided_asset_ids),
        }

    @app.get("/api/categories")
    def categories(status: str = "all"):
        reports = [_live_report(c, m) for c, m in sorted(state.categories().items())]
        if status == "flagged":
            reports = [r for r in reports if not r["consistent"]]
        elif status == "consistent":
            reports = [r for r in reports if r["consistent"]]
        elif status != "all":
            return _bad_request({"status": "must be one of all|flagged|consistent"})
        return reports

    @app.get("/api/categories/{name}")
    def category_detail(name: str):
        members = state.categories().get(name)
        if members is None:
            return JSONResponse(status_code=404, content={"detail": f"unknown category {name!r}"})
        report = _live_report(name, members)
        report["assets"] = [_annotation_view(a) for a in members]
        return report

    @app.get("/api/assets/{asset_id}")
    def asset_detail(asset_id: str):
        annotation = state.annotations.get(asset_id)
        if annotation is None:
            return JSONResponse(status_code=404, content={"detail": f"unknown asset {asset_id!r}"})
        view = _annotation_view(annotation)
        view["candidates"] = symmetry_candidates(annotation.params.phi_deg, annotation.params.alpha)
        view["curve"] = [float(x) for x in make_periodic_target(annotation.params).bins]
        records = state.records_by_asset.get(asset_id)
        if records:
            try:
                hist = build_histogram(records, AnnotatorConfig(min_views=1))
                view["histogram"] = [float(x) for x in hist.bins]
            except (ValidationError, InsufficientDataError):
                view["histogram"] = None
            polar, inplane = aggregate_polar_inplane(records)
            view["polar_deg"] = round(polar, 6)
            view["inplane_deg"] = round(inplane, 6)
        else:
            view["histogram"] = None
        return view

    @app.post("/api/decisions", status_code=201)
    def post_decision(payload: dict):
        decision, errors = _validate_decision_payload(payload, state)
        if errors:
            return _bad_request(errors)
        with state.lock:
            if decision.asset_id == WHOLE_CATEGORY:
                members = state.categories().get(decision.category)
                if not members:
                    return JSONResponse(
                        status_code=404, content={"detail": f"unknown category {decision.category!r}"}
                    )
                targets = members
            else:
                annotation = state.annotations.get(decision.asset_id)
                if annotation is None or annotation.category != decision.category:
                    return JSONResponse(
                        status_code=404,
                        content={"detail": f"unknown asset {decision.category}/{decision.asset_id}"},
                    )
                targets = [annotation]
            try:
                updated = apply_decisions(targets, [decision])
            except (ValidationError, UnknownTargetError) as exc:
                return _bad_request({"decision": str(exc)})
            io.append_decision(state.decision_log_path, decision, lock=file_lock)
            for a in updated:
                state.annotations[a.asset_id] = a
                state.decided_asset_ids.add(a.asset_id)
        return {
            "decision": io.decision_to_dict(decision),
            "applied": [_annotation_view(state.annotations[a.asset_id]) for a in updated],
        }

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return _FALLBACK_PAGE

    return app
