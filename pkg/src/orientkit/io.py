"""Line-delimited JSON file formats and their (de)serializers.

One record per line, UTF-8, explicit schema_version on every record.  Angles
serialize in degrees with up to 6 decimal places; unknown fields are accepted
with a warning for forward compatibility, missing or malformed fields fail
with the offending line number.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .annotator import AssetAnnotation, PseudoLabelRecord
from .calibration import CalibrationDecision, CategoryReport
from .distributions import PeriodicVonMisesParams
from .errors import ValidationError
from .evaluation import EvalReport
from .geometry import OrientationTriplet
from .simulator import OrientationTruth, RelativePairTruth

logger = logging.getLogger("orientkit.io")

SCHEMA_VERSION = 1


class ParseError(ValidationError):
    """A line of an input file could not be parsed."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def _ang(x) -> float:
    return round(float(x), 6)


def _take(obj: dict, known: tuple, path, line_no: int, optional: tuple = ()) -> dict:
    missing = [k for k in known if k not in obj]
    if missing:
        raise ParseError(path, line_no, f"missing fields: {missing}")
    extras = [k for k in obj if k not in known and k not in optional and k != "schema_version"]
    if extras:
        logger.warning("%s:%d: ignoring unknown fields %s", path, line_no, extras)
    return {k: obj[k] for k in known}


def _read_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(path, line_no, "record must be a JSON object")
            yield line_no, obj


def _write_lines(path, dicts):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for d in dicts:
            fh.write(json.dumps(d, ensure_ascii=False) + "\n")


# -- pseudo_labels.jsonl -----------------------------------------------------

_PSEUDO_FIELDS = (
    "asset_id",
    "category",
    "view_id",
    "camera_azimuth_deg",
    "pred_azimuth_deg",
    "pred_polar_deg",
    "pred_inplane_deg",
    "confidence",
)


def pseudo_label_to_dict(r: PseudoLabelRecord) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "asset_id": r.asset_id,
        "category": r.category,
        "view_id": r.view_id,
        "camera_azimuth_deg": _ang(r.camera_azimuth_deg),
        "pred_azimuth_deg": _ang(r.predicted.azimuth_deg),
        "pred_polar_deg": _ang(r.predicted.polar_deg),
        "pred_inplane_deg": _ang(r.predicted.inplane_deg),
        "confidence": round(float(r.confidence), 6),
    }


def pseudo_label_from_dict(obj: dict, path="<memory>", line_no: int = 0) -> PseudoLabelRecord:
    f = _take(obj, _PSEUDO_FIELDS, path, line_no)
    try:
        return PseudoLabelRecord(
            asset_id=str(f["asset_id"]),
            category=str(f["category"]),
            view_id=str(f["view_id"]),
            camera_azimuth_deg=float(f["camera_azimuth_deg"]),
            predicted=OrientationTriplet(
                float(f["pred_azimuth_deg"]),
                float(f["pred_polar_deg"]),
                float(f["pred_inplane_deg"]),
            ),
            confidence=float(f["confidence"]),
        )
    except (TypeError, ValueError, ValidationError) as exc:
        raise ParseError(path, line_no, str(exc)) from exc


def write_pseudo_labels(path, records):
    _write_lines(path, (pseudo_label_to_dict(r) for r in records))


def read_pseudo_labels(path) -> list[PseudoLabelRecord]:
    return [pseudo_label_from_dict(obj, path, n) for n, obj in _read_lines(path)]


# -- annotations.jsonl -------------------------------------------------------

_ANNOTATION_FIELDS = ("asset_id", "category", "alpha", "phi_deg", "sigma", "residual", "n_views", "status")


def annotation_to_dict(a: AssetAnnotation) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "asset_id": a.asset_id,
        "category": a.category,
        "alpha": a.params.alpha,
        "phi_deg": _ang(a.params.phi_deg),
        "sigma": float(a.params.sigma),
        "residual": float(a.residual),
        "n_views": a.n_views,
        "status": a.status,
    }
    if a.reason is not None:
        d["reason"] = a.reason
    return d


def annotation_from_dict(obj: dict, path="<memory>", line_no: int = 0) -> AssetAnnotation:
    f = _take(obj, _ANNOTATION_FIELDS, path, line_no, optional=("reason",))
    try:
        return AssetAnnotation(
            asset_id=str(f["asset_id"]),
            category=str(f["category"]),
            params=PeriodicVonMisesParams(float(f["phi_deg"]), int(f["alpha"]), float(f["sigma"])),
            residual=float(f["residual"]),
            n_views=int(f["n_views"]),
            status=str(f["status"]),
            reason=obj.get("reason"),
        )
    except (TypeError, ValueError, ValidationError) as exc:
        raise ParseError(path, line_no, str(exc)) from exc


def write_annotations(path, annotations):
    _write_lines(path, (annotation_to_dict(a) for a in annotations))


def read_annotations(path) -> list[AssetAnnotation]:
    return [annotation_from_dict(obj, path, n) for n, obj in _read_lines(path)]


# -- category_reports.jsonl --------------------------------------------------

_REPORT_FIELDS = ("category", "alpha_histogram", "consistent", "majority_alpha", "flagged_asset_ids")


def category_report_to_dict(r: CategoryReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "category": r.category,
        "alpha_histogram": {str(k): int(v) for k, v in sorted(r.alpha_histogram.items())},
        "consistent": bool(r.consistent),
        "majority_alpha": r.majority_alpha,
        "flagged_asset_ids": list(r.flagged_asset_ids),
    }


def category_report_from_dict(obj: dict, path="<memory>", line_no: int = 0) -> CategoryReport:
    f = _take(obj, _REPORT_FIELDS, path, line_no)
    try:
        return CategoryReport(
            category=str(f["category"]),
            alpha_histogram={int(k): int(v) for k, v in f["alpha_histogram"].items()},
            consistent=bool(f["consistent"]),
            majority_alpha=None if f["majority_alpha"] is None else int(f["majority_alpha"]),
            flagged_asset_ids=[str(x) for x in f["flagged_asset_ids"]],
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise ParseError(path, line_no, str(exc)) from exc


def write_category_reports(path, reports):
    _write_lines(path, (category_report_to_dict(r) for r in reports))


def read_category_reports(path) -> list[CategoryReport]:
    return [category_report_from_dict(obj, path, n) for n, obj in _read_lines(path)]


# -- decisions.jsonl ---------------------------------------------------------

_DECISION_FIELDS = ("category", "asset_id", "action", "reviewer", "timestamp")


def decision_to_dict(d: CalibrationDecision) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "category": d.category,
        "asset_id": d.asset_id,
        "action": d.action,
        "reviewer": d.reviewer,
        "timestamp": d.timestamp,
    }
    if d.alpha is not None:
        out["alpha"] = d.alpha
    if d.phi_deg is not None:
        out["phi_deg"] = _ang(d.phi_deg)
    return out


def decision_from_dict(obj: dict, path="<memory>", line_no: int = 0) -> CalibrationDecision:
    f = _take(obj, _DECISION_FIELDS, path, line_no, optional=("alpha", "phi_deg"))
    try:
        return CalibrationDecision(
            category=str(f["category"]),
            asset_id=str(f["asset_id"]),
            action=str(f["action"]),
            alpha=None if obj.get("alpha") is None else int(obj["alpha"]),
            phi_deg=None if obj.get("phi_deg") is None else float(obj["phi_deg"]),
            reviewer=str(f["reviewer"]),
            timestamp=str(f["timestamp"]),
        )
    except (TypeError, ValueError, ValidationError) as exc:
        raise ParseError(path, line_no, str(exc)) from exc


def write_decisions(path, decisions):
    _write_lines(path, (decision_to_dict(d) for d in decisions))


def read_decisions(path) -> list[CalibrationDecision]:
    return [decision_from_dict(obj, path, n) for n, obj in _read_lines(path)]


def append_decision(path, decision: CalibrationDecision, lock=None):
    """Durably append one decision line; never rewrites existing lines."""
    import os

    line = json.dumps(decision_to_dict(decision), ensure_ascii=False) + "\n"

    def _write():
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    if lock is not None:
        with lock:
            _write()
    else:
        _write()


# -- ground truth / predictions for simulation and evaluation ----------------

_SIM_TRUTH_FIELDS = ("asset_id", "category", "alpha", "phi_deg", "corrupted")


def sim_truth_to_dict(asset_id, category, alpha, phi_deg, corrupted=False) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "asset_id": asset_id,
        "category": category,
        "alpha": int(alpha),
        "phi_deg": _ang(phi_deg),
        "corrupted": bool(corrupted),
    }


def read_sim_truths(path) -> list[dict]:
    out = []
    for n, obj in _read_lines(path):
        f = _take(obj, _SIM_TRUTH_FIELDS, path, n)
        out.append(
            {
                "asset_id": str(f["asset_id"]),
                "category": str(f["category"]),
                "alpha": int(f["alpha"]),
                "phi_deg": float(f["phi_deg"]),
                "corrupted": bool(f["corrupted"]),
            }
        )
    return out


_ORIENT_GT_FIELDS = ("sample_id", "azimuth_deg", "polar_deg", "inplane_deg", "alpha")


def orientation_truth_to_dict(t: OrientationTruth) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "sample_id": t.sample_id,
        "azimuth_deg": _ang(t.triplet.azimuth_deg),
        "polar_deg": _ang(t.triplet.polar_deg),
        "inplane_deg": _ang(t.triplet.inplane_deg),
        "alpha": int(t.alpha),
    }


def orientation_truth_from_dict(obj: dict, path="<memory>", line_no: int = 0) -> OrientationTruth:
    f = _take(obj, _ORIENT_GT_FIELDS, path, line_no)
    try:
        return OrientationTruth(
            sample_id=str(f["sample_id"]),
            triplet=OrientationTriplet(
                float(f["azimuth_deg"]), float(f["polar_deg"]), float(f["inplane_deg"])
            ),
            alpha=int(f["alpha"]),
        )
    except (TypeError, ValueError, ValidationError) as exc:
        raise ParseError(path, line_no, str(exc)) from exc


def write_orientation_truths(path, truths):
    _write_lines(path, (orientation_truth_to_dict(t) for t in truths))


def read_orientation_truths(path) -> list[OrientationTruth]:
    return [orientation_truth_from_dict(obj, path, n) for n, obj in _read_lines(path)]


_REL_GT_FIELDS = (
    "sample_id",
    "ref_azimuth_deg",
    "ref_polar_deg",
    "ref_inplane_deg",
    "query_azimuth_deg",
    "query_polar_deg",
    "query_inplane_deg",
)


def relative_pair_to_dict(p: RelativePairTruth) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "sample_id": p.sample_id,
        "ref_azimuth_deg": _ang(p.ref.azimuth_deg),
        "ref_polar_deg": _ang(p.ref.polar_deg),
        "ref_inplane_deg": _ang(p.ref.inplane_deg),
        "query_azimuth_deg": _ang(p.query.azimuth_deg),
        "query_polar_deg": _ang(p.query.polar_deg),
        "query_inplane_deg": _ang(p.query.inplane_deg),
    }


def relative_pair_from_dict(obj: dict, path="<memory>", line_no: int = 0) -> RelativePairTruth:
    f = _take(obj, _REL_GT_FIELDS, path, line_no)
    try:
        return RelativePairTruth(
            sample_id=str(f["sample_id"]),
            ref=OrientationTriplet(
                float(f["ref_azimuth_deg"]), float(f["ref_polar_deg"]), float(f["ref_inplane_deg"])
            ),
            query=OrientationTriplet(
                float(f["query_azimuth_deg"]),
                float(f["query_polar_deg"]),
                float(f["query_inplane_deg"]),
            ),
        )
    except (TypeError, ValueError, ValidationError) as exc:
        raise ParseError(path, line_no, str(exc)) from exc


def write_relative_pairs(path, pairs):
    _write_lines(path, (relative_pair_to_dict(p) for p in pairs))


def read_relative_pairs(path) -> list[RelativePairTruth]:
    return [relative_pair_from_dict(obj, path, n) for n, obj in _read_lines(path)]


_ORIENT_PRED_FIELDS = ("sample_id", "alpha", "azimuth_deg", "polar_deg", "inplane_deg")


def orientation_prediction_to_dict(sample_id, alpha, azimuth_deg, polar_deg, inplane_deg) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "sample_id": sample_id,
        "alpha": int(alpha),
        "azimuth_deg": _ang(azimuth_deg),
        "polar_deg": _ang(polar_deg),
        "inplane_deg": _ang(inplane_deg),
    }


def read_orientation_predictions(path) -> list[dict]:
    out = []
    for n, obj in _read_lines(path):
        f = _take(obj, _ORIENT_PRED_FIELDS, path, n)
        try:
            out.append(
                {
                    "sample_id": str(f["sample_id"]),
                    "alpha": int(f["alpha"]),
                    "azimuth_deg": float(f["azimuth_deg"]) % 360.0,
                    "polar_deg": float(f["polar_deg"]),
                    "inplane_deg": float(f["inplane_deg"]) % 360.0,
                }
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(path, n, str(exc)) from exc
    return out


_REL_PRED_FIELDS = ("sample_id", "rotation")


def relative_prediction_to_dict(sample_id, rotation) -> dict:
    r = np.asarray(rotation, dtype=float)
    return {
        "schema_version": SCHEMA_VERSION,
        "sample_id": sample_id,
        "rotation": [[float(x) for x in row] for row in r],
    }


def read_relative_predictions(path) -> list[dict]:
    out = []
    for n, obj in _read_lines(path):
        f = _take(obj, _REL_PRED_FIELDS, path, n)
        try:
            rot = np.asarray(f["rotation"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(path, n, str(exc)) from exc
        if rot.shape != (3, 3):
            raise ParseError(path, n, f"rotation must be 3x3, got shape {rot.shape}")
        out.append({"sample_id": str(f["sample_id"]), "rotation": rot})
    return out


# -- report.json -------------------------------------------------------------


def eval_report_to_dict(report: EvalReport) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "n": report.n,
        "median_deg": _ang(report.median_deg),
        "acc30": float(report.acc30),
        "acc15": float(report.acc15),
    }
    if report.acc_8bin is not None:
        d["acc_8bin"] = float(report.acc_8bin)
    if report.symmetry_acc is not None:
        d["symmetry_acc"] = float(report.symmetry_acc)
    d["per_sample"] = [
        {"sample_id": sid, "error_deg": _ang(err)} for sid, err in report.per_sample
    ]
    return d


def write_eval_report(path, report: EvalReport):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(eval_report_to_dict(report), fh, ensure_ascii=False, indent=2)
        fh.write("\n")
