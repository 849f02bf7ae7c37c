"""Evaluation metrics for absolute orientation, relative rotation, and symmetry.

Per-sample 3D angular errors aggregate into the median error, threshold
accuracies (strict inequality), the 8-bin horizontal-orientation accuracy,
and the symmetry-class recognition accuracy.  Symmetric predictions are
scored through one of their candidate front faces: either the one closest to
facing the camera (the reporting protocol) or the one minimizing the error
(an oracle upper bound separating symmetry ambiguity from direction error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fitting import DecodedOrientation
from .geometry import (
    OrientationTriplet,
    angular_error_3d,
    geodesic_so3,
    select_camera_facing,
    triplet_to_direction,
    validate_rotation,
)

MODE_CAMERA_FACING = "camera_facing"
MODE_MIN_ERROR = "min_error"
MODES = (MODE_CAMERA_FACING, MODE_MIN_ERROR)

MAX_ERROR_DEG = 180.0


@dataclass(frozen=True)
class OrientationEvalSample:
    predicted: DecodedOrientation
    ground_truth: OrientationTriplet
    gt_alpha: int | None = None
    sample_id: str = ""


@dataclass(frozen=True)
class RotationEvalSample:
    predicted_relative: np.ndarray
    ground_truth_relative: np.ndarray
    sample_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "predicted_relative", validate_rotation(self.predicted_relative))
        object.__setattr__(self, "ground_truth_relative", validate_rotation(self.ground_truth_relative))


@dataclass(frozen=True)
class EvalReport:
    n: int
    median_deg: float
    acc30: float
    acc15: float
    acc_8bin: float | None = None
    symmetry_acc: float | None = None
    per_sample: tuple = ()


def median_error(errors) -> float:
    """Lower median: for even counts the smaller of the two middle values."""
    errs = sorted(float(e) for e in errors)
    if not errs:
        raise ValidationError("errors must be non-empty")
    return errs[(len(errs) - 1) // 2]


def acc_at(errors, threshold: float) -> float:
    """Fraction of errors strictly below the threshold."""
    errs = [float(e) for e in errors]
    if not errs:
        raise ValidationError("errors must be non-empty")
    if threshold <= 0:
        raise ValidationError("threshold must be positive")
    return sum(1 for e in errs if e < threshold) / len(errs)


def azimuth_to_8bin(azimuth_deg: float) -> int:
    """Index of the 45-degree-wide horizontal bin centered on k*45 degrees.

    Boundary angles round half-up, so 22.5 lands in bin 1 and 337.5 wraps
    to bin 0.
    """
    if not (0.0 <= azimuth_deg < 360.0):
        raise ValidationError(f"azimuth must be in [0, 360), got {azimuth_deg!r}")
    return int(math.floor(azimuth_deg / 45.0 + 0.5)) % 8


def _direction(azimuth_deg: float, polar_deg: float) -> np.ndarray:
    az, pol = math.radians(azimuth_deg), math.radians(polar_deg)
    return np.array([math.sin(az) * math.sin(pol), math.cos(pol), math.cos(az) * math.sin(pol)])


def orientation_sample_error(sample: OrientationEvalSample, mode: str = MODE_CAMERA_FACING):
    """(error in degrees, evaluated azimuth or None) for one sample.

    A ground truth with class 0 has no front face, so only the polar angles
    are compared.  A class-0 prediction against a front-faced ground truth is
    charged the maximum error so that symmetry under-prediction is penalized
    rather than skipped.
    """
    pred, gt = sample.predicted, sample.ground_truth
    if sample.gt_alpha == 0:
        return abs(pred.polar_deg - gt.polar_deg), None
    if pred.alpha_hat == 0:
        return MAX_ERROR_DEG, None
    if mode == MODE_CAMERA_FACING:
        azimuth = select_camera_facing(pred.candidates)
    else:
        gt_dir = triplet_to_direction(gt)
        azimuth = None
        best = math.inf
        for cand in sorted(pred.candidates):
            err = angular_error_3d(_direction(cand, pred.polar_deg), gt_dir)
            if err < best:
                best, azimuth = err, cand
    error = angular_error_3d(_direction(azimuth, pred.polar_deg), triplet_to_direction(gt))
    return error, azimuth


def evaluate_orientation(samples, mode: str = MODE_CAMERA_FACING) -> EvalReport:
    """Aggregate orientation metrics over prediction/ground-truth pairs.

    The 8-bin accuracy counts samples whose ground truth has a front face;
    the symmetry accuracy counts samples with a known ground-truth class.
    """
    samples = list(samples)
    if not samples:
        raise ValidationError("samples must be non-empty")
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    errors = []
    per_sample = []
    bin_hits = bin_total = 0
    sym_hits = sym_total = 0
    for s in samples:
        err, azimuth = orientation_sample_error(s, mode)
        errors.append(err)
        per_sample.append((s.sample_id, err))
        if s.gt_alpha != 0:
            bin_total += 1
            if azimuth is not None and azimuth_to_8bin(azimuth) == azimuth_to_8bin(
                s.ground_truth.azimuth_deg
            ):
                bin_hits += 1
        if s.gt_alpha is not None:
            sym_total += 1
            if s.predicted.alpha_hat == s.gt_alpha:
                sym_hits += 1
    return EvalReport(
        n=len(samples),
        median_deg=median_error(errors),
        acc30=acc_at(errors, 30.0),
        acc15=acc_at(errors, 15.0),
        acc_8bin=(bin_hits / bin_total) if bin_total else None,
        symmetry_acc=(sym_hits / sym_total) if sym_total else None,
        per_sample=tuple(per_sample),
    )


def evaluate_relative_rotation(samples) -> EvalReport:
    """Median and threshold accuracies of the geodesic relative-rotation error."""
    samples = list(samples)
    if not samples:
        raise ValidationError("samples must be non-empty")
    errors = []
    per_sample = []
    for s in samples:
        err = geodesic_so3(s.predicted_relative, s.ground_truth_relative)
        errors.append(err)
        per_sample.append((s.sample_id, err))
    return EvalReport(
        n=len(samples),
        median_deg=median_error(errors),
        acc30=acc_at(errors, 30.0),
        acc15=acc_at(errors, 15.0),
        per_sample=tuple(per_sample),
    )
