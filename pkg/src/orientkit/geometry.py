"""Orientation triplets, rotation matrices, and angular error metrics.

Frame convention: x right, y up, z toward the viewer.  Azimuth 0 means the
object faces the camera and increases counterclockwise seen from above; the
polar angle is measured down from +y, so 90 is horizontal; the in-plane angle
rolls the object about its own front axis.  The rotation factorization is
yaw about y, then pitch offset about x, then roll about the front axis, which
maps the canonical front pose (facing +z, upright) to the observed pose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ROTATION_ATOL = 1e-9
UNIT_ATOL = 1e-9


@dataclass(frozen=True)
class OrientationTriplet:
    """Object pose as azimuth / polar / in-plane angles in degrees."""

    azimuth_deg: float
    polar_deg: float
    inplane_deg: float

    def __post_init__(self):
        if not (0.0 <= self.azimuth_deg < 360.0):
            raise ValidationError(f"azimuth_deg must be in [0, 360), got {self.azimuth_deg!r}")
        if not (0.0 <= self.polar_deg < 180.0):
            raise ValidationError(f"polar_deg must be in [0, 180), got {self.polar_deg!r}")
        if not (0.0 <= self.inplane_deg < 360.0):
            raise ValidationError(f"inplane_deg must be in [0, 360), got {self.inplane_deg!r}")


def rot_x(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def validate_rotation(r: np.ndarray) -> np.ndarray:
    """Check orthonormality and unit determinant; returns the matrix as float64."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValidationError(f"rotation must be 3x3, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValidationError("rotation must be finite")
    if not np.allclose(r.T @ r, np.eye(3), atol=ROTATION_ATOL, rtol=0.0):
        raise ValidationError("matrix is not orthonormal")
    if abs(np.linalg.det(r) - 1.0) > ROTATION_ATOL:
        raise ValidationError("matrix determinant is not +1")
    return r


def validate_unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValidationError(f"direction must be a 3-vector, got shape {v.shape}")
    if abs(float(np.linalg.norm(v)) - 1.0) > UNIT_ATOL:
        raise ValidationError("direction must have unit norm")
    return v


def triplet_to_direction(t: OrientationTriplet) -> np.ndarray:
    """Unit front-facing direction; the in-plane angle has no effect."""
    az = math.radians(t.azimuth_deg)
    pol = math.radians(t.polar_deg)
    return np.array([math.sin(az) * math.sin(pol), math.cos(pol), math.cos(az) * math.sin(pol)])


def triplet_to_rotation(t: OrientationTriplet) -> np.ndarray:
    """Rotation taking the canonical front pose to the pose described by t."""
    return rot_y(t.azimuth_deg) @ rot_x(t.polar_deg - 90.0) @ rot_z(t.inplane_deg)


def angular_error_3d(a: np.ndarray, b: np.ndarray) -> float:
    """Angle in degrees between two unit directions, in [0, 180]."""
    a = validate_unit(a)
    b = validate_unit(b)
    if np.array_equal(a, b):  # acos would turn the self-dot's ulp noise into ~1e-6 deg
        return 0.0
    dot = min(max(float(a @ b), -1.0), 1.0)
    return math.degrees(math.acos(dot))


def geodesic_so3(r1: np.ndarray, r2: np.ndarray) -> float:
    """Geodesic distance on SO(3) in degrees: the angle of r1^T r2."""
    r1 = validate_rotation(r1)
    r2 = validate_rotation(r2)
    if np.array_equal(r1, r2):
        return 0.0
    cos_theta = (float(np.trace(r1.T @ r2)) - 1.0) * 0.5
    cos_theta = min(max(cos_theta, -1.0), 1.0)
    return math.degrees(math.acos(cos_theta))


def relative_rotation(reference: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Rotation R such that R @ reference == query."""
    return np.asarray(query, dtype=float) @ np.asarray(reference, dtype=float).T


def relative_from_absolute(t_ref: OrientationTriplet, t_query: OrientationTriplet) -> np.ndarray:
    """Relative rotation composed from two absolute orientations.

    Composing independent absolute estimates accumulates both estimates'
    errors, which is what makes this the weaker route for relative pose.
    """
    return relative_rotation(triplet_to_rotation(t_ref), triplet_to_rotation(t_query))


def symmetry_candidates(phi_deg: float, alpha: int) -> list[float]:
    """All azimuths equivalent to phi under an alpha-fold symmetry, ascending.

    alpha = 0 (no front face) yields an empty list.
    """
    if alpha not in (0, 1, 2, 4):
        raise ValidationError(f"alpha must be in {{0, 1, 2, 4}}, got {alpha!r}")
    if alpha == 0:
        return []
    spacing = 360.0 / alpha
    return sorted((phi_deg + k * spacing) % 360.0 for k in range(alpha))


def circular_distance_deg(a: float, b: float) -> float:
    """Smallest absolute angular difference between two degrees values."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def select_camera_facing(candidates) -> float:
    """Candidate azimuth closest to facing the camera (azimuth 0).

    Ties break to the numerically smaller azimuth.
    """
    cands = list(candidates)
    if not cands:
        raise ValidationError("candidate list must be non-empty")
    return min(cands, key=lambda c: (circular_distance_deg(c, 0.0), c))
