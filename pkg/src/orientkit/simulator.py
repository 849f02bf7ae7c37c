"""Synthetic pseudo-label corpora and evaluation sets with known ground truth.

All randomness flows through Philox, a counter-based 64-bit generator with
per-asset substreams keyed by (seed, sha256 of a stream tag), so identical
inputs reproduce identical corpora regardless of generation order or worker
count.  The von Mises sampler and the Gaussian sampler are implemented on top
of raw uniform draws so the draw sequence itself is pinned, not delegated to
library internals that may change.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .annotator import PseudoLabelRecord
from .errors import ValidationError
from .fitting import SYMMETRY_CLASSES
from .geometry import OrientationTriplet, circular_distance_deg

_POLAR_JITTER_DEG = 2.0
_INPLANE_JITTER_DEG = 2.0
_CONFIDENCE_DECAY_DEG = 30.0


@dataclass(frozen=True)
class NoiseConfig:
    """Angular noise model standing in for a real predictor's error."""

    kappa: float = 20.0
    outlier_fraction: float = 0.0
    confidence_model: str = "constant"  # or "noise_dependent"
    confidence_constant: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ValidationError(f"kappa must be >= 0, got {self.kappa!r}")
        if not (0.0 <= self.outlier_fraction <= 1.0):
            raise ValidationError(f"outlier_fraction must be in [0, 1], got {self.outlier_fraction!r}")
        if self.confidence_model not in ("constant", "noise_dependent"):
            raise ValidationError(f"unknown confidence_model {self.confidence_model!r}")
        if not (0.0 <= self.confidence_constant <= 1.0):
            raise ValidationError("confidence_constant must be in [0, 1]")


@dataclass(frozen=True)
class SimAssetSpec:
    """One synthetic asset: true symmetry class, phase, and view budget."""

    asset_id: str
    category: str
    alpha_true: int
    phi_true_deg: float
    n_views: int
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    def __post_init__(self):
        if self.alpha_true not in SYMMETRY_CLASSES:
            raise ValidationError(f"alpha_true must be one of {SYMMETRY_CLASSES}")
        if self.alpha_true >= 1 and not (0.0 <= self.phi_true_deg < 360.0 / self.alpha_true):
            raise ValidationError(
                f"phi_true_deg must be in [0, {360.0 / self.alpha_true}) for alpha {self.alpha_true}"
            )
        if self.n_views < 1:
            raise ValidationError("n_views must be >= 1")


def substream(seed: int, tag: str) -> np.random.Generator:
    """Independent generator for one named stream of a seeded run."""
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    word = int.from_bytes(digest[:8], "little")
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_gaussian(rng: np.random.Generator) -> float:
    """Standard normal draw via Box-Muller on two uniforms."""
    u1 = rng.random()
    while u1 <= 0.0:
        u1 = rng.random()
    u2 = rng.random()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def sample_von_mises(mu_deg: float, kappa: float, rng: np.random.Generator) -> float:
    """Draw from the von Mises distribution, in degrees on [0, 360).

    Uses the Best-Fisher wrapped-Cauchy rejection scheme; kappa = 0 degenerates
    to the uniform distribution on the circle.
    """
    if not (math.isfinite(kappa) and kappa >= 0):
        raise ValidationError(f"kappa must be >= 0, got {kappa!r}")
    if kappa == 0.0:
        return float(rng.random() * 360.0)
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    while True:
        u1 = rng.random()
        u2 = rng.random()
        z = math.cos(math.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        if c * (2.0 - c) - u2 > 0.0:
            break
        if u2 <= 0.0 or (c > 0.0 and math.log(c / u2) + 1.0 - c >= 0.0):
            break
    u3 = rng.random()
    theta = math.copysign(math.acos(min(max(f, -1.0), 1.0)), u3 - 0.5)
    return (mu_deg + math.degrees(theta)) % 360.0


def _jittered_triplet(azimuth_deg: float, rng: np.random.Generator) -> OrientationTriplet:
    polar = 90.0 + _POLAR_JITTER_DEG * sample_gaussian(rng)
    polar = min(max(polar, 0.0), 180.0 - 1e-9)
    inplane = (_INPLANE_JITTER_DEG * sample_gaussian(rng)) % 360.0
    return OrientationTriplet(azimuth_deg % 360.0, polar, inplane)


def gen_asset(spec: SimAssetSpec) -> list[PseudoLabelRecord]:
    """Simulated per-view pseudo-labels for one asset.

    Each view picks a true front face uniformly among the asset's symmetric
    candidates, perturbs it with von Mises noise in the canonical frame, and
    expresses the result in the view's camera frame (the exact inverse of the
    annotator's projection).  Outlier views replace the canonical azimuth with
    a uniform draw.
    """
    noise = spec.noise
    rng = substream(noise.seed, f"asset:{spec.asset_id}")
    records = []
    for v in range(spec.n_views):
        cam = rng.random() * 360.0
        if spec.alpha_true >= 1:
            k = min(int(rng.random() * spec.alpha_true), spec.alpha_true - 1)
            face = (spec.phi_true_deg + k * 360.0 / spec.alpha_true) % 360.0
        else:
            face = rng.random() * 360.0
        canonical = sample_von_mises(face, noise.kappa, rng)
        if rng.random() < noise.outlier_fraction:
            canonical = rng.random() * 360.0
        if noise.confidence_model == "constant":
            confidence = noise.confidence_constant
        else:
            deviation = circular_distance_deg(canonical, face)
            confidence = min(max(math.exp(-deviation / _CONFIDENCE_DECAY_DEG), 0.01), 1.0)
        pred_azimuth = (canonical - cam) % 360.0
        records.append(
            PseudoLabelRecord(
                asset_id=spec.asset_id,
                category=spec.category,
                view_id=f"{spec.asset_id}/v{v:04d}",
                camera_azimuth_deg=cam,
                predicted=_jittered_triplet(pred_azimuth, rng),
                confidence=confidence,
            )
        )
    return records


@dataclass(frozen=True)
class OrientationTruth:
    """Ground-truth orientation plus symmetry class for one eval sample."""

    sample_id: str
    triplet: OrientationTriplet
    alpha: int


@dataclass(frozen=True)
class RelativePairTruth:
    """Ground-truth absolute orientation pair defining one relative-rotation sample."""

    sample_id: str
    ref: OrientationTriplet
    query: OrientationTriplet


@dataclass(frozen=True)
class EvalDataset:
    orientation: tuple[OrientationTruth, ...]
    relative: tuple[RelativePairTruth, ...]


def allocate_classes(n: int, class_mix: dict[int, float]) -> list[int]:
    """Largest-remainder allocation of n samples across symmetry classes.

    Exact fractions yield exact counts; remainder ties break in class order.
    """
    classes = sorted(class_mix)
    fracs = [class_mix[c] for c in classes]
    if any(f < 0 for f in fracs):
        raise ValidationError("class fractions must be non-negative")
    if any(c not in SYMMETRY_CLASSES for c in classes):
        raise ValidationError(f"class mix keys must lie in {SYMMETRY_CLASSES}")
    if abs(sum(fracs) - 1.0) > 1e-9:
        raise ValidationError(f"class fractions must sum to 1, got {sum(fracs)!r}")
    quotas = [n * f for f in fracs]
    counts = [int(math.floor(q)) for q in quotas]
    remainder = n - sum(counts)
    order = sorted(range(len(classes)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    labels = []
    for c, cnt in zip(classes, counts):
        labels.extend([c] * cnt)
    return labels


def gen_eval_dataset(n_samples: int, class_mix: dict[int, float], noise: NoiseConfig) -> EvalDataset:
    """Evaluation ground truth: orientation samples and relative-rotation pairs.

    Azimuths are uniform; polar and in-plane angles sit near the canonical
    90/0 pose with small Gaussian jitter, mirroring real test sets that
    annotate a single upright orientation per object.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    labels = allocate_classes(n_samples, class_mix)
    rng = substream(noise.seed, "eval-dataset")
    orientation = []
    relative = []
    for i, alpha in enumerate(labels):
        sample_id = f"s{i:06d}"
        orientation.append(
            OrientationTruth(sample_id, _jittered_triplet(rng.random() * 360.0, rng), alpha)
        )
        relative.append(
            RelativePairTruth(
                sample_id,
                _jittered_triplet(rng.random() * 360.0, rng),
                _jittered_triplet(rng.random() * 360.0, rng),
            )
        )
    return EvalDataset(orientation=tuple(orientation), relative=tuple(relative))
