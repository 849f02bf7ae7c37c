"""Discrete circular probability distributions over integer-degree bins.

Distributions are stored normalized (bins sum to 1) on a 1-degree grid whose
bin centers are the integer angles 0..n-1.  The azimuth and in-plane domains
are circular with a 360-degree period; the polar domain spans [0, 180) and is
treated as linear (a polar angle does not wrap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ALPHA_MAX = 8

# Outside this range the density is numerically a delta / uniform.
SIGMA_MIN = 1e-3
SIGMA_MAX = 10.0

_I0_SERIES_CUTOFF = 20.0


def bessel_i0(x: float) -> float:
    """Modified Bessel function of the first kind, order zero.

    Uses the ascending power series for small arguments and the large-argument
    asymptotic expansion (evaluated in log space to postpone overflow) beyond
    the series' efficient range.  Relative error is below 1e-10 everywhere the
    result is representable; past the double-precision range returns inf.

    Args:
        x: non-negative, finite argument.

    Returns:
        I0(x) as a float.
    """
    if not math.isfinite(x) or x < 0:
        raise ValidationError(f"bessel_i0 requires finite x >= 0, got {x!r}")
    if x <= _I0_SERIES_CUTOFF:
        # All terms positive: no cancellation.  Ratio t_{k+1}/t_k = (x/2)^2/(k+1)^2.
        q = 0.25 * x * x
        term = 1.0
        total = 1.0
        k = 0
        while term > total * 1e-17:
            k += 1
            term *= q / (k * k)
            total += term
        return total
    # I0(x) = e^x / sqrt(2 pi x) * sum_k a_k, a_k = a_{k-1} * (2k-1)^2 / (8 k x)
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        total += term
        if term < total * 1e-17 or k > 40:
            break
    log_i0 = x + math.log(total) - 0.5 * math.log(2.0 * math.pi * x)
    try:
        return math.exp(log_i0)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class DiscreteCircularDistribution:
    """Normalized probability mass over integer-degree bins.

    Production distributions have 360 bins (azimuth, in-plane) or 180 bins
    (polar) matching ``period_deg``; arbitrary bin counts are accepted so unit
    tests can work with tiny domains.
    """

    bins: np.ndarray
    period_deg: float = 360.0

    def __post_init__(self):
        arr = np.array(self.bins, dtype=float)  # copy: the stored array is frozen
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("bins must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("bins must be finite")
        if np.any(arr < 0):
            raise ValidationError("bins must be non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(
                f"bins must sum to 1 within 1e-9 (got {total!r}); use normalize()"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "bins", arr)
        object.__setattr__(self, "period_deg", float(self.period_deg))

    @property
    def n_bins(self) -> int:
        return int(self.bins.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteCircularDistribution):
            return NotImplemented
        return self.period_deg == other.period_deg and np.array_equal(self.bins, other.bins)


@dataclass(frozen=True)
class PeriodicVonMisesParams:
    """Parameters of the periodic circular density: phase, periodicity, variance.

    ``alpha`` counts the valid front faces (0 = no dominant orientation);
    ``phi_deg`` is the main direction; ``sigma`` controls concentration.
    """

    phi_deg: float
    alpha: int
    sigma: float

    def __post_init__(self):
        if not (0.0 <= self.phi_deg < 360.0):
            raise ValidationError(f"phi_deg must be in [0, 360), got {self.phi_deg!r}")
        if not isinstance(self.alpha, (int, np.integer)) or isinstance(self.alpha, bool):
            raise ValidationError(f"alpha must be an integer, got {self.alpha!r}")
        if not (0 <= self.alpha <= ALPHA_MAX):
            raise ValidationError(f"alpha must be in 0..{ALPHA_MAX}, got {self.alpha!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be a positive real, got {self.sigma!r}")
        object.__setattr__(self, "alpha", int(self.alpha))


@dataclass(frozen=True)
class TargetConfig:
    """Hyperparameters for constructing training-style target distributions."""

    sigma: float = 0.5
    n_bins: int = 360

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be positive, got {self.sigma!r}")
        if self.n_bins not in (180, 360):
            raise ValidationError(f"n_bins must be 180 or 360, got {self.n_bins!r}")


def _clamp_sigma(sigma: float) -> float:
    return min(max(sigma, SIGMA_MIN), SIGMA_MAX)


_BIN_RADIANS: dict[int, np.ndarray] = {}


def _bin_radians(n_bins: int) -> np.ndarray:
    arr = _BIN_RADIANS.get(n_bins)
    if arr is None:
        arr = np.deg2rad(np.arange(n_bins, dtype=float))
        arr.flags.writeable = False
        _BIN_RADIANS[n_bins] = arr
    return arr


def periodic_density(phi_deg: float, alpha: int, sigma: float, n_bins: int = 360) -> np.ndarray:
    """Unnormalized periodic density sampled at integer bin centers.

    Evaluates exp(cos(alpha * d) / sigma^2) at d = radians(i - phi) for
    i = 0..n_bins-1, with the exponent shifted by its maximum so the values
    stay bounded for sharp sigma.  A constant factor (the continuous
    normalizer 2*pi*I0(1/sigma^2) and the exponent shift) cancels under the
    discrete renormalization applied by the callers.
    """
    sigma = _clamp_sigma(sigma)
    if alpha == 0:
        return np.full(n_bins, 1.0)
    # Hot path of the fitting search: in-place ops on one scratch array.
    out = alpha * (_bin_radians(n_bins) - math.radians(phi_deg))
    np.cos(out, out=out)
    out -= 1.0
    out *= 1.0 / (sigma * sigma)
    return np.exp(out, out=out)


def truncated_gaussian_density(mu_deg: float, sigma: float, n_bins: int = 180) -> np.ndarray:
    """Unnormalized linear-angle Gaussian sampled at integer bin centers.

    The deviation is converted to radians before squaring so sigma carries the
    same meaning as in the circular density's small-angle limit.
    """
    sigma = _clamp_sigma(sigma)
    delta = np.deg2rad(np.arange(n_bins, dtype=float) - mu_deg)
    return np.exp(-0.5 * (delta / sigma) ** 2)


def normalize(raw, period_deg: float = 360.0) -> DiscreteCircularDistribution:
    """Scale non-negative masses so they sum to 1.

    Raises ValidationError on negative entries or when every entry is zero.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("raw must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("raw must be finite")
    if np.any(arr < 0):
        raise ValidationError("raw must be non-negative")
    total = float(arr.sum())
    if total <= 0.0:
        raise ValidationError("raw must contain at least one positive entry")
    return DiscreteCircularDistribution(bins=arr / total, period_deg=period_deg)


def make_periodic_target(params: PeriodicVonMisesParams, n_bins: int = 360) -> DiscreteCircularDistribution:
    """Symmetry-aware periodic target distribution over the azimuth domain.

    For alpha >= 1 the result has alpha equal modes spaced 360/alpha degrees
    apart starting at the phase; alpha = 0 yields the exact uniform
    distribution.  Bins are renormalized to sum to 1.
    """
    if n_bins != 360:
        raise ValidationError(f"periodic targets are defined on 360 bins, got {n_bins}")
    if params.alpha == 0:
        return DiscreteCircularDistribution(np.full(n_bins, 1.0 / n_bins), period_deg=360.0)
    raw = periodic_density(params.phi_deg, params.alpha, params.sigma, n_bins)
    return DiscreteCircularDistribution(raw / raw.sum(), period_deg=360.0)


def make_unimodal_target(mu_deg: float, config: TargetConfig = TargetConfig()) -> DiscreteCircularDistribution:
    """Single-mode target for the polar (180-bin) or in-plane (360-bin) domain.

    The 360-bin variant is the periodic target with alpha = 1; the 180-bin
    polar variant is a Gaussian in linear angle truncated to [0, 180).
    """
    if config.n_bins == 360:
        if not (0.0 <= mu_deg < 360.0):
            raise ValidationError(f"mu_deg must be in [0, 360), got {mu_deg!r}")
        return make_periodic_target(
            PeriodicVonMisesParams(phi_deg=mu_deg, alpha=1, sigma=config.sigma), 360
        )
    if not (0.0 <= mu_deg < 180.0):
        raise ValidationError(f"polar mu_deg must be in [0, 180), got {mu_deg!r}")
    raw = truncated_gaussian_density(mu_deg, config.sigma, config.n_bins)
    return DiscreteCircularDistribution(raw / raw.sum(), period_deg=180.0)
