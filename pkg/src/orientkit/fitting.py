"""Least-squares recovery of phase, periodicity, and variance from circular distributions.

The fit enumerates integer periodicity candidates; for each candidate it runs
a coarse grid search over phase and variance followed by derivative-free local
refinement, then compares the best multi-modal model against the uniform model
before declaring a dominant orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    ALPHA_MAX,
    SIGMA_MAX,
    SIGMA_MIN,
    DiscreteCircularDistribution,
    PeriodicVonMisesParams,
    periodic_density,
    truncated_gaussian_density,
)
from .errors import ValidationError

SYMMETRY_CLASSES = (0, 1, 2, 4)

_DEFAULT_ALPHAS = tuple(range(ALPHA_MAX + 1))
_DEFAULT_SIGMA_GRID = tuple(float(s) for s in np.geomspace(0.05, 5.0, 16))


@dataclass(frozen=True)
class FitConfig:
    """Search-space and model-selection knobs for the periodic fit."""

    alpha_candidates: tuple[int, ...] = _DEFAULT_ALPHAS
    phi_grid_step_deg: float = 1.0
    sigma_grid: tuple[float, ...] = _DEFAULT_SIGMA_GRID
    refine_iters: int = 50
    uniformity_gain_threshold: float = 0.25
    tie_epsilon: float = 0.02

    def __post_init__(self):
        if self.phi_grid_step_deg <= 0:
            raise ValidationError("phi_grid_step_deg must be positive")
        if not (0.0 < self.uniformity_gain_threshold < 1.0):
            raise ValidationError("uniformity_gain_threshold must be in (0, 1)")
        if self.tie_epsilon < 0:
            raise ValidationError("tie_epsilon must be non-negative")
        if self.refine_iters < 0:
            raise ValidationError("refine_iters must be non-negative")
        alphas = tuple(int(a) for a in self.alpha_candidates)
        if any(a < 0 or a > ALPHA_MAX for a in alphas):
            raise ValidationError(f"alpha candidates must lie in 0..{ALPHA_MAX}")
        if not self.sigma_grid or any(s <= 0 for s in self.sigma_grid):
            raise ValidationError("sigma_grid must contain positive values")
        object.__setattr__(self, "alpha_candidates", alphas)
        object.__setattr__(self, "sigma_grid", tuple(float(s) for s in self.sigma_grid))


@dataclass(frozen=True)
class FitResult:
    """Winning parameters of the periodic fit plus per-candidate residuals."""

    params: PeriodicVonMisesParams
    sse: float
    per_alpha_sse: dict[int, float] = field(compare=False)
    uniform_sse: float = 0.0


@dataclass(frozen=True)
class DecodedOrientation:
    """Orientation and symmetry class decoded from the three angle distributions."""

    alpha_hat: int
    azimuth_deg: float
    polar_deg: float
    inplane_deg: float
    candidates: tuple[float, ...]

    def __post_init__(self):
        if self.alpha_hat not in SYMMETRY_CLASSES:
            raise ValidationError(f"alpha_hat must be one of {SYMMETRY_CLASSES}")
        if len(self.candidates) != self.alpha_hat:
            raise ValidationError("candidate count must equal alpha_hat")


def canonicalize_phase(phi_deg: float, alpha: int) -> float:
    """Reduce a phase into [0, 360/alpha); an alpha-fold model is invariant there."""
    if not isinstance(alpha, (int, np.integer)) or isinstance(alpha, bool) or alpha < 1:
        raise ValidationError(f"alpha must be an integer >= 1, got {alpha!r}")
    period = 360.0 / alpha
    r = float(phi_deg) % period
    if r >= period:  # float rounding at the modulus boundary
        r = 0.0
    return r


def map_symmetry_class(alpha_raw: int) -> int:
    """Map a fitted periodicity onto the {0, 1, 2, 4} label space.

    Values outside the label space (including 3 and anything above 4) mean
    "no dominant orientation" and map to 0.
    """
    if not isinstance(alpha_raw, (int, np.integer)) or isinstance(alpha_raw, bool) or alpha_raw < 0:
        raise ValidationError(f"alpha_raw must be a non-negative integer, got {alpha_raw!r}")
    alpha = int(alpha_raw)
    return alpha if alpha in SYMMETRY_CLASSES else 0


def _periodic_model(phi_deg: float, alpha: int, sigma: float, n_bins: int = 360) -> np.ndarray:
    raw = periodic_density(phi_deg, alpha, sigma, n_bins)
    raw /= raw.sum()
    return raw


def _truncated_model(mu_deg: float, sigma: float, n_bins: int = 180) -> np.ndarray:
    raw = truncated_gaussian_density(mu_deg, sigma, n_bins)
    return raw / raw.sum()


def _sse(data: np.ndarray, model: np.ndarray) -> float:
    diff = data - model
    return float(diff @ diff)


def _shift_sse(data: np.ndarray, base: np.ndarray, data_rfft: np.ndarray | None = None) -> np.ndarray:
    """SSE between data and every integer circular shift of a base curve.

    Uses sse(k) = sum(d^2) + sum(b^2) - 2 * xcorr(d, b)[k], with the circular
    cross-correlation evaluated by FFT.
    """
    n = data.size
    if data_rfft is None:
        data_rfft = np.fft.rfft(data)
    corr = np.fft.irfft(data_rfft * np.conj(np.fft.rfft(base)), n)
    return float(data @ data) + float(base @ base) - 2.0 * corr


def _coarse_scan(data: np.ndarray, alpha: int, config: FitConfig):
    """Best (sse, phi, sigma) per sigma grid point for one periodicity candidate.

    Phases on the integer-degree lattice are integer shifts of the phase-0
    curve; fractional grid steps add sub-degree base offsets.
    """
    n = data.size
    step = config.phi_grid_step_deg
    offsets = [0.0]
    if step < 1.0:
        offsets = [float(o) for o in np.arange(0.0, 1.0, step)]
    stride = max(1, int(round(step))) if step >= 1.0 else 1
    data_rfft = np.fft.rfft(data)
    candidates = []
    for sigma in config.sigma_grid:
        best = None
        for offset in offsets:
            base = _periodic_model(offset, alpha, sigma, n)
            sses = _shift_sse(data, base, data_rfft)[::stride]
            k = int(np.argmin(sses))
            sse_k = float(sses[k])
            if best is None or sse_k < best[0]:
                best = (sse_k, (k * stride + offset) % 360.0, sigma)
        candidates.append(best)
    return candidates


def _refine(objective, x0, sse0, steps, iters, lo_hi=None, wrap=None):
    """Coordinate descent with shrinking steps.

    ``objective`` maps a parameter list to an SSE; ``steps`` holds the initial
    per-coordinate step sizes.  ``wrap[i]`` wraps coordinate i modulo that
    period; ``lo_hi[i]`` clips it to a closed interval.  Halves all steps on
    iterations with no improvement.
    """
    x = list(x0)
    best = sse0
    steps = list(steps)
    for _ in range(iters):
        improved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                cand = list(x)
                cand[i] = x[i] + sign * steps[i]
                if wrap and wrap[i]:
                    cand[i] %= wrap[i]
                if lo_hi and lo_hi[i]:
                    cand[i] = min(max(cand[i], lo_hi[i][0]), lo_hi[i][1])
                sse = objective(cand)
                if sse < best:
                    best, x = sse, cand
                    improved = True
                    break
        if best < 1e-15:  # exact fit up to float noise
            break
        if not improved:
            steps = [s * 0.5 for s in steps]
            if max(steps) < 1e-5:
                break
    return best, x


def _fit_single_alpha(data: np.ndarray, alpha: int, config: FitConfig, n_starts: int = 2):
    """Minimize the SSE over (phi, sigma) for a fixed periodicity."""
    coarse = sorted(_coarse_scan(data, alpha, config))[:n_starts]

    def objective(x):
        return _sse(data, _periodic_model(x[0], alpha, math.exp(x[1]), data.size))

    best_sse, best_x = math.inf, None
    for sse0, phi0, sigma0 in coarse:
        sse, x = _refine(
            objective,
            [phi0, math.log(sigma0)],
            sse0,
            steps=[1.0, 0.25],
            iters=config.refine_iters,
            lo_hi=[None, (math.log(SIGMA_MIN), math.log(SIGMA_MAX))],
            wrap=[360.0, None],
        )
        if sse < best_sse:
            best_sse, best_x = sse, x
        if best_sse < 1e-15:  # remaining starts cannot do better
            break
    return best_sse, best_x[0] % 360.0, math.exp(best_x[1])


def fit_periodic(dist: DiscreteCircularDistribution, config: FitConfig = FitConfig()) -> FitResult:
    """Fit the periodic circular model to a 360-bin distribution by least squares.

    Every candidate periodicity is fitted independently; near-ties resolve to
    the smaller periodicity, and the winner must beat the uniform model's SSE
    by the configured relative margin, otherwise periodicity 0 (no dominant
    orientation) is returned.
    """
    if dist.n_bins != 360:
        raise ValidationError(f"fit_periodic requires 360 bins, got {dist.n_bins}")
    data = dist.bins
    uniform_sse = _sse(data, np.full(360, 1.0 / 360.0))
    per_alpha: dict[int, float] = {}
    best = None  # (sse, alpha, phi, sigma), smallest alpha wins near-ties
    for alpha in sorted(set(config.alpha_candidates)):
        if alpha == 0:
            per_alpha[0] = uniform_sse
            continue
        sse, phi, sigma = _fit_single_alpha(data, alpha, config)
        per_alpha[alpha] = sse
        if best is None or sse < best[0] * (1.0 - config.tie_epsilon):
            best = (sse, alpha, phi, sigma)

    threshold = (1.0 - config.uniformity_gain_threshold) * uniform_sse
    if best is not None and best[0] <= threshold:
        sse, alpha, phi, sigma = best
        params = PeriodicVonMisesParams(canonicalize_phase(phi, alpha), alpha, sigma)
        winning_sse = sse
    else:
        params = PeriodicVonMisesParams(0.0, 0, 1.0)
        winning_sse = uniform_sse
    return FitResult(params=params, sse=winning_sse, per_alpha_sse=per_alpha, uniform_sse=uniform_sse)


def _fit_truncated_gaussian(dist: DiscreteCircularDistribution, config: FitConfig):
    """Least-squares (mu, sigma) fit of the truncated linear-angle Gaussian."""
    data = dist.bins
    n = data.size
    mus = np.arange(n, dtype=float)
    # n_mu x n deviation matrix; truncation breaks shift invariance, so no FFT path.
    delta = np.deg2rad(mus[None, :] - mus[:, None])
    best = None
    for sigma in config.sigma_grid:
        models = np.exp(-0.5 * (delta / max(sigma, SIGMA_MIN)) ** 2)
        models /= models.sum(axis=1, keepdims=True)
        sses = ((models - data[None, :]) ** 2).sum(axis=1)
        k = int(np.argmin(sses))
        if best is None or sses[k] < best[0]:
            best = (float(sses[k]), float(mus[k]), sigma)

    def objective(x):
        return _sse(data, _truncated_model(x[0], math.exp(x[1]), n))

    sse, x = _refine(
        objective,
        [best[1], math.log(best[2])],
        best[0],
        steps=[1.0, 0.25],
        iters=config.refine_iters,
        lo_hi=[(0.0, n - 1e-9), (math.log(SIGMA_MIN), math.log(SIGMA_MAX))],
    )
    return x[0], math.exp(x[1]), sse


def _fit_unimodal_circular(dist: DiscreteCircularDistribution, config: FitConfig):
    """Least-squares phase/variance fit with the periodicity pinned to 1."""
    sse, phi, sigma = _fit_single_alpha(dist.bins, 1, config)
    return phi, sigma, sse


def decode_prediction(
    azi: DiscreteCircularDistribution,
    pol: DiscreteCircularDistribution,
    rot: DiscreteCircularDistribution,
    config: FitConfig = FitConfig(),
) -> DecodedOrientation:
    """Decode predicted angle distributions into an orientation and symmetry class.

    The azimuth head yields the periodicity and phase; the polar head is fitted
    with the truncated Gaussian; the in-plane head with the single-mode
    circular model.
    """
    if azi.n_bins != 360 or rot.n_bins != 360:
        raise ValidationError("azimuth and in-plane distributions must have 360 bins")
    if pol.n_bins != 180:
        raise ValidationError("polar distribution must have 180 bins")
    azi_fit = fit_periodic(azi, config)
    alpha_hat = map_symmetry_class(azi_fit.params.alpha)
    if alpha_hat >= 1:
        azimuth = canonicalize_phase(azi_fit.params.phi_deg, alpha_hat)
        spacing = 360.0 / alpha_hat
        candidates = tuple(sorted((azimuth + k * spacing) % 360.0 for k in range(alpha_hat)))
    else:
        azimuth = 0.0
        candidates = ()
    polar, _, _ = _fit_truncated_gaussian(pol, config)
    inplane, _, _ = _fit_unimodal_circular(rot, config)
    return DecodedOrientation(
        alpha_hat=alpha_hat,
        azimuth_deg=azimuth,
        polar_deg=polar,
        inplane_deg=inplane % 360.0,
        candidates=candidates,
    )
