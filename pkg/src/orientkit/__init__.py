"""Symmetry-aware object-orientation annotation and evaluation toolkit."""

from .annotator import (
    AnnotatorConfig,
    AssetAnnotation,
    PseudoLabelRecord,
    annotate_asset,
    build_histogram,
    project_to_canonical,
)
from .calibration import (
    CalibrationDecision,
    CategoryReport,
    apply_decisions,
    check_category,
    summarize,
)
from .distributions import (
    DiscreteCircularDistribution,
    PeriodicVonMisesParams,
    TargetConfig,
    bessel_i0,
    make_periodic_target,
    make_unimodal_target,
    normalize,
)
from .errors import InsufficientDataError, OrientkitError, UnknownTargetError, ValidationError
from .evaluation import (
    EvalReport,
    OrientationEvalSample,
    RotationEvalSample,
    acc_at,
    azimuth_to_8bin,
    evaluate_orientation,
    evaluate_relative_rotation,
    median_error,
)
from .fitting import (
    DecodedOrientation,
    FitConfig,
    FitResult,
    canonicalize_phase,
    decode_prediction,
    fit_periodic,
    map_symmetry_class,
)
from .geometry import (
    OrientationTriplet,
    angular_error_3d,
    geodesic_so3,
    relative_from_absolute,
    relative_rotation,
    select_camera_facing,
    symmetry_candidates,
    triplet_to_direction,
    triplet_to_rotation,
)
from .simulator import (
    EvalDataset,
    NoiseConfig,
    OrientationTruth,
    RelativePairTruth,
    SimAssetSpec,
    gen_asset,
    gen_eval_dataset,
    sample_von_mises,
)

__version__ = "0.1.0"
