"""Command-line entry points for the annotation and evaluation pipeline.

Exit codes: 0 success, 2 usage or validation failure, 3 runtime failure.
Commands are deterministic given their inputs, config, and seed, including
across worker counts: per-asset work uses independent RNG substreams and
results are reduced in a fixed order.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .annotator import (
    STATUS_DISCARDED,
    AnnotatorConfig,
    AssetAnnotation,
    annotate_asset,
    build_histogram,
)
from .calibration import apply_decisions, check_category, summarize
from .config import annotator_config, fit_config, load_config_file, noise_config, setup_logging
from .distributions import PeriodicVonMisesParams
from .errors import InsufficientDataError, OrientkitError, UnknownTargetError, ValidationError
from .evaluation import (
    MODE_CAMERA_FACING,
    MODES,
    OrientationEvalSample,
    RotationEvalSample,
    evaluate_orientation,
    evaluate_relative_rotation,
)
from .fitting import SYMMETRY_CLASSES, DecodedOrientation, canonicalize_phase
from .geometry import relative_from_absolute, symmetry_candidates, validate_rotation
from .simulator import NoiseConfig, SimAssetSpec, allocate_classes, gen_asset, gen_eval_dataset, substream

logger = logging.getLogger("orientkit.cli")

DEFAULT_CLASS_MIX = {0: 0.25, 1: 0.25, 2: 0.25, 4: 0.25}


def parse_class_mix(text: str) -> dict[int, float]:
    """Parse '0=0.25,1=0.25,2=0.25,4=0.25' into a class fraction map."""
    mix = {}
    try:
        for part in text.split(","):
            key, value = part.split("=")
            mix[int(key)] = float(value)
    except ValueError as exc:
        raise ValidationError(f"malformed class mix {text!r}") from exc
    return mix


def _run_pool(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (workers * 4))))


# -- simulate ------------------------------------------------------------------


def _other_class(rng, alpha: int) -> int:
    others = [c for c in SYMMETRY_CLASSES if c != alpha]
    return others[min(int(rng.random() * len(others)), len(others) - 1)]


def _build_specs(args, noise: NoiseConfig):
    n_categories = args.categories or max(1, args.assets // 10)
    category_classes = allocate_classes(n_categories, parse_class_mix(args.class_mix))
    specs = []
    truths = []
    for i in range(args.assets):
        cat_idx = i % n_categories
        category = f"cat{cat_idx:04d}"
        asset_id = f"asset{i:06d}"
        rng = substream(noise.seed, f"spec:{asset_id}")
        alpha = category_classes[cat_idx]
        corrupted = False
        if args.corrupt > 0 and rng.random() < args.corrupt:
            alpha = _other_class(rng, alpha)
            corrupted = True
        phi = rng.random() * (360.0 / alpha) if alpha >= 1 else 0.0
        specs.append(
            SimAssetSpec(
                asset_id=asset_id,
                category=category,
                alpha_true=alpha,
                phi_true_deg=phi,
                n_views=args.views,
                noise=noise,
            )
        )
        truths.append(io.sim_truth_to_dict(asset_id, category, alpha, phi, corrupted))
    return specs, truths


def cmd_simulate(args) -> int:
    if args.assets < 1:
        raise ValidationError("--assets must be >= 1")
    if args.views < 1:
        raise ValidationError("--views must be >= 1")
    file_cfg = load_config_file(args.config)
    noise = noise_config(
        file_cfg,
        kappa=args.kappa,
        outlier_fraction=args.outliers,
        seed=args.seed,
        confidence_model=args.confidence_model,
    )
    specs, truths = _build_specs(args, noise)
    record_lists = _run_pool(gen_asset, specs, args.workers)
    out = Path(args.out)
    io.write_pseudo_labels(out / "pseudo_labels.jsonl", (r for recs in record_lists for r in recs))
    io._write_lines(out / "ground_truth.jsonl", truths)
    logger.info("wrote %d assets (%d categories) to %s", len(specs), len({s.category for s in specs}), out)
    return 0


def cmd_simulate_eval(args) -> int:
    if args.samples < 1:
        raise ValidationError("--samples must be >= 1")
    file_cfg = load_config_file(args.config)
    noise = noise_config(file_cfg, seed=args.seed)
    dataset = gen_eval_dataset(args.samples, parse_class_mix(args.class_mix), noise)
    out = Path(args.out)
    io.write_orientation_truths(out / "orientation_gt.jsonl", dataset.orientation)
    io.write_relative_pairs(out / "relative_gt.jsonl", dataset.relative)
    logger.info("wrote %d evaluation samples to %s", args.samples, out)
    return 0


# -- annotate ------------------------------------------------------------------


def _annotate_worker(payload):
    records, config = payload
    try:
        return annotate_asset(records, config)
    except InsufficientDataError as exc:
        return AssetAnnotation(
            asset_id=records[0].asset_id,
            category=records[0].category,
            params=PeriodicVonMisesParams(0.0, 0, 1.0),
            residual=0.0,
            n_views=len(records),
            status=STATUS_DISCARDED,
            reason=str(exc),
        )


def cmd_annotate(args) -> int:
    records = io.read_pseudo_labels(args.pseudo_labels)
    if not records:
        raise ValidationError(f"{args.pseudo_labels} contains no records")
    file_cfg = load_config_file(args.config)
    fit = fit_config(file_cfg)
    config = annotator_config(
        file_cfg,
        fit,
        smoothing_sigma_deg=args.smoothing,
        min_views=args.min_views,
        use_confidence_weights=(False if args.no_confidence_weights else None),
    )
    groups: dict[str, list] = {}
    for r in records:
        groups.setdefault(r.asset_id, []).append(r)
    asset_ids = sorted(groups)
    annotations = _run_pool(_annotate_worker, [(groups[a], config) for a in asset_ids], args.workers)
    io.write_annotations(args.out, annotations)
    if args.figures:
        from . import viz

        fig_dir = viz.ensure_dir(args.figures)
        for ann in annotations[: args.figures_limit]:
            if ann.n_views >= config.min_views:
                hist = build_histogram(groups[ann.asset_id], config)
                viz.save_annotation_figure(fig_dir / f"{ann.asset_id}.png", ann, hist.bins)
    n_discarded = sum(1 for a in annotations if a.status == STATUS_DISCARDED)
    logger.info("annotated %d assets (%d discarded) -> %s", len(annotations), n_discarded, args.out)
    return 0


# -- calibrate -----------------------------------------------------------------


def _live_reports(annotations):
    active = [a for a in annotations if a.status != STATUS_DISCARDED]
    by_category: dict[str, list] = {}
    for a in active:
        by_category.setdefault(a.category, []).append(a)
    return [check_category(by_category[c]) for c in sorted(by_category)]


def cmd_calibrate(args) -> int:
    annotations = io.read_annotations(args.annotations)
    if not annotations:
        raise ValidationError(f"{args.annotations} contains no annotations")
    reports = _live_reports(annotations)
    io.write_category_reports(args.reports_out, reports)
    if args.decisions:
        decisions = io.read_decisions(args.decisions)
        calibrated = apply_decisions(annotations, decisions)
        calibrated.sort(key=lambda a: a.asset_id)
        out = args.calibrated_out or args.annotations
        io.write_annotations(out, calibrated)
        logger.info("applied %d decisions -> %s", len(decisions), out)
    if args.figures:
        from . import viz

        fig_dir = viz.ensure_dir(args.figures)
        viz.save_category_overview(fig_dir / "categories.png", reports)
    summary = summarize(reports)
    print(
        f"categories={summary.total_categories} inconsistent={summary.inconsistent_categories} "
        f"flag_rate={summary.flag_rate:.4f} alpha_distribution={summary.alpha_distribution}"
    )
    return 0


# -- eval ----------------------------------------------------------------------


def _align(gt_ids, pred_ids):
    gt_set, pred_set = set(gt_ids), set(pred_ids)
    if gt_set != pred_set:
        missing = sorted(gt_set - pred_set)[:20]
        extra = sorted(pred_set - gt_set)[:20]
        raise ValidationError(
            f"prediction/ground-truth ids do not align; missing predictions for {missing}, "
            f"unmatched predictions {extra}"
        )


def _decoded_from_prediction(pred: dict) -> DecodedOrientation:
    alpha = pred["alpha"]
    if alpha not in SYMMETRY_CLASSES:
        raise ValidationError(f"prediction alpha must be in {SYMMETRY_CLASSES}, got {alpha}")
    if alpha >= 1:
        azimuth = canonicalize_phase(pred["azimuth_deg"], alpha)
        candidates = tuple(symmetry_candidates(azimuth, alpha))
    else:
        azimuth, candidates = 0.0, ()
    return DecodedOrientation(
        alpha_hat=alpha,
        azimuth_deg=azimuth,
        polar_deg=pred["polar_deg"],
        inplane_deg=pred["inplane_deg"],
        candidates=candidates,
    )


def cmd_eval(args) -> int:
    if args.mode == "orientation":
        truths = io.read_orientation_truths(args.gt)
        preds = {p["sample_id"]: p for p in io.read_orientation_predictions(args.pred)}
        _align([t.sample_id for t in truths], preds)
        samples = [
            OrientationEvalSample(
                predicted=_decoded_from_prediction(preds[t.sample_id]),
                ground_truth=t.triplet,
                gt_alpha=t.alpha,
                sample_id=t.sample_id,
            )
            for t in truths
        ]
        report = evaluate_orientation(samples, mode=args.selection)
    else:
        pairs = io.read_relative_pairs(args.gt)
        preds = {p["sample_id"]: p for p in io.read_relative_predictions(args.pred)}
        _align([p.sample_id for p in pairs], preds)
        samples = [
            RotationEvalSample(
                predicted_relative=validate_rotation(preds[p.sample_id]["rotation"]),
                ground_truth_relative=relative_from_absolute(p.ref, p.query),
                sample_id=p.sample_id,
            )
            for p in pairs
        ]
        report = evaluate_relative_rotation(samples)
    io.write_eval_report(args.out, report)
    if args.figures:
        from . import viz

        fig_dir = viz.ensure_dir(args.figures)
        viz.save_error_histogram(
            fig_dir / f"errors_{args.mode}.png",
            [e for _, e in report.per_sample],
            title=f"{args.mode} error (n={report.n})",
        )
    extras = ""
    if report.acc_8bin is not None:
        extras += f" acc_8bin={report.acc_8bin:.4f}"
    if report.symmetry_acc is not None:
        extras += f" symmetry_acc={report.symmetry_acc:.4f}"
    print(
        f"n={report.n} median_deg={report.median_deg:.4f} acc30={report.acc30:.4f} "
        f"acc15={report.acc15:.4f}{extras}"
    )
    return 0


# -- serve ---------------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_state, create_app

    state = build_state(
        annotations_path=args.annotations,
        pseudo_labels_path=args.pseudo_labels,
        decision_log_path=args.decisions_log,
    )
    app = create_app(state, ui_dir=args.ui)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as exc:  # uvicorn exits 1 when the port is taken
        if exc.code:
            raise ValidationError(f"could not bind {args.host}:{args.port} (port in use?)") from exc
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orientkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("simulate", help="generate a synthetic pseudo-label corpus")
    common(p)
    p.add_argument("--assets", type=int, required=True)
    p.add_argument("--categories", type=int, default=0, help="0 = one per 10 assets")
    p.add_argument("--views", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--outliers", type=float, default=None)
    p.add_argument("--confidence-model", choices=["constant", "noise_dependent"], default=None)
    p.add_argument("--corrupt", type=float, default=0.0, help="fraction of assets with a wrong class")
    p.add_argument("--class-mix", default="0=0.25,1=0.25,2=0.25,4=0.25")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("simulate-eval", help="generate evaluation ground-truth files")
    common(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-mix", default="0=0.25,1=0.25,2=0.25,4=0.25")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate_eval)

    p = sub.add_parser("annotate", help="fit per-asset orientation and symmetry labels")
    common(p)
    p.add_argument("--pseudo-labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-views", type=int, default=None)
    p.add_argument("--smoothing", type=float, default=None, help="circular smoothing sigma, degrees")
    p.add_argument("--no-confidence-weights", action="store_true")
    p.add_argument("--figures", default=None, help="directory for rose-diagram figures")
    p.add_argument("--figures-limit", type=int, default=16)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("calibrate", help="consistency reports and reviewer decisions")
    common(p)
    p.add_argument("--annotations", required=True)
    p.add_argument("--reports-out", required=True)
    p.add_argument("--decisions", default=None)
    p.add_argument("--calibrated-out", default=None)
    p.add_argument("--figures", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    common(p)
    p.add_argument("--mode", choices=["orientation", "relative"], required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--selection", choices=list(MODES), default=MODE_CAMERA_FACING)
    p.add_argument("--figures", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the review service")
    common(p)
    p.add_argument("--annotations", required=True)
    p.add_argument("--pseudo-labels", default=None)
    p.add_argument("--decisions-log", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    try:
        return args.func(args)
    except (ValidationError, InsufficientDataError, UnknownTargetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OrientkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
