"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines as
they complete.
"""

import json
import math
import time

import numpy as np
import pytest

from orientkit import io
from orientkit.annotator import annotate_asset
from orientkit.calibration import (
    CalibrationDecision,
    apply_decisions,
    check_category,
    summarize,
)
from orientkit.annotator import AssetAnnotation
from orientkit.cli import main
from orientkit.distributions import PeriodicVonMisesParams, make_periodic_target
from orientkit.evaluation import (
    MODE_CAMERA_FACING,
    MODE_MIN_ERROR,
    OrientationEvalSample,
    RotationEvalSample,
    acc_at,
    azimuth_to_8bin,
    evaluate_orientation,
    evaluate_relative_rotation,
    median_error,
    orientation_sample_error,
)
from orientkit.fitting import DecodedOrientation, fit_periodic
from orientkit.geometry import (
    OrientationTriplet,
    angular_error_3d,
    geodesic_so3,
    relative_from_absolute,
    rot_y,
    symmetry_candidates,
    triplet_to_direction,
    triplet_to_rotation,
)
from orientkit.simulator import (
    NoiseConfig,
    SimAssetSpec,
    gen_asset,
    gen_eval_dataset,
    sample_von_mises,
    substream,
)

from oracles import oracle_grid_fit


def verdict(name: str, ok: bool, detail: str = ""):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def circ_err(a, b, period=360.0):
    d = abs(a - b) % period
    return min(d, period - d)


def decoded_from_truth(t):
    if t.alpha >= 1:
        cands = tuple(symmetry_candidates(t.triplet.azimuth_deg, t.alpha))
        return DecodedOrientation(
            t.alpha, t.triplet.azimuth_deg % (360.0 / t.alpha), t.triplet.polar_deg,
            t.triplet.inplane_deg, cands,
        )
    return DecodedOrientation(0, 0.0, t.triplet.polar_deg, t.triplet.inplane_deg, ())


class TestRandomBaseline:
    def test_random_symmetry_predictor_scores_one_quarter(self):
        t0 = time.perf_counter()
        mix = {0: 0.25, 1: 0.25, 2: 0.25, 4: 0.25}
        dataset = gen_eval_dataset(10_000, mix, NoiseConfig(seed=9))
        rng = substream(9, "random-predictor")
        classes = (0, 1, 2, 4)
        samples = []
        for t in dataset.orientation:
            alpha = classes[min(int(rng.random() * 4), 3)]
            pred = DecodedOrientation(
                alpha,
                0.0,
                90.0,
                0.0,
                tuple(symmetry_candidates(0.0, alpha)),
            )
            samples.append(
                OrientationEvalSample(predicted=pred, ground_truth=t.triplet, gt_alpha=t.alpha, sample_id=t.sample_id)
            )
        report = evaluate_orientation(samples)
        elapsed = time.perf_counter() - t0
        ok = abs(report.symmetry_acc - 0.25) <= 0.02 and elapsed < 5.0
        verdict(
            "random-baseline",
            ok,
            f"symmetry_acc={report.symmetry_acc:.4f} target 0.25+-0.02, {elapsed:.2f}s < 5s",
        )


class TestFitRoundTrip:
    def test_lattice_recovery(self):
        t0 = time.perf_counter()
        phis = (3.7, 40.1, 88.8, 133.25, 201.6, 278.9, 355.4)
        sigmas = (0.2, 0.36, 0.52, 0.68, 0.84, 1.0)
        failures = []
        n_points = 0
        for alpha in (1, 2, 4):
            period = 360.0 / alpha
            for phi in phis:
                phi_c = phi % period
                for sigma in sigmas:
                    n_points += 1
                    res = fit_periodic(make_periodic_target(PeriodicVonMisesParams(phi_c, alpha, sigma)))
                    if res.params.alpha != alpha or circ_err(res.params.phi_deg, phi_c, period) > 0.5:
                        failures.append((phi_c, alpha, sigma, res.params))
        elapsed = time.perf_counter() - t0
        ok = not failures and n_points >= 100 and elapsed < 30.0
        verdict(
            "fit-round-trip",
            ok,
            f"{n_points - len(failures)}/{n_points} recovered, {elapsed:.1f}s < 30s",
        )


class TestOracleEquivalence:
    def _noisy_histograms(self, n=50):
        from orientkit.annotator import AnnotatorConfig, build_histogram

        rng = substream(17, "oracle-histograms")
        hists = []
        classes = (0, 1, 2, 4)
        for i in range(n):
            alpha = classes[i % 4]
            phi = rng.random() * (360.0 / alpha) if alpha else 0.0
            spec = SimAssetSpec(
                f"oracle{i:03d}", "c", alpha, phi, 96,
                NoiseConfig(kappa=12.0 + (i % 5) * 4.0, outlier_fraction=0.02 * (i % 4), seed=1000 + i),
            )
            hists.append(build_histogram(gen_asset(spec), AnnotatorConfig()))
        return hists

    def test_fitter_never_loses_to_grid_oracle(self):
        hists = self._noisy_histograms(50)
        sse_violations = 0
        alpha_disagreements = 0
        for dist in hists:
            res = fit_periodic(dist)
            alpha_o, _, _, sse_o, _ = oracle_grid_fit(dist.bins)
            if res.sse > sse_o + 1e-9:
                sse_violations += 1
            if res.params.alpha != alpha_o:
                alpha_disagreements += 1
        ok = sse_violations == 0 and alpha_disagreements == 0
        verdict(
            "oracle-equivalence",
            ok,
            f"sse_violations={sse_violations}, alpha_disagreements={alpha_disagreements} over 50 histograms",
        )


class TestAnnotationRobustness:
    def test_recovery_rates(self):
        t0 = time.perf_counter()
        rates = {}
        for alpha_true in (1, 2, 4):
            period = 360.0 / alpha_true
            hits = 0
            for seed in range(100):
                rng = substream(seed, f"robust-phi-{alpha_true}")
                phi_true = rng.random() * period
                spec = SimAssetSpec(
                    f"rob-{alpha_true}-{seed}", "c", alpha_true, phi_true, 64,
                    NoiseConfig(kappa=20.0, outlier_fraction=0.15, seed=seed),
                )
                ann = annotate_asset(gen_asset(spec))
                if ann.params.alpha == alpha_true and circ_err(ann.params.phi_deg, phi_true, period) <= 5.0:
                    hits += 1
            rates[alpha_true] = hits
        hits0 = 0
        for seed in range(100):
            spec = SimAssetSpec(
                f"rob-0-{seed}", "c", 0, 0.0, 64, NoiseConfig(kappa=20.0, outlier_fraction=0.15, seed=seed)
            )
            if annotate_asset(gen_asset(spec)).params.alpha == 0:
                hits0 += 1
        rates[0] = hits0
        elapsed = time.perf_counter() - t0
        ok = all(v >= 95 for v in rates.values()) and elapsed < 60.0
        verdict(
            "annotation-robustness",
            ok,
            f"hits per class {rates} (need >=95/100), {elapsed:.1f}s < 60s",
        )


class TestCalibrationClosure:
    def test_flag_rate_matches_enumeration(self):
        rng = substream(5, "calibration-closure")
        classes = (0, 1, 2, 4)
        annotations = []
        truth = {}  # asset_id -> (category, true_alpha, corrupted)
        for c in range(50):
            category = f"cat{c:03d}"
            true_alpha = classes[c % 4]
            for a in range(10):
                asset_id = f"{category}-a{a}"
                corrupted = rng.random() < 0.10
                if corrupted:
                    others = [x for x in classes if x != true_alpha]
                    alpha = others[min(int(rng.random() * 3), 2)]
                else:
                    alpha = true_alpha
                phi = (rng.random() * (360.0 / alpha)) if alpha >= 1 else 0.0
                annotations.append(
                    AssetAnnotation(asset_id, category, PeriodicVonMisesParams(phi, alpha, 0.5), 1e-4, 64)
                )
                truth[asset_id] = (category, true_alpha, corrupted)

        contaminated = {cat for aid, (cat, _, corr) in truth.items() if corr}
        expected_rate = len(contaminated) / 50.0

        by_category: dict[str, list] = {}
        for a in annotations:
            by_category.setdefault(a.category, []).append(a)
        reports = [check_category(by_category[c]) for c in sorted(by_category)]
        summary = summarize(reports)
        rate_ok = summary.flag_rate == pytest.approx(expected_rate, abs=1e-12)

        decisions = []
        for i, r in enumerate(reports):
            if r.consistent:
                continue
            for asset_id in r.flagged_asset_ids:
                category, true_alpha, _ = truth[asset_id]
                if true_alpha >= 1:
                    decisions.append(
                        CalibrationDecision(
                            category, asset_id, "override", alpha=true_alpha,
                            phi_deg=15.0, timestamp=f"2025-08-01T00:00:{i:02d}",
                        )
                    )
                else:
                    decisions.append(
                        CalibrationDecision(
                            category, asset_id, "override", alpha=0, phi_deg=0.0,
                            timestamp=f"2025-08-01T00:00:{i:02d}",
                        )
                    )
        calibrated = apply_decisions(annotations, decisions)
        active = [a for a in calibrated if a.status != "discarded"]
        by_category = {}
        for a in active:
            by_category.setdefault(a.category, []).append(a)
        post = [check_category(by_category[c]) for c in sorted(by_category)]
        closure_ok = all(r.consistent for r in post)
        verdict(
            "calibration-closure",
            rate_ok and closure_ok,
            f"flag_rate={summary.flag_rate:.4f} expected={expected_rate:.4f}, "
            f"post-decision inconsistent={sum(1 for r in post if not r.consistent)}",
        )


class TestSO3MetricSuite:
    def test_metric_and_orthonormality(self):
        rng = substream(23, "so3-suite")
        violations = 0
        ortho_violations = 0
        for _ in range(10_000):
            ts = [
                OrientationTriplet(rng.random() * 360.0, rng.random() * 179.999, rng.random() * 360.0)
                for _ in range(3)
            ]
            r1, r2, r3 = (triplet_to_rotation(t) for t in ts)
            for r in (r1, r2, r3):
                if np.abs(r.T @ r - np.eye(3)).max() > 1e-9 or abs(np.linalg.det(r) - 1.0) > 1e-9:
                    ortho_violations += 1
            d12 = geodesic_so3(r1, r2)
            d21 = geodesic_so3(r2, r1)
            d13 = geodesic_so3(r1, r3)
            d23 = geodesic_so3(r2, r3)
            if abs(d12 - d21) > 1e-6 or d13 > d12 + d23 + 1e-6:
                violations += 1
        ok = violations == 0 and ortho_violations == 0
        verdict(
            "so3-metric-suite",
            ok,
            f"metric violations={violations}, orthonormality violations={ortho_violations} over 10000 triples",
        )


class TestErrorAccumulation:
    def test_composed_relative_error_exceeds_marginal(self):
        rng = substream(31, "error-accumulation")
        kappa = (180.0 / (10.0 * math.pi)) ** 2  # 10-degree circular std
        composed = np.empty(10_000)
        marginal = np.empty(10_000)
        for i in range(10_000):
            az_ref = rng.random() * 360.0
            az_query = rng.random() * 360.0
            t_ref = OrientationTriplet(az_ref, 90.0, 0.0)
            t_query = OrientationTriplet(az_query, 90.0, 0.0)
            noisy_ref = OrientationTriplet(sample_von_mises(az_ref, kappa, rng), 90.0, 0.0)
            noisy_query = OrientationTriplet(sample_von_mises(az_query, kappa, rng), 90.0, 0.0)
            composed[i] = geodesic_so3(
                relative_from_absolute(noisy_ref, noisy_query), relative_from_absolute(t_ref, t_query)
            )
            marginal[i] = angular_error_3d(
                triplet_to_direction(noisy_query), triplet_to_direction(t_query)
            )
        med_composed = float(np.median(composed))
        med_marginal = float(np.median(marginal))
        ok = med_composed > med_marginal
        verdict(
            "error-accumulation",
            ok,
            f"Med composed={med_composed:.2f} > Med marginal={med_marginal:.2f}",
        )


class TestMetricUnitSuite:
    def test_trivial_examples_and_monotonicity(self):
        checks = []

        checks.append(median_error([10, 20, 30]) == 20)
        checks.append(median_error([10, 20, 30, 40]) == 20)
        checks.append(median_error([7]) == 7)

        checks.append(acc_at([10, 20, 40], 30) == 2 / 3)
        checks.append(acc_at([31, 45], 30) == 0.0)
        checks.append(acc_at([29.999], 30) == 1.0)

        checks.append(azimuth_to_8bin(0.0) == 0)
        checks.append(azimuth_to_8bin(100.0) == 2)
        checks.append(azimuth_to_8bin(337.5) == 0)

        # exact prediction scores zero error and every accuracy
        exact = OrientationEvalSample(
            predicted=DecodedOrientation(1, 40.0, 90.0, 0.0, (40.0,)),
            ground_truth=OrientationTriplet(40.0, 90.0, 0.0),
            gt_alpha=1,
        )
        report = evaluate_orientation([exact])
        checks.append(report.median_deg == 0.0)
        checks.append(report.acc30 == 1.0)
        checks.append(report.acc_8bin == 1.0)

        # two-fold candidates straddling the camera direction: the facing one wins
        two_fold = OrientationEvalSample(
            predicted=DecodedOrientation(2, 10.0, 90.0, 0.0, (10.0, 190.0)),
            ground_truth=OrientationTriplet(0.0, 90.0, 0.0),
        )
        err, az = orientation_sample_error(two_fold, MODE_CAMERA_FACING)
        checks.append(az == 10.0 and abs(err - 10.0) <= 1e-9)

        # selection modes diverge when the error-minimizing candidate faces away
        away = OrientationEvalSample(
            predicted=DecodedOrientation(2, 170.0, 90.0, 0.0, (170.0, 350.0)),
            ground_truth=OrientationTriplet(180.0, 90.0, 0.0),
        )
        err_min, az_min = orientation_sample_error(away, MODE_MIN_ERROR)
        err_cam, az_cam = orientation_sample_error(away, MODE_CAMERA_FACING)
        checks.append(abs(err_min - 10.0) <= 1e-9 and az_min == 170.0)
        checks.append(abs(err_cam - 170.0) <= 1e-9 and az_cam == 350.0)

        # relative-rotation examples
        r = triplet_to_rotation(OrientationTriplet(33.0, 80.0, 5.0))
        exact_rel = evaluate_relative_rotation([RotationEvalSample(r, r)])
        checks.append(exact_rel.median_deg == 0.0 and exact_rel.acc15 == 1.0 and exact_rel.acc30 == 1.0)

        spread = evaluate_relative_rotation(
            [RotationEvalSample(rot_y(e), np.eye(3)) for e in (10.0, 20.0, 40.0)]
        )
        checks.append(abs(spread.median_deg - 20.0) <= 1e-9)
        checks.append(spread.acc15 == 1 / 3 and spread.acc30 == 2 / 3)

        disturbance = rot_y(25.0)
        gts = [triplet_to_rotation(OrientationTriplet(az, 90.0, 0.0)) for az in (0.0, 120.0, 240.0)]
        const = evaluate_relative_rotation([RotationEvalSample(disturbance @ g, g) for g in gts])
        checks.append(const.acc30 == 1.0 and const.acc15 == 0.0)
        checks.append(abs(const.median_deg - 25.0) <= 1e-6)

        # threshold monotonicity over random error lists
        rng = np.random.default_rng(77)
        monotone = True
        for _ in range(200):
            errors = rng.uniform(0.0, 180.0, size=rng.integers(1, 40))
            thresholds = np.sort(rng.uniform(0.5, 179.0, size=4))
            accs = [acc_at(errors, t) for t in thresholds]
            if any(a > b for a, b in zip(accs, accs[1:])):
                monotone = False
        checks.append(monotone)

        ok = all(checks)
        verdict("metric-unit-suite", ok, f"{sum(checks)}/{len(checks)} checks")


class TestDeterminism:
    def test_cli_outputs_byte_identical(self, tmp_path):
        def simulate(out, workers):
            assert (
                main(
                    [
                        "simulate", "--assets", "16", "--categories", "8", "--views", "48",
                        "--seed", "21", "--kappa", "25", "--outliers", "0.1",
                        "--out", str(out), "--workers", str(workers),
                    ]
                )
                == 0
            )

        def annotate(labels, out, workers):
            assert (
                main(
                    [
                        "annotate", "--pseudo-labels", str(labels), "--out", str(out),
                        "--workers", str(workers),
                    ]
                )
                == 0
            )

        def evaluate(gt, pred, out, workers):
            assert (
                main(
                    [
                        "eval", "--mode", "orientation", "--pred", str(pred), "--gt", str(gt),
                        "--out", str(out), "--workers", str(workers),
                    ]
                )
                == 0
            )

        runs = {}
        for tag, workers in (("r1", 1), ("r2", 1), ("w8", 8)):
            base = tmp_path / tag
            simulate(base, workers)
            annotate(base / "pseudo_labels.jsonl", base / "annotations.jsonl", workers)
            assert main(["simulate-eval", "--samples", "64", "--seed", "4", "--out", str(base)]) == 0
            truths = io.read_orientation_truths(base / "orientation_gt.jsonl")
            preds = [
                io.orientation_prediction_to_dict(
                    t.sample_id, t.alpha, (t.triplet.azimuth_deg + 7.0) % 360.0,
                    t.triplet.polar_deg, t.triplet.inplane_deg,
                )
                for t in truths
            ]
            io._write_lines(base / "predictions.jsonl", preds)
            evaluate(base / "orientation_gt.jsonl", base / "predictions.jsonl", base / "report.json", workers)
            runs[tag] = {
                name: (base / name).read_bytes()
                for name in ("pseudo_labels.jsonl", "ground_truth.jsonl", "annotations.jsonl", "orientation_gt.jsonl", "report.json")
            }
        identical = runs["r1"] == runs["r2"] == runs["w8"]
        verdict("determinism", identical, "simulate/annotate/eval byte-identical across reruns and workers 1 vs 8")
