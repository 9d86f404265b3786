from datetime import date

import numpy as np
import pytest

from nourid.errors import DimensionMismatch, FormatError, TargetUnreachable
from nourid.registry import (
    FaceTemplate,
    PopulationConfig,
    inject_defects,
    seed_population,
)
from nourid.verification import (
    calibrate_threshold,
    capture_probe,
    match_templates,
    simulate_score_corpus,
    validate_cin_format,
    validate_document,
)

TODAY = date(2024, 12, 31)


class TestCinFormat:
    def test_valid(self):
        assert validate_cin_format("AB123456") == "AB123456"

    def test_trim_and_uppercase(self):
        assert validate_cin_format("  ab123456 ") == "AB123456"

    def test_empty(self):
        with pytest.raises(FormatError) as exc:
            validate_cin_format("")
        assert exc.value.reason == "empty"

    def test_pattern_mismatch(self):
        with pytest.raises(FormatError) as exc:
            validate_cin_format("123ABC")
        assert exc.value.reason == "pattern_mismatch"

    def test_wrong_length(self):
        with pytest.raises(FormatError) as exc:
            validate_cin_format("AB1234567")
        assert exc.value.reason == "length"


class TestCaptureAndMatch:
    def test_zero_noise_identity(self, rng):
        ref = FaceTemplate.random(rng, 128)
        probe = capture_probe(ref, 0.0, seed=1)
        assert probe.embedding == ref.embedding

    def test_output_unit_norm(self, rng):
        ref = FaceTemplate.random(rng, 128)
        for sigma in (0.01, 0.2, 1.0, 5.0):
            probe = capture_probe(ref, sigma, seed=2)
            assert abs(np.linalg.norm(probe.embedding) - 1.0) <= 1e-6

    def test_deterministic_per_seed(self, rng):
        ref = FaceTemplate.random(rng, 128)
        assert capture_probe(ref, 0.3, seed=9).embedding == capture_probe(ref, 0.3, seed=9).embedding

    def test_noisy_probe_closer_to_reference_than_stranger(self, rng):
        # Monte Carlo: genuine similarity dominates similarity to an unrelated template
        ref = FaceTemplate.random(rng, 128)
        stranger = FaceTemplate.random(rng, 128)
        gen = np.random.default_rng(77)
        own, other = [], []
        for _ in range(1000):
            probe = capture_probe(ref, 0.1, rng=gen)
            own.append(match_templates(probe, ref, 0.5).score)
            other.append(match_templates(probe, stranger, 0.5).score)
        assert np.mean(own) > np.mean(other)

    def test_identical_templates_score_one(self, rng):
        ref = FaceTemplate.random(rng, 128)
        result = match_templates(ref, ref, 0.9)
        assert result.score == pytest.approx(1.0, abs=1e-9)
        assert result.is_match

    def test_orthogonal_templates_score_zero(self):
        a = FaceTemplate.from_vector(np.array([1.0, 0.0, 0.0, 0.0]))
        b = FaceTemplate.from_vector(np.array([0.0, 1.0, 0.0, 0.0]))
        result = match_templates(a, b, 0.5)
        assert result.score == pytest.approx(0.0, abs=1e-12)
        assert not result.is_match

    def test_symmetry(self, rng):
        a = FaceTemplate.random(rng, 64)
        b = FaceTemplate.random(rng, 64)
        assert match_templates(a, b, 0.5).score == pytest.approx(
            match_templates(b, a, 0.5).score
        )

    def test_permutation_invariance(self, rng):
        a = FaceTemplate.random(rng, 64)
        b = FaceTemplate.random(rng, 64)
        perm = np.random.default_rng(5).permutation(64)
        pa = FaceTemplate.from_vector(a.as_array()[perm])
        pb = FaceTemplate.from_vector(b.as_array()[perm])
        assert match_templates(pa, pb, 0.5).score == pytest.approx(
            match_templates(a, b, 0.5).score, abs=1e-12
        )

    def test_dimension_mismatch(self, rng):
        a = FaceTemplate.random(rng, 64)
        b = FaceTemplate.random(rng, 128)
        with pytest.raises(DimensionMismatch):
            match_templates(a, b, 0.5)


class TestCalibration:
    def test_separable_scores(self):
        result = calibrate_threshold([1.0] * 20, [0.0] * 20, target_accuracy=0.98)
        assert 0.0 < result.threshold < 1.0
        assert result.achieved_accuracy == 1.0

    def test_inseparable_scores(self):
        scores = list(np.linspace(-0.5, 0.5, 50))
        with pytest.raises(TargetUnreachable) as exc:
            calibrate_threshold(scores, scores, target_accuracy=0.98)
        assert exc.value.best_achievable == pytest.approx(0.5, abs=0.02)

    def test_default_noise_model_hits_target_band(self):
        genuine, impostor = simulate_score_corpus(10000, seed=42)
        result = calibrate_threshold(genuine, impostor, target_accuracy=0.98)
        assert 0.98 <= result.achieved_accuracy < 1.0

    def test_reported_accuracy_matches_exhaustive_sweep(self, rng):
        genuine = rng.normal(0.6, 0.2, 40)
        impostor = rng.normal(0.1, 0.2, 40)
        result = calibrate_threshold(genuine, impostor, target_accuracy=0.0)

        # brute force: every midpoint, balanced accuracy by direct counting
        merged = np.unique(np.concatenate([genuine, impostor]))
        cands = [merged[0] - 1] + list((merged[:-1] + merged[1:]) / 2) + [merged[-1] + 1]
        best = 0.0
        for t in cands:
            tpr = np.mean(genuine >= t)
            tnr = np.mean(impostor < t)
            best = max(best, (tpr + tnr) / 2)
        assert result.achieved_accuracy == pytest.approx(best, abs=1e-12)

    def test_empty_scores_rejected(self):
        with pytest.raises(ValueError):
            calibrate_threshold([], [0.1])


@pytest.fixture(scope="module")
def doc_snapshot():
    return seed_population(PopulationConfig(farmers=20, entrepreneurs=20, households=20), seed=3)


class TestDocumentValidation:
    def test_clean_document_valid(self, doc_snapshot):
        pid, parcel = next(iter(doc_snapshot.parcels.items()))
        doc = doc_snapshot.fetch_document(pid, "ownership_certificate")
        report = validate_document(doc, parcel.owner_cin, TODAY)
        assert report.verdict == "valid"
        assert all(c.passed for c in report.checks)

    def test_integrity_defect_detected(self, doc_snapshot):
        injected = inject_defects(doc_snapshot, 1.0, seed=8, detectability=1.0)
        hit = False
        for doc in injected.documents.values():
            if doc.defect and doc.defect.kind == "integrity_code_mismatch":
                owner = injected.parcels[doc.parcel_id].owner_cin
                report = validate_document(doc, owner, TODAY)
                assert report.verdict == "invalid"
                assert any(c.name == "integrity_code" and not c.passed for c in report.checks)
                hit = True
        assert hit

    def test_expired_defect_detected(self, doc_snapshot):
        injected = inject_defects(doc_snapshot, 1.0, seed=8, detectability=1.0)
        for doc in injected.documents.values():
            if doc.defect and doc.defect.kind == "expired_issue_date":
                owner = injected.parcels[doc.parcel_id].owner_cin
                report = validate_document(doc, owner, TODAY)
                assert any(c.name == "issue_date_current" and not c.passed for c in report.checks)
                return
        pytest.fail("no expired defect in corpus")

    def test_wrong_owner_detected(self, doc_snapshot):
        pid, parcel = next(iter(doc_snapshot.parcels.items()))
        doc = doc_snapshot.fetch_document(pid, "ownership_certificate")
        report = validate_document(doc, "ZZ99999", TODAY)
        assert report.verdict == "invalid"
        assert any(c.name == "owner_match" and not c.passed for c in report.checks)

    def test_verdict_is_pure_function(self, doc_snapshot):
        pid, parcel = next(iter(doc_snapshot.parcels.items()))
        doc = doc_snapshot.fetch_document(pid, "cadastral_plan")
        a = validate_document(doc, parcel.owner_cin, TODAY)
        b = validate_document(doc, parcel.owner_cin, TODAY)
        assert a == b

    def test_accuracy_on_20pct_defect_corpus(self):
        # 10k docs at 20% defects: verdicts vs injected ground truth
        snap = seed_population(
            PopulationConfig(
                farmers=834, entrepreneurs=833, households=833,
                min_parcels_per_citizen=2, max_parcels_per_citizen=2,
            ),
            seed=21,
        )
        injected = inject_defects(snap, 0.2, seed=21)
        assert len(injected.documents) == 10000
        correct = 0
        for doc in injected.documents.values():
            owner = injected.parcels[doc.parcel_id].owner_cin
            verdict_invalid = validate_document(doc, owner, TODAY).verdict == "invalid"
            truly_defective = doc.defect is not None
            correct += verdict_invalid == truly_defective
        accuracy = correct / len(injected.documents)
        assert accuracy >= 0.98
