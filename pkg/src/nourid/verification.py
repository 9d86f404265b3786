"""CIN format checks, simulated biometric matching, and document validation.

Matching is cosine similarity between unit-norm templates. The capture
noise default is calibrated so a threshold swept over genuine/impostor
scores lands at but not trivially above 98% balanced accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .canonical import field_checksum
from .errors import DimensionMismatch, TargetUnreachable
from .registry import FaceTemplate, PropertyDocument, validate_cin

DEFAULT_NOISE_SIGMA = 0.22
DEFAULT_TEMPLATE_DIM = 128
DOCUMENT_MAX_AGE_YEARS = 10

REQUIRED_FIELDS = {
    "cadastral_plan": ("issuer", "issue_date", "parcel_id", "boundary_summary"),
    "ownership_certificate": ("issuer", "issue_date", "parcel_id", "owner_cin", "owner_name"),
}


@dataclass(frozen=True)
class CinSubmission:
    """Raw upload; validation happens in the operations, not on construction."""

    cin: str
    full_name: str
    date_of_birth: date
    probe_template: FaceTemplate


@dataclass(frozen=True)
class MatchResult:
    score: float
    threshold: float

    @property
    def is_match(self) -> bool:
        return self.score >= self.threshold

    def to_dict(self) -> dict:
        return {"score": self.score, "threshold": self.threshold, "is_match": self.is_match}


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    subject_id: str
    checks: tuple[CheckOutcome, ...]

    @property
    def verdict(self) -> str:
        return "valid" if all(c.passed for c in self.checks) else "invalid"

    @property
    def is_valid(self) -> bool:
        return self.verdict == "valid"

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
            "verdict": self.verdict,
        }


def validate_cin_format(raw: str) -> str:
    """Trim, uppercase, and match against the CIN pattern.

    Returns the normalized CIN; raises FormatError with a machine-readable
    reason (empty, length, pattern_mismatch) otherwise.
    """
    return validate_cin(raw)


def capture_probe(reference: FaceTemplate, noise_sigma: float, seed: int | None = None,
                  rng: np.random.Generator | None = None) -> FaceTemplate:
    """Simulated biometric capture: reference plus Gaussian noise, renormalized."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    if noise_sigma == 0:
        return reference
    if rng is None:
        rng = np.random.default_rng(seed)
    vec = reference.as_array() + rng.normal(0.0, noise_sigma, size=reference.dim)
    return FaceTemplate.from_vector(vec)


def match_templates(probe: FaceTemplate, reference: FaceTemplate,
                    threshold: float) -> MatchResult:
    """Cosine score between two templates; match iff score >= threshold."""
    if probe.dim != reference.dim:
        raise DimensionMismatch(
            f"template dimensions differ: {probe.dim} vs {reference.dim}"
        )
    score = float(np.dot(probe.as_array(), reference.as_array()))
    score = max(-1.0, min(1.0, score))
    return MatchResult(score=score, threshold=threshold)


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    achieved_accuracy: float
    n_genuine: int
    n_impostor: int

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "achieved_accuracy": self.achieved_accuracy,
            "n_genuine": self.n_genuine,
            "n_impostor": self.n_impostor,
        }


def calibrate_threshold(genuine_scores, impostor_scores,
                        target_accuracy: float = 0.98) -> CalibrationResult:
    """Sweep thresholds at score boundaries, maximizing balanced accuracy.

    Candidate thresholds are midpoints between adjacent distinct scores
    plus sentinels outside the range, so every achievable confusion matrix
    is visited. Raises TargetUnreachable when the best sweep result is
    below target_accuracy.
    """
    genuine = np.asarray(genuine_scores, dtype=float)
    impostor = np.asarray(impostor_scores, dtype=float)
    if genuine.size == 0 or impostor.size == 0:
        raise ValueError("both score lists must be non-empty")

    merged = np.unique(np.concatenate([genuine, impostor]))
    candidates = np.concatenate(
        [[merged[0] - 1.0], (merged[:-1] + merged[1:]) / 2.0, [merged[-1] + 1.0]]
    )
    g_sorted = np.sort(genuine)
    i_sorted = np.sort(impostor)
    tpr = 1.0 - np.searchsorted(g_sorted, candidates, side="left") / genuine.size
    tnr = np.searchsorted(i_sorted, candidates, side="left") / impostor.size
    balanced = (tpr + tnr) / 2.0
    best = int(np.argmax(balanced))
    result = CalibrationResult(
        threshold=float(candidates[best]),
        achieved_accuracy=float(balanced[best]),
        n_genuine=int(genuine.size),
        n_impostor=int(impostor.size),
    )
    if result.achieved_accuracy < target_accuracy:
        raise TargetUnreachable(result.achieved_accuracy, target_accuracy)
    return result


def simulate_score_corpus(n_pairs: int, seed: int, noise_sigma: float = DEFAULT_NOISE_SIGMA,
                          dim: int = DEFAULT_TEMPLATE_DIM) -> tuple[np.ndarray, np.ndarray]:
    """Genuine and impostor cosine scores for calibration and evaluation.

    Genuine pairs are (reference, noisy capture of it); impostors are
    independent random templates. Vectorized: rows are pairs.
    """
    rng = np.random.default_rng(seed)

    refs = rng.standard_normal((n_pairs, dim))
    refs /= np.linalg.norm(refs, axis=1, keepdims=True)
    probes = refs + rng.normal(0.0, noise_sigma, size=refs.shape)
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    genuine = np.einsum("ij,ij->i", refs, probes)

    a = rng.standard_normal((n_pairs, dim))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = rng.standard_normal((n_pairs, dim))
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    impostor = np.einsum("ij,ij->i", a, b)
    return genuine, impostor


def validate_document(doc: PropertyDocument, expected_owner_cin: str,
                      today: date) -> ValidationReport:
    """Deterministic rule checks; failures are report content, not errors."""
    checks: list[CheckOutcome] = []

    recomputed = field_checksum(doc.fields)
    checks.append(
        CheckOutcome(
            "integrity_code",
            recomputed == doc.integrity_code,
            "" if recomputed == doc.integrity_code else "checksum mismatch",
        )
    )

    required = REQUIRED_FIELDS[doc.kind]
    missing = [f for f in required if f not in doc.fields]
    checks.append(
        CheckOutcome(
            "required_fields",
            not missing,
            "" if not missing else f"missing: {', '.join(missing)}",
        )
    )

    issue_ok = False
    detail = ""
    raw = doc.fields.get("issue_date")
    if raw is None:
        detail = "issue_date absent"
    else:
        try:
            issued = date.fromisoformat(raw)
        except ValueError:
            detail = f"unparseable issue_date {raw!r}"
        else:
            cutoff = today - timedelta(days=int(DOCUMENT_MAX_AGE_YEARS * 365.25))
            issue_ok = issued >= cutoff
            detail = "" if issue_ok else f"issued {raw}, older than {DOCUMENT_MAX_AGE_YEARS}y"
    checks.append(CheckOutcome("issue_date_current", issue_ok, detail))

    ref_ok = doc.fields.get("parcel_id") == doc.parcel_id
    checks.append(
        CheckOutcome("parcel_reference", ref_ok, "" if ref_ok else "parcel_id field mismatch")
    )

    if doc.kind == "ownership_certificate":
        owner_ok = doc.fields.get("owner_cin") == expected_owner_cin
        checks.append(
            CheckOutcome(
                "owner_match",
                owner_ok,
                "" if owner_ok else f"owner {doc.fields.get('owner_cin')!r} != expected",
            )
        )

    return ValidationReport(subject_id=doc.parcel_id, checks=tuple(checks))
