"""Simulated government data sources.

Covers the national identity registry, the property registry, and the
land-agency document store, all seeded deterministically so the same
(config, seed) pair always produces byte-identical snapshots. Snapshots
are immutable after seeding; defect injection builds a new snapshot.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .canonical import canonical_json, field_checksum
from .errors import FormatError, InvalidConfig, NotFound

CIN_PATTERN = re.compile(r"^[A-Z]{1,2}[0-9]{5,6}$")
PARCEL_PATTERN = re.compile(r"^TF-([0-9]{2})-([0-9]{6})$")

PROPERTY_TYPES = ("household", "agricultural", "commercial")
DOCUMENT_KINDS = ("cadastral_plan", "ownership_certificate")

# persona in the population config -> property type of everything they own
PERSONA_PROPERTY_TYPE = {
    "farmers": "agricultural",
    "entrepreneurs": "commercial",
    "households": "household",
}

_FIRST_NAMES = (
    "Amina", "Youssef", "Fatima", "Omar", "Khadija", "Mehdi", "Salma",
    "Hamza", "Nadia", "Karim", "Leila", "Rachid", "Zineb", "Hassan",
    "Imane", "Said", "Meryem", "Anas", "Houda", "Tarik", "Samira",
    "Driss", "Najat", "Bilal",
)
_SURNAMES = (
    "El Amrani", "Benali", "Chakir", "El Fassi", "Haddad", "Idrissi",
    "Jabri", "Kabbaj", "Lahlou", "Mansouri", "Naciri", "Ouazzani",
    "Qadiri", "Rhazi", "Saidi", "Tazi", "Alaoui", "Bennis", "Cherkaoui",
    "Daoudi",
)
_REGIONS = {
    "01": "Tanger", "02": "Oriental", "03": "Fes", "04": "Rabat",
    "05": "Beni Mellal", "06": "Casablanca", "07": "Marrakech",
    "08": "Draa-Tafilalet", "09": "Souss-Massa", "10": "Guelmim",
    "11": "Laayoune", "12": "Dakhla",
}

DEFECT_KINDS = ("integrity_code_mismatch", "expired_issue_date", "field_mismatch")


@dataclass(frozen=True)
class FaceTemplate:
    """Fixed-length unit-norm embedding standing in for real biometrics."""

    embedding: tuple[float, ...]

    def __post_init__(self):
        norm = float(np.linalg.norm(self.embedding))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"template norm {norm} not within 1e-6 of 1.0")

    @property
    def dim(self) -> int:
        return len(self.embedding)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.embedding, dtype=float)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "FaceTemplate":
        vec = np.asarray(vec, dtype=float)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("zero vector cannot be a template")
        return cls(tuple(float(x) for x in vec / norm))

    @classmethod
    def random(cls, rng: np.random.Generator, dim: int = 128) -> "FaceTemplate":
        return cls.from_vector(rng.standard_normal(dim))


@dataclass(frozen=True)
class CitizenIdentity:
    cin: str
    full_name: str
    date_of_birth: date
    reference_template: FaceTemplate
    cin_expiry: date


@dataclass(frozen=True)
class Parcel:
    parcel_id: str
    owner_cin: str
    property_type: str
    area_m2: float
    region: str
    locality: str


@dataclass(frozen=True)
class DefectTag:
    kind: str
    evaded: bool = False


@dataclass(frozen=True)
class PropertyDocument:
    parcel_id: str
    kind: str
    fields: dict
    integrity_code: str
    defect: DefectTag | None = None


@dataclass(frozen=True)
class PopulationConfig:
    farmers: int = 0
    entrepreneurs: int = 0
    households: int = 0
    min_parcels_per_citizen: int = 1
    max_parcels_per_citizen: int = 3
    template_dim: int = 128
    as_of: date = date(2024, 12, 31)

    def validate(self):
        counts = (self.farmers, self.entrepreneurs, self.households)
        if any(c < 0 for c in counts):
            raise InvalidConfig(f"persona counts must be >= 0, got {counts}")
        if self.min_parcels_per_citizen < 0:
            raise InvalidConfig("min_parcels_per_citizen must be >= 0")
        if self.max_parcels_per_citizen < self.min_parcels_per_citizen:
            raise InvalidConfig("max_parcels_per_citizen below minimum")
        if self.template_dim < 2:
            raise InvalidConfig("template_dim must be >= 2")


def validate_cin(cin: str) -> str:
    """Normalize and check a CIN; FormatError (not NotFound) on bad shape."""
    if not isinstance(cin, str) or not cin.strip():
        raise FormatError("empty", "CIN is empty")
    norm = cin.strip().upper()
    if not CIN_PATTERN.match(norm):
        letters = re.match(r"^[A-Z]+", norm)
        rest = norm[letters.end():] if letters else norm
        if letters and 1 <= len(letters.group()) <= 2 and rest.isdigit():
            raise FormatError("length", f"CIN {norm!r} has wrong digit count")
        raise FormatError("pattern_mismatch", f"CIN {norm!r} does not match the CIN pattern")
    return norm


@dataclass
class RegistrySnapshot:
    """Immutable after construction; all lookups are exact-match."""

    citizens: dict[str, CitizenIdentity]
    parcels: dict[str, Parcel]
    documents: dict[tuple[str, str], PropertyDocument]
    config: PopulationConfig
    seed: int
    defect_rate: float = 0.0

    @property
    def as_of(self) -> date:
        return self.config.as_of

    def lookup_identity(self, cin: str) -> CitizenIdentity:
        norm = validate_cin(cin)
        record = self.citizens.get(norm)
        if record is None:
            raise NotFound(f"no identity registered for CIN {norm}", cin=norm)
        return record

    def list_parcels_by_owner(self, cin: str) -> list[Parcel]:
        norm = validate_cin(cin)
        owned = [p for p in self.parcels.values() if p.owner_cin == norm]
        return sorted(owned, key=lambda p: p.parcel_id)

    def fetch_document(self, parcel_id: str, kind: str) -> PropertyDocument:
        if kind not in DOCUMENT_KINDS:
            raise FormatError("unknown_kind", f"unknown document kind {kind!r}")
        doc = self.documents.get((parcel_id, kind))
        if doc is None:
            raise NotFound(f"no {kind} for parcel {parcel_id}", parcel_id=parcel_id)
        return doc

    # serialization -------------------------------------------------------

    def export_records(self) -> dict[str, list[str]]:
        """One NDJSON-ready record list per registry, deterministic order."""
        citizens = [
            canonical_json(
                {
                    "cin": c.cin,
                    "full_name": c.full_name,
                    "date_of_birth": c.date_of_birth.isoformat(),
                    "reference_template": list(c.reference_template.embedding),
                    "cin_expiry": c.cin_expiry.isoformat(),
                }
            )
            for c in sorted(self.citizens.values(), key=lambda c: c.cin)
        ]
        parcels = [
            canonical_json(
                {
                    "parcel_id": p.parcel_id,
                    "owner_cin": p.owner_cin,
                    "property_type": p.property_type,
                    "area_m2": p.area_m2,
                    "location": {"region": p.region, "locality": p.locality},
                }
            )
            for p in sorted(self.parcels.values(), key=lambda p: p.parcel_id)
        ]
        documents = [
            canonical_json(
                {
                    "parcel_id": d.parcel_id,
                    "kind": d.kind,
                    "fields": d.fields,
                    "integrity_code": d.integrity_code,
                    "defect": None
                    if d.defect is None
                    else {"kind": d.defect.kind, "evaded": d.defect.evaded},
                }
            )
            for d in sorted(self.documents.values(), key=lambda d: (d.parcel_id, d.kind))
        ]
        return {"citizens": citizens, "parcels": parcels, "documents": documents}

    def save(self, directory: str | Path):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        records = self.export_records()
        for name, lines in records.items():
            (directory / f"{name}.jsonl").write_text(
                "".join(line + "\n" for line in lines), encoding="utf-8"
            )
        meta = {
            "config": {
                "farmers": self.config.farmers,
                "entrepreneurs": self.config.entrepreneurs,
                "households": self.config.households,
                "min_parcels_per_citizen": self.config.min_parcels_per_citizen,
                "max_parcels_per_citizen": self.config.max_parcels_per_citizen,
                "template_dim": self.config.template_dim,
                "as_of": self.config.as_of.isoformat(),
            },
            "seed": self.seed,
            "defect_rate": self.defect_rate,
        }
        (directory / "meta.json").write_text(canonical_json(meta) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path) -> "RegistrySnapshot":
        import json

        directory = Path(directory)
        meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
        cfg = meta["config"]
        config = PopulationConfig(
            farmers=cfg["farmers"],
            entrepreneurs=cfg["entrepreneurs"],
            households=cfg["households"],
            min_parcels_per_citizen=cfg["min_parcels_per_citizen"],
            max_parcels_per_citizen=cfg["max_parcels_per_citizen"],
            template_dim=cfg["template_dim"],
            as_of=date.fromisoformat(cfg["as_of"]),
        )
        citizens = {}
        for line in (directory / "citizens.jsonl").read_text(encoding="utf-8").splitlines():
            rec = json.loads(line)
            citizens[rec["cin"]] = CitizenIdentity(
                cin=rec["cin"],
                full_name=rec["full_name"],
                date_of_birth=date.fromisoformat(rec["date_of_birth"]),
                reference_template=FaceTemplate(tuple(rec["reference_template"])),
                cin_expiry=date.fromisoformat(rec["cin_expiry"]),
            )
        parcels = {}
        for line in (directory / "parcels.jsonl").read_text(encoding="utf-8").splitlines():
            rec = json.loads(line)
            parcels[rec["parcel_id"]] = Parcel(
                parcel_id=rec["parcel_id"],
                owner_cin=rec["owner_cin"],
                property_type=rec["property_type"],
                area_m2=rec["area_m2"],
                region=rec["location"]["region"],
                locality=rec["location"]["locality"],
            )
        documents = {}
        for line in (directory / "documents.jsonl").read_text(encoding="utf-8").splitlines():
            rec = json.loads(line)
            defect = rec["defect"]
            documents[(rec["parcel_id"], rec["kind"])] = PropertyDocument(
                parcel_id=rec["parcel_id"],
                kind=rec["kind"],
                fields=rec["fields"],
                integrity_code=rec["integrity_code"],
                defect=None if defect is None else DefectTag(defect["kind"], defect["evaded"]),
            )
        return cls(
            citizens=citizens,
            parcels=parcels,
            documents=documents,
            config=config,
            seed=meta["seed"],
            defect_rate=meta.get("defect_rate", 0.0),
        )


def _new_cin(rng: np.random.Generator, taken: set[str]) -> str:
    letters = "ABCDEFGHJKLMNPQRSTUVWXYZ"
    while True:
        n_letters = int(rng.integers(1, 3))
        prefix = "".join(letters[rng.integers(len(letters))] for _ in range(n_letters))
        n_digits = int(rng.integers(5, 7))
        digits = "".join(str(rng.integers(10)) for _ in range(n_digits))
        cin = prefix + digits
        if cin not in taken:
            taken.add(cin)
            return cin


def _document_fields(parcel: Parcel, owner: CitizenIdentity, kind: str,
                     rng: np.random.Generator, as_of: date) -> dict:
    issue_date = as_of - timedelta(days=int(rng.integers(30, 9 * 365)))
    base = {
        "issuer": "ANCFCC",
        "issue_date": issue_date.isoformat(),
        "parcel_id": parcel.parcel_id,
    }
    if kind == "cadastral_plan":
        base["boundary_summary"] = (
            f"{int(rng.integers(4, 9))}-vertex polygon, "
            f"perimeter {int(np.sqrt(parcel.area_m2) * 4)} m, region {parcel.region}"
        )
        base["surveyor"] = f"Cabinet {_SURNAMES[rng.integers(len(_SURNAMES))]}"
    else:
        base["owner_cin"] = owner.cin
        base["owner_name"] = owner.full_name
        base["title_status"] = "active"
    return base


def seed_population(config: PopulationConfig, seed: int) -> RegistrySnapshot:
    """Build the three registries for the configured persona counts.

    Deterministic: the generator is consumed in a fixed order, and record
    ids come from counters, so equal (config, seed) means equal snapshots.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    citizens: dict[str, CitizenIdentity] = {}
    parcels: dict[str, Parcel] = {}
    documents: dict[tuple[str, str], PropertyDocument] = {}
    taken_cins: set[str] = set()
    serial = 100000

    region_codes = sorted(_REGIONS)
    for persona in ("farmers", "entrepreneurs", "households"):
        count = getattr(config, persona)
        ptype = PERSONA_PROPERTY_TYPE[persona]
        for _ in range(count):
            cin = _new_cin(rng, taken_cins)
            name = (
                f"{_FIRST_NAMES[rng.integers(len(_FIRST_NAMES))]} "
                f"{_SURNAMES[rng.integers(len(_SURNAMES))]}"
            )
            dob = config.as_of - timedelta(days=int(rng.integers(20 * 365, 75 * 365)))
            expiry = config.as_of + timedelta(days=int(rng.integers(180, 10 * 365)))
            citizen = CitizenIdentity(
                cin=cin,
                full_name=name,
                date_of_birth=dob,
                reference_template=FaceTemplate.random(rng, config.template_dim),
                cin_expiry=expiry,
            )
            citizens[cin] = citizen

            n_parcels = int(
                rng.integers(config.min_parcels_per_citizen, config.max_parcels_per_citizen + 1)
            )
            region = region_codes[rng.integers(len(region_codes))]
            for _ in range(n_parcels):
                serial += int(rng.integers(1, 50))
                parcel_id = f"TF-{region}-{serial:06d}"
                if ptype == "agricultural":
                    area = float(np.round(rng.uniform(5_000, 200_000), 1))
                elif ptype == "commercial":
                    area = float(np.round(rng.uniform(200, 5_000), 1))
                else:
                    area = float(np.round(rng.uniform(60, 400), 1))
                parcel = Parcel(
                    parcel_id=parcel_id,
                    owner_cin=cin,
                    property_type=ptype,
                    area_m2=area,
                    region=region,
                    locality=_REGIONS[region],
                )
                parcels[parcel_id] = parcel
                for kind in DOCUMENT_KINDS:
                    fields = _document_fields(parcel, citizen, kind, rng, config.as_of)
                    documents[(parcel_id, kind)] = PropertyDocument(
                        parcel_id=parcel_id,
                        kind=kind,
                        fields=fields,
                        integrity_code=field_checksum(fields),
                    )

    return RegistrySnapshot(
        citizens=citizens, parcels=parcels, documents=documents, config=config, seed=seed
    )


def _corrupt_document(doc: PropertyDocument, snapshot: RegistrySnapshot,
                      rng: np.random.Generator, detectability: float,
                      as_of: date) -> PropertyDocument:
    """Forge one coherent defect. Detectable variants trip exactly one check;
    with probability 1 - detectability the forgery is plausible enough to
    pass every rule-based check (the checksum is recomputed)."""
    evaded = rng.random() > detectability
    fields = dict(doc.fields)
    if evaded:
        # subtle free-text tampering the rule validator cannot see
        if doc.kind == "ownership_certificate":
            fields["owner_name"] = fields["owner_name"] + " "
            kind = "field_mismatch"
        else:
            fields["boundary_summary"] = fields["boundary_summary"].replace("polygon", "plot")
            kind = "field_mismatch"
        return replace(
            doc, fields=fields, integrity_code=field_checksum(fields),
            defect=DefectTag(kind, evaded=True),
        )

    kind = DEFECT_KINDS[rng.integers(len(DEFECT_KINDS))]
    if kind == "integrity_code_mismatch":
        code = doc.integrity_code
        flipped = ("0" if code[-1] != "0" else "1") + code[1:][::-1]
        return replace(doc, integrity_code=flipped[: len(code)], defect=DefectTag(kind))
    if kind == "expired_issue_date":
        stale = as_of - timedelta(days=int(rng.integers(10 * 365 + 30, 20 * 365)))
        fields["issue_date"] = stale.isoformat()
        return replace(
            doc, fields=fields, integrity_code=field_checksum(fields), defect=DefectTag(kind)
        )
    # field_mismatch: wrong owner on certificates, missing field on plans
    if doc.kind == "ownership_certificate":
        others = [c for c in snapshot.citizens if c != fields.get("owner_cin")]
        if others:
            fields["owner_cin"] = others[int(rng.integers(len(others)))]
    else:
        fields.pop("boundary_summary", None)
    return replace(
        doc, fields=fields, integrity_code=field_checksum(fields), defect=DefectTag(kind)
    )


def inject_defects(snapshot: RegistrySnapshot, defect_rate: float, seed: int,
                   detectability: float = 0.98) -> RegistrySnapshot:
    """New snapshot with each document independently corrupted at defect_rate.

    Defect tags record ground truth for accuracy scoring. Deterministic
    per seed; rate 0 returns an equal snapshot with no tags.
    """
    if not 0.0 <= defect_rate <= 1.0:
        raise InvalidConfig(f"defect_rate must be in [0, 1], got {defect_rate}")
    if not 0.0 <= detectability <= 1.0:
        raise InvalidConfig(f"detectability must be in [0, 1], got {detectability}")
    rng = np.random.default_rng(seed)
    documents = {}
    for key in sorted(snapshot.documents):
        doc = snapshot.documents[key]
        if rng.random() < defect_rate:
            documents[key] = _corrupt_document(
                doc, snapshot, rng, detectability, snapshot.as_of
            )
        else:
            documents[key] = doc
    return RegistrySnapshot(
        citizens=snapshot.citizens,
        parcels=snapshot.parcels,
        documents=documents,
        config=snapshot.config,
        seed=snapshot.seed,
        defect_rate=defect_rate,
    )
