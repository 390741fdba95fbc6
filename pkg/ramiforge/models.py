"""
Ramiforge - Pydantic Models
Cover files, requests, predictions, recipes, oracle reports, verdicts and CLI reports.
"""

from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    field_validator,
    model_validator,
)
from sympy import isprime

SCHEMA_VERSION = "1"


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(str(value).strip())
    raise ValueError(f"expected a rational 'n/d', got {value!r}")


Rational = Annotated[
    Fraction,
    BeforeValidator(_to_fraction),
    PlainSerializer(lambda x: str(x), return_type=str),
]


# ============================================
# Verdict Types
# ============================================

PrimeVerdict = Literal["Good", "Bad"]
RamVerdict = Literal["Ramified", "Unramified"]
Confidence = Literal["Exact", "Inconclusive"]
PredictionOutcome = Literal["prediction", "no_meeting", "undecidable"]
WitnessOutcome = Literal["witness", "never_ramifies", "undecidable"]
CertificateStatus = Literal["Certified", "Inconclusive"]
DivisorStatus = Literal["divisor", "non_divisor", "undetermined"]
Hypothesis = Literal["BPH", "IH"]


# ============================================
# Cover File Models
# ============================================

class ClassSpec(BaseModel):
    """A labelled conjugacy class of an abstract group."""
    model_config = ConfigDict(extra="forbid")

    label: str
    order: int = Field(ge=1)


class GroupSpec(BaseModel):
    """
    Monodromy group of a cover file: 1-based generator cycles on ``degree``
    points, or an abstract group given by its order and labelled classes.
    """
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    degree: Optional[int] = Field(default=None, ge=1)
    generators: Optional[List[List[List[int]]]] = None
    order: Optional[int] = Field(default=None, ge=1)
    order_factorization: Optional[Dict[int, int]] = None
    classes: Optional[List[ClassSpec]] = None
    classes_complete: bool = False

    @field_validator("order_factorization")
    @classmethod
    def check_factorization(cls, value: Optional[Dict[int, int]]) -> Optional[Dict[int, int]]:
        for prime, exponent in (value or {}).items():
            if not isprime(prime):
                raise ValueError(f"{prime} is not a prime")
            if exponent < 0:
                raise ValueError(f"negative exponent for {prime}")
        return value

    @model_validator(mode="after")
    def check_kind(self) -> "GroupSpec":
        if self.generators is not None:
            if self.degree is None:
                raise ValueError("permutation group needs a positive degree")
        elif self.classes is not None:
            if self.order is None and self.order_factorization is None:
                raise ValueError("abstract group needs 'order' or 'order_factorization'")
        else:
            raise ValueError("group needs either generators or a class list")
        return self

    @property
    def group_order(self) -> int:
        if self.order is not None:
            return self.order
        order = 1
        for prime, exponent in self.order_factorization.items():
            order *= prime ** exponent
        return order


class OrbitSpec(BaseModel):
    """
    One branch-point orbit: a minimal polynomial in T (text or coefficients,
    leading term first; "0" and "inf" for the special points) and its inertia class.
    """
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    minpoly: Union[str, List[Union[int, str]]]
    class_label: str = Field(alias="class")
    irreducible: Literal["verify", "assert"] = "verify"


class TermsSpec(BaseModel):
    """P(T, X) as [x_exp, t_exp, coeff] triples."""
    model_config = ConfigDict(extra="forbid")

    terms: List[Tuple[int, int, Rational]] = Field(min_length=1)


class CoverFile(BaseModel):
    """Parsed JSON cover description."""
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    group: GroupSpec
    orbits: List[OrbitSpec] = Field(min_length=1)
    defining_poly: Optional[Union[str, TermsSpec]] = None
    vertical_ram_primes: List[int] = []
    centerless: bool = False
    notes: List[str] = []

    @field_validator("vertical_ram_primes")
    @classmethod
    def check_primes(cls, value: List[int]) -> List[int]:
        for p in value:
            if not isprime(p):
                raise ValueError(f"{p} is not a prime")
        return value


# ============================================
# Prime Classification
# ============================================

class PrimeClassification(BaseModel):
    """Good/Bad verdict for one prime and the reasons it is bad."""
    p: int
    verdict: PrimeVerdict
    reasons: List[str] = []

    @property
    def good(self) -> bool:
        return self.verdict == "Good"


class DivisorRow(BaseModel):
    """Whether p is a prime divisor of the branch-locus polynomials."""
    p: int
    status: DivisorStatus
    reason: Optional[str] = None


# ============================================
# Prescription Models
# ============================================

class RamifiedEntry(BaseModel):
    """Prescribe intersection multiplicity a with orbit i at p."""
    p: int
    orbit_index: int = Field(ge=0)
    exponent: int = Field(ge=1)


class FrobeniusEntry(BaseModel):
    """Prescribe an unramified p with Frobenius in the given class."""
    p: int
    class_label: str


class PrescriptionRequest(BaseModel):
    """Ramified and unramified-with-Frobenius requirements at distinct primes."""
    ramified: List[RamifiedEntry] = []
    unramified_frobenius: List[FrobeniusEntry] = []

    @model_validator(mode="after")
    def check_primes(self) -> "PrescriptionRequest":
        primes = [e.p for e in self.ramified] + [e.p for e in self.unramified_frobenius]
        if not primes:
            raise ValueError("request has no entries")
        for p in primes:
            if not isprime(p):
                raise ValueError(f"{p} is not a prime")
        duplicates = sorted({p for p in primes if primes.count(p) > 1})
        if duplicates:
            raise ValueError(f"duplicate primes in request: {duplicates}")
        return self

    @property
    def primes(self) -> List[int]:
        return [e.p for e in self.ramified] + [e.p for e in self.unramified_frobenius]


class InertiaPrediction(BaseModel):
    """Predicted inertia at p: the class of C^a and its order."""
    p: int
    class_label: str
    ram_index: int = Field(ge=1)
    verdict: RamVerdict
    cycle_type: Optional[str] = None
    orbit_index: Optional[int] = None
    exponent: Optional[int] = None
    frobenius_class: Optional[str] = None

    @model_validator(mode="after")
    def check_verdict(self) -> "InertiaPrediction":
        if (self.verdict == "Unramified") != (self.ram_index == 1):
            raise ValueError("verdict Unramified must coincide with ramification index 1")
        return self


class PredictionResult(BaseModel):
    """Outcome of predicting inertia at one (point, prime)."""
    p: int
    t0: str
    outcome: PredictionOutcome
    prediction: Optional[InertiaPrediction] = None
    orbit_index: Optional[int] = None
    intersection_multiplicity: Optional[int] = None
    reason: Optional[str] = None

    @property
    def verdict(self) -> Optional[str]:
        if self.outcome == "no_meeting":
            return "Unramified"
        if self.outcome == "prediction":
            return self.prediction.verdict
        return None


class Recipe(BaseModel):
    """Specialization points t0 = theta + u·modulus with prescribed inertia."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    cover: str
    theta: Rational
    modulus: int = Field(ge=1)
    u_constraints: Dict[int, int] = {}
    predictions: List[InertiaPrediction]
    excluded_points: List[str] = []
    forces_full_group: Optional[bool] = None
    annotations: List[str] = []
    caveats: List[str] = []

    @field_validator("u_constraints", mode="before")
    @classmethod
    def int_keys(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {int(k): int(v) for k, v in value.items()}
        return value

    def point(self, u: int) -> Fraction:
        return self.theta + u * self.modulus


# ============================================
# Oracle Models
# ============================================

class Segment(BaseModel):
    """A p-adic factor with ramification index e and residue degree f."""
    e: int = Field(ge=1)
    f: int = Field(ge=1)


class RamReport(BaseModel):
    """Local splitting data of a specialized polynomial at p."""
    p: int
    degree: int
    segments: List[Segment] = []
    inertia_cycle_type: Optional[str] = None
    e_total: Optional[int] = None
    verdict: Optional[RamVerdict] = None
    confidence: Confidence = "Exact"
    note: Optional[str] = None

    @property
    def exact(self) -> bool:
        return self.confidence == "Exact"


class VerificationRow(BaseModel):
    """One (point, prime) comparison of prediction against oracle."""
    t0: str
    p: int
    predicted: str
    observed: str
    match: Optional[bool] = None
    note: Optional[str] = None


class VerificationTable(BaseModel):
    """Oracle verification of a recipe."""
    cover: str
    rows: List[VerificationRow] = []
    matched: int = 0
    mismatched: int = 0
    inconclusive: int = 0

    @property
    def all_match(self) -> bool:
        return self.mismatched == 0


# ============================================
# Witness and Certification Models
# ============================================

class WitnessResult(BaseModel):
    """A point whose specialization ramifies at p, or why none is produced."""
    p: int
    outcome: WitnessOutcome
    t0: Optional[str] = None
    prediction: Optional[InertiaPrediction] = None
    reason: Optional[str] = None


class GroupCertificate(BaseModel):
    """Frobenius-sampling certificate that a specialization has the full group."""
    t0: str
    group: str
    status: CertificateStatus
    witnessed_classes: List[str] = []
    patterns: Dict[str, List[int]] = {}
    primes_sampled: int = 0
    g_complete: Optional[bool] = None
    reason: Optional[str] = None


# ============================================
# Parametricity Models
# ============================================

class ParametricityVerdict(BaseModel):
    """Branch Point or Inertia Hypothesis verdict for a pair of covers."""
    hypothesis: Hypothesis
    holds: bool
    exact: bool
    witnesses: List[str] = []
    consequence: str = ""
    evidence: Dict[str, Any] = {}
    caveats: List[str] = []


class CorollaryVerdict(BaseModel):
    """Result of a single-cover criterion."""
    check: str
    holds: bool
    witness: Optional[str] = None
    detail: str = ""


# ============================================
# Report Models
# ============================================

class Report(BaseModel):
    """Machine-readable result of one CLI command."""
    schema_version: str = SCHEMA_VERSION
    command: List[str]
    input_digests: Dict[str, str] = {}
    result: Any = None
    table: List[Dict[str, Any]] = []
    caveats: List[str] = []


class Diagnostic(BaseModel):
    """Structured error emitted instead of a report."""
    success: bool = False
    error: str
    detail: Optional[str] = None
    exit_code: int = 2
