"""Certificate document models.

Exact values are strings: rationals as ``n/d`` (``n`` when integral), Q[pi]
elements as arrays of rationals indexed by the power of pi, polynomials as
arrays of Q[pi] elements indexed by the power of the variable.
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = "1.0"

PiPolyStrings = List[str]
PolyStrings = List[PiPolyStrings]


class IntervalRecord(BaseModel):
    """Interval with Q[pi] endpoints."""

    lo: PiPolyStrings
    hi: PiPolyStrings
    lo_open: bool
    hi_open: bool
    display: str


class AtomRecord(BaseModel):
    """An atom raised to an integer exponent inside a term."""

    func: Literal["sin", "cos", "atan", "asin"]
    mult: int = Field(1, ge=1)
    inner: Literal["var", "sin", "cos"] = "var"
    exponent: int


class TermRecord(BaseModel):
    coefficient: PiPolyStrings
    var_power: int = 0
    pi_power: int = 0
    atoms: List[AtomRecord] = Field(default_factory=list)


class FourierComponentRecord(BaseModel):
    k: int = Field(..., ge=1)
    poly: PolyStrings


class ExprRecord(BaseModel):
    """A goal expression: MTP terms, a Fourier form or a polynomial."""

    kind: Literal["mtp", "fourier", "poly"]
    variable: str
    display: str
    terms: Optional[List[TermRecord]] = None
    constant: Optional[PolyStrings] = None
    cos: Optional[List[FourierComponentRecord]] = None
    sin: Optional[List[FourierComponentRecord]] = None
    poly: Optional[PolyStrings] = None


class GoalRecord(BaseModel):
    expr: ExprRecord
    interval: IntervalRecord
    variable: str
    strict: bool = True
    display: str


class BoundRecord(BaseModel):
    function: str
    direction: Literal["lower", "upper"]
    degree: int = Field(..., ge=0)
    selector: str


class StepRecord(BaseModel):
    """A proof step and where it came from in the script."""

    kind: str
    command: str
    label: str = ""
    line: int = 0
    point: Optional[PiPolyStrings] = None
    multiplier: Optional[ExprRecord] = None
    bounds: List[BoundRecord] = Field(default_factory=list)


class PositivityRecord(BaseModel):
    """Kernel verdict for a polynomial leaf."""

    poly: PolyStrings
    interval: IntervalRecord
    root_count: int
    sample: str
    sample_sign: int
    endpoint_signs: Dict[str, int] = Field(default_factory=dict)
    chain_length: int
    digits: int


class VerdictRecord(BaseModel):
    kind: Literal["positive", "zero", "pattern"]
    pattern: Optional[str] = None
    certificate: Optional[PositivityRecord] = None


class SideConditionRecord(BaseModel):
    description: str
    expr: ExprRecord
    interval: IntervalRecord
    pattern: Optional[str] = None
    stripped: ExprRecord
    goal_expr: ExprRecord
    proof: Optional["ProofNodeRecord"] = None


class ProofNodeRecord(BaseModel):
    goal: GoalRecord
    step: Optional[StepRecord] = None
    evidence: List[str] = Field(default_factory=list)
    side_conditions: List[SideConditionRecord] = Field(default_factory=list)
    children: List["ProofNodeRecord"] = Field(default_factory=list)
    verdict: Optional[VerdictRecord] = None


SideConditionRecord.model_rebuild()
ProofNodeRecord.model_rebuild()


class FailureRecord(BaseModel):
    message: str
    error_code: str
    goal: str
    step: Optional[str] = None
    line: Optional[int] = None
    witness: Optional[str] = None
    details: Dict[str, str] = Field(default_factory=dict)


class CounterexampleRecord(BaseModel):
    point: str
    value: str


class StatisticsRecord(BaseModel):
    nodes: int = 0
    sturm_decisions: int = 0
    side_conditions: int = 0
    max_digits: int = 0
    precision_cap: int = 0


class CertificateDocument(BaseModel):
    """Top-level certificate document."""

    schema_version: str = SCHEMA_VERSION
    status: Literal["proved", "failed", "disproved"]
    goal: GoalRecord
    notes: List[str] = Field(default_factory=list)
    statistics: StatisticsRecord = Field(default_factory=StatisticsRecord)
    proof: Optional[ProofNodeRecord] = None
    failure: Optional[FailureRecord] = None
    counterexample: Optional[CounterexampleRecord] = None
