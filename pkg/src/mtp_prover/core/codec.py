"""Conversion between certificates and their pydantic documents."""

import logging
from typing import List

from pydantic import ValidationError

from ..models import (
    SCHEMA_VERSION,
    AtomRecord,
    BoundRecord,
    CertificateDocument,
    CounterexampleRecord,
    ExprRecord,
    FailureRecord,
    FourierComponentRecord,
    GoalRecord,
    IntervalRecord,
    PositivityRecord,
    ProofNodeRecord,
    SideConditionRecord,
    StatisticsRecord,
    StepRecord,
    TermRecord,
    VerdictRecord,
)
from ..services.numeric import Counterexample
from ..utils.error_handling import CertificateError, ProverException
from .bounds import BoundSpec
from .coeff import PiPoly, format_rational, parse_rational
from .mtp import Atom, FourierForm, Monomial, MTPExpr, SideCondition
from .poly import IntervalQPi, PositivityCertificate, Poly
from .prover import Certificate, Failure, ProofNode, SideConditionProof, Statistics
from .steps import Goal, GoalExpr, ProofStep, StepKind, Verdict
from .verifier import VerificationResult, verify_certificate

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def encode_interval(interval: IntervalQPi) -> IntervalRecord:
    return IntervalRecord(
        lo=interval.lo.to_strings(),
        hi=interval.hi.to_strings(),
        lo_open=interval.lo_open,
        hi_open=interval.hi_open,
        display=str(interval),
    )


def _encode_components(parts) -> List[FourierComponentRecord]:
    return [FourierComponentRecord(k=k, poly=p.to_strings()) for k, p in parts]


def encode_expr(expr: GoalExpr, variable: str) -> ExprRecord:
    if isinstance(expr, MTPExpr):
        terms = [
            TermRecord(
                coefficient=coefficient.to_strings(),
                var_power=monomial.var_power,
                pi_power=monomial.pi_power,
                atoms=[
                    AtomRecord(func=atom.func, mult=atom.mult, inner=atom.inner, exponent=exponent)
                    for atom, exponent in monomial.atoms
                ],
            )
            for monomial, coefficient in expr.terms
        ]
        return ExprRecord(kind="mtp", variable=expr.variable, display=expr.render(), terms=terms)
    if isinstance(expr, FourierForm):
        return ExprRecord(
            kind="fourier",
            variable=expr.variable,
            display=expr.render(),
            constant=expr.constant.to_strings(),
            cos=_encode_components(expr.cos),
            sin=_encode_components(expr.sin),
        )
    return ExprRecord(kind="poly", variable=variable, display=expr.render(variable), poly=expr.to_strings())


def encode_goal(goal: Goal) -> GoalRecord:
    return GoalRecord(
        expr=encode_expr(goal.expr, goal.variable),
        interval=encode_interval(goal.interval),
        variable=goal.variable,
        strict=goal.strict,
        display=str(goal),
    )


def encode_step(step: ProofStep) -> StepRecord:
    return StepRecord(
        kind=step.kind.value,
        command=step.command,
        label=step.label,
        line=step.line,
        point=None if step.point is None else step.point.to_strings(),
        multiplier=None if step.multiplier is None else encode_expr(step.multiplier, step.multiplier.variable),
        bounds=[
            BoundRecord(function=b.function, direction=b.direction, degree=b.degree, selector=b.selector)
            for b in step.bounds
        ],
    )


def encode_verdict(verdict: Verdict) -> VerdictRecord:
    record = None
    if verdict.certificate is not None:
        c = verdict.certificate
        record = PositivityRecord(
            poly=c.poly.to_strings(),
            interval=encode_interval(c.interval),
            root_count=c.root_count,
            sample=format_rational(c.sample),
            sample_sign=c.sample_sign,
            endpoint_signs=dict(c.endpoint_signs),
            chain_length=c.chain_length,
            digits=c.digits,
        )
    return VerdictRecord(kind=verdict.kind, pattern=verdict.pattern, certificate=record)


def encode_side_condition(proof: SideConditionProof) -> SideConditionRecord:
    condition = proof.condition
    return SideConditionRecord(
        description=condition.description,
        expr=encode_expr(condition.expr, condition.expr.variable),
        interval=encode_interval(condition.interval),
        pattern=condition.pattern,
        stripped=encode_expr(condition.stripped, condition.stripped.variable),
        goal_expr=encode_expr(condition.goal_expr, condition.goal_expr.variable),
        proof=None if proof.proof is None else encode_node(proof.proof),
    )


def encode_node(node: ProofNode) -> ProofNodeRecord:
    return ProofNodeRecord(
        goal=encode_goal(node.goal),
        step=None if node.step is None else encode_step(node.step),
        evidence=list(node.evidence),
        side_conditions=[encode_side_condition(sc) for sc in node.side_conditions],
        children=[encode_node(child) for child in node.children],
        verdict=None if node.verdict is None else encode_verdict(node.verdict),
    )


def encode_certificate(certificate: Certificate) -> CertificateDocument:
    """Build the document of a certificate."""
    failure = None
    if certificate.failure is not None:
        f = certificate.failure
        failure = FailureRecord(
            message=f.message,
            error_code=f.error_code,
            goal=f.goal,
            step=f.step,
            line=f.line,
            witness=f.witness,
            details={str(k): str(v) for k, v in f.details.items()},
        )
    counterexample = None
    if certificate.counterexample is not None:
        counterexample = CounterexampleRecord(
            point=certificate.counterexample.point, value=certificate.counterexample.value
        )
    stats = certificate.statistics
    return CertificateDocument(
        schema_version=SCHEMA_VERSION,
        status=certificate.status,
        goal=encode_goal(certificate.goal),
        notes=list(certificate.notes),
        statistics=StatisticsRecord(
            nodes=stats.nodes,
            sturm_decisions=stats.sturm_decisions,
            side_conditions=stats.side_conditions,
            max_digits=stats.max_digits,
            precision_cap=stats.precision_cap,
        ),
        proof=None if certificate.root is None else encode_node(certificate.root),
        failure=failure,
        counterexample=counterexample,
    )


def dumps(certificate: Certificate) -> str:
    """Certificate as schema-versioned JSON text."""
    return encode_certificate(certificate).model_dump_json(indent=2)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

class _Decoder:
    """Rebuilds kernel objects; collects display strings that do not re-render."""

    def __init__(self):
        self.mismatches: List[str] = []

    def _display(self, what: str, recorded: str, rendered: str):
        if recorded != rendered:
            self.mismatches.append(f"{what}: recorded {recorded!r}, rendered {rendered!r}")

    @staticmethod
    def pipoly(values: List[str]) -> PiPoly:
        return PiPoly.from_strings(values)

    def poly(self, values: List[List[str]]) -> Poly:
        return Poly(tuple(self.pipoly(c) for c in values))

    def interval(self, record: IntervalRecord) -> IntervalQPi:
        interval = IntervalQPi(self.pipoly(record.lo), self.pipoly(record.hi), record.lo_open, record.hi_open)
        self._display("interval", record.display, str(interval))
        return interval

    def expr(self, record: ExprRecord) -> GoalExpr:
        if record.kind == "mtp":
            terms = []
            for term in record.terms or []:
                atoms = tuple((Atom(a.func, a.mult, a.inner), a.exponent) for a in term.atoms)
                monomial = Monomial(term.var_power, atoms, term.pi_power)
                terms.append((monomial, self.pipoly(term.coefficient)))
            expr = MTPExpr(tuple(terms), record.variable)
            self._display("expression", record.display, expr.render())
            return expr
        if record.kind == "fourier":
            expr = FourierForm(
                constant=self.poly(record.constant or []),
                cos=tuple((c.k, self.poly(c.poly)) for c in record.cos or []),
                sin=tuple((c.k, self.poly(c.poly)) for c in record.sin or []),
                variable=record.variable,
            )
            self._display("expression", record.display, expr.render())
            return expr
        expr = self.poly(record.poly or [])
        self._display("expression", record.display, expr.render(record.variable))
        return expr

    def goal(self, record: GoalRecord) -> Goal:
        goal = Goal(self.expr(record.expr), self.interval(record.interval), record.variable, record.strict)
        self._display("goal", record.display, str(goal))
        return goal

    def step(self, record: StepRecord) -> ProofStep:
        step = ProofStep(
            kind=StepKind(record.kind),
            point=None if record.point is None else self.pipoly(record.point),
            multiplier=None if record.multiplier is None else self.expr(record.multiplier),
            bounds=tuple(BoundSpec(b.function, b.direction, b.degree, b.selector) for b in record.bounds),
            label=record.label,
            line=record.line,
        )
        self._display("step", record.command, step.command)
        return step

    def verdict(self, record: VerdictRecord) -> Verdict:
        certificate = None
        if record.certificate is not None:
            c = record.certificate
            certificate = PositivityCertificate(
                poly=self.poly(c.poly),
                interval=self.interval(c.interval),
                root_count=c.root_count,
                sample=parse_rational(c.sample),
                sample_sign=c.sample_sign,
                endpoint_signs=dict(c.endpoint_signs),
                chain_length=c.chain_length,
                digits=c.digits,
            )
        return Verdict(kind=record.kind, certificate=certificate, pattern=record.pattern)

    def side_condition(self, record: SideConditionRecord) -> SideConditionProof:
        condition = SideCondition(
            description=record.description,
            expr=self.expr(record.expr),
            interval=self.interval(record.interval),
            pattern=record.pattern,
            stripped=self.expr(record.stripped),
            goal_expr=self.expr(record.goal_expr),
        )
        proof = None if record.proof is None else self.node(record.proof)
        return SideConditionProof(condition, proof)

    def node(self, record: ProofNodeRecord) -> ProofNode:
        return ProofNode(
            goal=self.goal(record.goal),
            step=None if record.step is None else self.step(record.step),
            evidence=tuple(record.evidence),
            side_conditions=[self.side_condition(sc) for sc in record.side_conditions],
            children=[self.node(child) for child in record.children],
            verdict=None if record.verdict is None else self.verdict(record.verdict),
        )

    def certificate(self, document: CertificateDocument) -> Certificate:
        failure = None
        if document.failure is not None:
            f = document.failure
            failure = Failure(f.message, f.error_code, f.goal, f.step, f.line, f.witness, dict(f.details))
        counterexample = None
        if document.counterexample is not None:
            counterexample = Counterexample(document.counterexample.point, document.counterexample.value)
        s = document.statistics
        return Certificate(
            goal=self.goal(document.goal),
            root=None if document.proof is None else self.node(document.proof),
            status=document.status,
            notes=list(document.notes),
            statistics=Statistics(s.nodes, s.sturm_decisions, s.side_conditions, s.max_digits, s.precision_cap),
            failure=failure,
            counterexample=counterexample,
        )


def parse_document(text: str) -> CertificateDocument:
    try:
        document = CertificateDocument.model_validate_json(text)
    except ValidationError as e:
        raise CertificateError(f"malformed certificate document: {e.error_count()} validation errors")
    if document.schema_version != SCHEMA_VERSION:
        raise CertificateError(
            f"unsupported schema version {document.schema_version}",
            details={"expected": SCHEMA_VERSION},
        )
    return document


def decode_certificate(document: CertificateDocument) -> Certificate:
    """
    Rebuild a certificate from its document.

    Raises:
        CertificateError: values that do not form kernel objects
    """
    try:
        return _Decoder().certificate(document)
    except (ProverException, ValueError, ZeroDivisionError) as e:
        raise CertificateError(f"certificate does not decode: {e}")


def loads(text: str) -> Certificate:
    return decode_certificate(parse_document(text))


def verify_document(text: str) -> VerificationResult:
    """
    Decode and replay a certificate document.

    Display strings must re-render from the exact values, and the certificate
    must then pass ``verify_certificate``.
    """
    result = VerificationResult()
    decoder = _Decoder()
    try:
        certificate = decoder.certificate(parse_document(text))
    except CertificateError as e:
        result.reject("document", e.message)
        return result
    except (ProverException, ValueError, ZeroDivisionError) as e:
        result.reject("document", f"certificate does not decode: {e}")
        return result

    for mismatch in decoder.mismatches:
        result.reject("display", mismatch)
    if not result.accepted:
        return result
    replay = verify_certificate(certificate)
    if not replay.accepted:
        result.accepted = False
        result.reasons.extend(replay.reasons)
    return result


def document_round_trip(text: str) -> str:
    """Re-serialize a document; equal to the input for documents this module wrote."""
    return parse_document(text).model_dump_json(indent=2)
