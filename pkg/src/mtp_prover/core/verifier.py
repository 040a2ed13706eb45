"""Independent replay of proof certificates."""

import logging
from dataclasses import dataclass, field
from typing import List

from ..utils.error_handling import ProverException
from .poly import check_positivity_certificate
from .prover import STATUS_PROVED, Certificate, ProofNode, Statistics
from .steps import execute_step, side_condition_goal

logger = logging.getLogger(__name__)


@dataclass
class VerificationResult:
    accepted: bool = True
    reasons: List[str] = field(default_factory=list)

    def reject(self, path: str, reason: str):
        self.accepted = False
        self.reasons.append(f"{path}: {reason}")


def _same_positivity(recorded, replayed) -> bool:
    return (
        recorded.poly == replayed.poly
        and recorded.interval == replayed.interval
        and recorded.root_count == replayed.root_count
        and recorded.sample == replayed.sample
        and recorded.sample_sign == replayed.sample_sign
        and recorded.endpoint_signs == replayed.endpoint_signs
        and recorded.chain_length == replayed.chain_length
    )


class CertificateVerifier:
    """
    Re-executes every recorded step with the kernel and compares.

    No search happens here: each node's step is applied to the node's goal and
    the outcome must reproduce the recorded evidence, child goals, side
    conditions and verdict exactly.
    """

    def verify(self, certificate: Certificate) -> VerificationResult:
        result = VerificationResult()
        if certificate.status != STATUS_PROVED:
            result.reject("certificate", f"status is {certificate.status}")
            return result
        if certificate.root is None:
            result.reject("certificate", "no proof tree")
            return result
        if certificate.root.goal != certificate.goal:
            result.reject("root", "goal differs from the certificate goal")

        self._check(certificate.root, "root", result)

        recount = Statistics.of(certificate.root, 0, 0)
        stats = certificate.statistics
        if (recount.nodes, recount.sturm_decisions, recount.side_conditions) != (
            stats.nodes,
            stats.sturm_decisions,
            stats.side_conditions,
        ):
            result.reject("statistics", "node, decision or side-condition counts do not match the tree")

        if result.accepted:
            logger.info(f"Certificate for {certificate.goal} accepted ({recount.nodes} nodes)")
        else:
            logger.warning(f"Certificate rejected: {result.reasons[0]}")
        return result

    def _check(self, node: ProofNode, path: str, result: VerificationResult):
        if node.step is None:
            result.reject(path, f"open goal {node.goal}")
            return
        try:
            outcome = execute_step(node.goal, node.step)
        except ProverException as error:
            result.reject(path, f"{node.step.command} fails on replay: {error.message}")
            return

        if tuple(node.evidence) != tuple(outcome.evidence):
            result.reject(path, "evidence differs")
        if tuple(child.goal for child in node.children) != tuple(outcome.children):
            result.reject(path, f"child goals of {node.step.command} differ")

        if len(node.side_conditions) != len(outcome.side_conditions):
            result.reject(path, "side condition count differs")
        for i, (recorded, replayed) in enumerate(zip(node.side_conditions, outcome.side_conditions)):
            where = f"{path}.side[{i}]"
            if recorded.condition != replayed:
                result.reject(where, "side condition differs")
                continue
            if replayed.discharged:
                continue
            if recorded.proof is None:
                result.reject(where, f"undischarged side condition {replayed.description}")
                continue
            if recorded.proof.goal != side_condition_goal(replayed):
                result.reject(where, "side condition proof has the wrong goal")
                continue
            self._check(recorded.proof, where, result)

        self._check_verdict(node, outcome.verdict, path, result)
        for i, child in enumerate(node.children):
            self._check(child, f"{path}.{i}", result)

    def _check_verdict(self, node: ProofNode, replayed, path: str, result: VerificationResult):
        recorded = node.verdict
        if recorded is None and replayed is None:
            if not node.children:
                result.reject(path, "leaf without verdict")
            return
        if recorded is None or replayed is None:
            result.reject(path, "verdict presence differs")
            return
        if node.children:
            result.reject(path, "closed goal has children")
        if recorded.kind != replayed.kind or recorded.pattern != replayed.pattern:
            result.reject(path, f"verdict {recorded.kind} differs from replay {replayed.kind}")
            return
        if recorded.kind == "positive":
            if recorded.certificate is None or not _same_positivity(recorded.certificate, replayed.certificate):
                result.reject(path, "positivity certificate differs")
            elif not check_positivity_certificate(recorded.certificate):
                result.reject(path, "positivity certificate does not check")


def verify_certificate(certificate: Certificate) -> VerificationResult:
    """
    Accept or reject a certificate by replaying it.

    Any exception during replay counts as a rejection.
    """
    try:
        return CertificateVerifier().verify(certificate)
    except Exception as error:
        logger.warning(f"Certificate replay raised {type(error).__name__}: {error}")
        result = VerificationResult()
        result.reject("certificate", f"replay raised {type(error).__name__}: {error}")
        return result
