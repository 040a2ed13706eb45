"""Tests for certificate serialization and independent replay."""
import copy
import json

import pytest

from mtp_prover.core.codec import (
    document_round_trip,
    dumps,
    loads,
    parse_document,
    verify_document,
)
from mtp_prover.core.coeff import format_rational, parse_rational
from mtp_prover.core.prover import ProofEngine
from mtp_prover.core.verifier import verify_certificate
from mtp_prover.parsing.expressions import parse_goal_line
from mtp_prover.utils.error_handling import CertificateError

MUTATIONS_PER_DOCUMENT = 120


def _exact_fields(node, path=()):
    """Paths of exact values whose change must show up in a display string."""
    if isinstance(node, dict):
        for key, value in node.items():
            here = path + (key,)
            if key == "coefficient" or (key in ("lo", "hi") and "lo_open" in node):
                for i in range(len(value)):
                    yield ("rational", here + (i,))
            elif key == "bounds":
                for i in range(len(value)):
                    yield ("direction", here + (i, "direction"))
                    yield ("degree", here + (i, "degree"))
            else:
                yield from _exact_fields(value, here)
    elif isinstance(node, list):
        for i, value in enumerate(node):
            yield from _exact_fields(value, path + (i,))


def _get(data, path):
    for key in path:
        data = data[key]
    return data


def _set(data, path, value):
    _get(data, path[:-1])[path[-1]] = value


def mutate(data, kind, path):
    """A copy of the document with one exact value changed."""
    mutated = copy.deepcopy(data)
    old = _get(mutated, path)
    if kind == "rational":
        _set(mutated, path, format_rational(parse_rational(old) + 1))
    elif kind == "direction":
        _set(mutated, path, "upper" if old == "lower" else "lower")
    else:
        _set(mutated, path, old + 1)
    return json.dumps(mutated)


def first_verdict_node(node):
    if node.get("verdict") and node["verdict"].get("certificate"):
        return node
    for child in node["children"]:
        found = first_verdict_node(child)
        if found is not None:
            return found
    return None


@pytest.fixture(scope="module")
def small_document():
    """A proof with one bound step and one Sturm decision."""
    certificate = ProofEngine().prove(parse_goal_line("sin(t) - t/2 > 0 on (0, 1)"))
    return dumps(certificate)


class TestConjectureCertificates:
    """Test cases for the shipped proofs."""

    def test_squared_certificate_replays(self, squared_certificate):
        """Test the squared-arcsin certificate is accepted."""
        result = verify_certificate(squared_certificate)
        assert result.accepted, result.reasons

    def test_linear_certificate_replays(self, linear_certificate):
        """Test the linear-arcsin certificate is accepted."""
        result = verify_certificate(linear_certificate)
        assert result.accepted, result.reasons

    def test_documents_verify(self, squared_document, linear_document):
        """Test both serialized documents decode and replay."""
        for document in (squared_document, linear_document):
            result = verify_document(document)
            assert result.accepted, result.reasons

    def test_round_trip(self, squared_document):
        """Test re-serialization is the identity on written documents."""
        assert document_round_trip(squared_document) == squared_document

    def test_loads_keeps_statistics(self, linear_certificate, linear_document):
        """Test decoding restores statistics and notes."""
        decoded = loads(linear_document)
        assert decoded.statistics.nodes == linear_certificate.statistics.nodes
        assert decoded.notes == linear_certificate.notes
        assert decoded.goal == linear_certificate.goal


class TestMutations:
    """Test cases for tampered certificates."""

    @pytest.mark.parametrize("fixture_name", ["squared_document", "linear_document"])
    def test_single_value_mutations_rejected(self, fixture_name, request, rng):
        """Test every sampled single-value change is rejected."""
        document = request.getfixturevalue(fixture_name)
        data = json.loads(document)
        candidates = list(_exact_fields(data))
        assert len(candidates) > MUTATIONS_PER_DOCUMENT

        picks = rng.choice(len(candidates), size=MUTATIONS_PER_DOCUMENT, replace=False)
        for index in picks:
            kind, path = candidates[int(index)]
            result = verify_document(mutate(data, kind, path))
            assert not result.accepted, f"{kind} change at {path} was accepted"

    def test_status_change_rejected(self, squared_document):
        """Test a failed status cannot pass as a proof."""
        data = json.loads(squared_document)
        data["status"] = "failed"
        result = verify_document(json.dumps(data))
        assert not result.accepted
        assert "status is failed" in result.reasons[0]

    def test_root_count_rejected(self, small_document):
        """Test a forged Sturm root count fails on replay."""
        data = json.loads(small_document)
        node = first_verdict_node(data["proof"])
        node["verdict"]["certificate"]["root_count"] += 1
        assert not verify_document(json.dumps(data)).accepted

    def test_positivity_poly_rejected(self, small_document):
        """Test a forged decided polynomial fails on replay."""
        data = json.loads(small_document)
        node = first_verdict_node(data["proof"])
        poly = node["verdict"]["certificate"]["poly"]
        poly[0][0] = format_rational(parse_rational(poly[0][0]) - 10)
        assert not verify_document(json.dumps(data)).accepted

    def test_evidence_rejected(self, small_document):
        """Test edited evidence fails on replay."""
        data = json.loads(small_document)
        data["proof"]["evidence"][0] += " (edited)"
        result = verify_document(json.dumps(data))
        assert not result.accepted
        assert any("evidence differs" in reason for reason in result.reasons)

    def test_pruned_tree_rejected(self, small_document):
        """Test removing a subtree leaves an unclosed node."""
        data = json.loads(small_document)
        data["proof"]["children"] = []
        assert not verify_document(json.dumps(data)).accepted

    def test_statistics_rejected(self, small_document):
        """Test node counts must match the tree."""
        data = json.loads(small_document)
        data["statistics"]["nodes"] += 1
        result = verify_document(json.dumps(data))
        assert not result.accepted
        assert result.reasons[0].startswith("statistics:")


class TestDocuments:
    """Test cases for document parsing."""

    def test_not_json(self):
        """Test garbage is rejected at the document level."""
        result = verify_document("not a certificate")
        assert not result.accepted
        assert result.reasons[0].startswith("document:")

    def test_schema_version(self, small_document):
        """Test an unknown schema version is refused."""
        data = json.loads(small_document)
        data["schema_version"] = "0.1"
        with pytest.raises(CertificateError):
            parse_document(json.dumps(data))

    def test_small_document_accepted(self, small_document):
        """Test the small proof verifies."""
        assert verify_document(small_document).accepted
