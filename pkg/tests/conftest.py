"""Shared pytest fixtures for testing."""
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from mtp_prover.core.codec import dumps
from mtp_prover.core.coeff import HALF_PI, PiPoly
from mtp_prover.core.poly import IntervalQPi, Poly, substitute_square
from mtp_prover.core.prover import ProofEngine
from mtp_prover.parsing.expressions import parse_goal
from mtp_prover.parsing.scripts import parse_script

PROOFS_DIR = Path(__file__).resolve().parent.parent / "proofs"


def pi_coefficients(*parts) -> PiPoly:
    """Q[pi] element from rationals ordered by the power of pi."""
    return PiPoly(tuple(Fraction(p) for p in parts))


def even_poly(rows) -> Poly:
    """Polynomial from {power: (c0, c1, c2)} rows; absent powers are zero."""
    top = max(rows)
    return Poly(tuple(pi_coefficients(*rows.get(i, ())) for i in range(top + 1)))


@pytest.fixture(scope="session")
def proofs_dir():
    """Directory with the goal and script files."""
    return PROOFS_DIR


@pytest.fixture(scope="session")
def p10():
    """Normalized polynomial of the squared-arcsin inequality on (0, 11/10]."""
    return even_poly(
        {
            0: (-238151113200, 16629713100, 29768889150),
            2: (326415889800, -32614832250, -40801986225),
            4: (-223372028880, 24692768100, 27921503610),
            6: (103210270800, -12030783492, -12901283850),
            8: (-32212254720, 4026531840, 4026531840),
            10: (8589934592, -1073741824, -1073741824),
        }
    )


@pytest.fixture(scope="session")
def p14():
    """Normalized polynomial of the linear-arcsin inequality on (0, 13/10]."""
    return even_poly(
        {
            0: (-280270311341948928000, 108604745645005209600),
            2: (326982029898940416000, -131515731413434368000),
            4: (-198524461941501696000, 81120783386638195200),
            6: (81238161686899875840, -33492109086208281600),
            8: (-24143557388833935360, 10002584016180806400),
            10: (5469977974061251584, -2272344207942188160),
            12: (-954715629403497528, 397798178918123970),
            14: (136786742224477716, -56994475926865715),
        }
    )


@pytest.fixture(scope="session")
def p5(p10):
    return substitute_square(p10)


@pytest.fixture(scope="session")
def p7(p14):
    return substitute_square(p14)


@pytest.fixture
def unit_interval():
    """(0, 1]"""
    return IntervalQPi(0, 1)


@pytest.fixture
def half_pi_interval():
    """(0, pi/2)"""
    return IntervalQPi(0, HALF_PI, True, True)


@pytest.fixture
def rng():
    """Seeded generator for randomized cases."""
    return np.random.default_rng(20240101)


def _prove_from_files(goal_name: str, script_name: str):
    source = parse_goal((PROOFS_DIR / goal_name).read_text(encoding="utf-8"))
    script = parse_script((PROOFS_DIR / script_name).read_text(encoding="utf-8"))
    return ProofEngine().prove(source.goal, script, source.notes)


@pytest.fixture(scope="session")
def squared_certificate():
    """Certificate of the squared-arcsin inequality, built once per session."""
    return _prove_from_files("conjecture1.goal", "conjecture1.script")


@pytest.fixture(scope="session")
def linear_certificate():
    """Certificate of the linear-arcsin inequality, built once per session."""
    return _prove_from_files("conjecture2.goal", "conjecture2.script")


@pytest.fixture(scope="session")
def squared_document(squared_certificate):
    return dumps(squared_certificate)


@pytest.fixture(scope="session")
def linear_document(linear_certificate):
    return dumps(linear_certificate)
