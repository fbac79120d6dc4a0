"""The thirteen acceptance criteria, one test each.

Every test prints a single PASS/FAIL line. Run this file directly to get
just those lines: ``python3 tests/test_acceptance.py``.
"""

import sys

import pytest

from etalecorr.verify import run_suite

SEED = 0
TOLERANCE = 1e-8
MAX_SIZE = 8

CRITERIA = [
    (1, "conjugacy", "rank K0(C*(group)) equals the conjugacy class count, >= 10 groups"),
    (2, "pair-collapse", "C*(P_n) is one n x n block for n = 2..6"),
    (3, "morita", "Morita bispaces give invertible K0 maps, >= 20 instances"),
    (4, "functoriality", "K0(Lambda o Omega) = K0(Lambda) K0(Omega), >= 50 pairs"),
    (5, "identity", "identity bispaces give identity K0 matrices"),
    (6, "factorization", "both K0 routes agree on every instance"),
    (7, "positivity", "min eigenvalue of <xi, xi> >= -1e-8, 1000 xi on >= 20 instances"),
    (8, "compacts", "compact operators on Ind E match equivariant families, >= 20 instances"),
    (9, "phi-psi", "Phi and Psi are unitary bimodule maps that transport operators"),
    (10, "naturality", "K0 naturality square commutes, >= 20 instances"),
    (11, "cutoff", "cutoffs sum to one exactly; homomorphism cutoff is the unit indicator"),
    (12, "composition", "phi_A is an equivariant iso, the square commutes, rho-bar diagram commutes"),
    (13, "averaging", "averaging reproduces equivariant families exactly, >= 20 instances"),
]


def evaluate(number: int, suite: str, text: str):
    result = run_suite(suite, SEED, TOLERANCE, MAX_SIZE)
    status = "PASS" if result.passed else "FAIL"
    line = (f"{status} criterion {number:2d} [{suite}] {text} "
            f"({len(result.cases)} instances, {len(result.failures)} failures)")
    return result, line


@pytest.mark.parametrize("number,suite,text", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(number, suite, text, capsys):
    result, line = evaluate(number, suite, text)
    with capsys.disabled():
        print("\n" + line)
    assert len(result.cases) >= result.minimum
    assert result.passed, [c.to_dict() for c in result.failures[:3]]


if __name__ == "__main__":
    ok = True
    for criterion in CRITERIA:
        result, line = evaluate(*criterion)
        ok &= result.passed
        print(line)
    sys.exit(0 if ok else 1)
