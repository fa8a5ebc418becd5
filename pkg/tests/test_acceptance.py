"""The acceptance gate: one test per criterion, each at its stated tolerance.

The computational criteria run once through ``gradest.acceptance.run_all``
(shared module fixture) and each test asserts its criterion, printing the
pass/fail line.  Criterion 10 runs the CLI selftest twice and compares the
report files byte for byte.
"""

import subprocess
import sys

import pytest

from gradest import acceptance


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in acceptance.run_all()}


def _assert_criterion(results, number):
    res = results[number]
    print(res.line())
    detail = "\n".join(res.details)
    assert res.passed, f"criterion {number} failed:\n{detail}"


def test_criterion_1_generator_matches_closed_theta_family(results):
    _assert_criterion(results, 1)


def test_criterion_2_classical_pairs_recovered_from_coefficients(results):
    _assert_criterion(results, 2)


def test_criterion_3_balance_residual_and_ode_agreement(results):
    _assert_criterion(results, 3)


def test_criterion_4_hypothesis_suites(results):
    _assert_criterion(results, 4)


def test_criterion_5_hyperbolic_asymptotics(results):
    _assert_criterion(results, 5)


def test_criterion_6_sharpness_dichotomy(results):
    _assert_criterion(results, 6)


def test_criterion_7_inequality_on_exact_data(results):
    _assert_criterion(results, 7)


def test_criterion_8_consistency_relations(results):
    _assert_criterion(results, 8)


def test_criterion_9_solver_fidelity(results):
    _assert_criterion(results, 9)


def test_criterion_10_selftest_reports_are_byte_identical(tmp_path):
    reports = [tmp_path / "r1.json", tmp_path / "r2.json"]
    procs = [subprocess.Popen(
        [sys.executable, "-m", "gradest.cli", "selftest", "--report", str(p)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE) for p in reports]
    codes = [p.wait(timeout=900) for p in procs]
    assert all(c in (0, 2) for c in codes), codes
    b1, b2 = reports[0].read_bytes(), reports[1].read_bytes()
    assert b1, "selftest wrote an empty report"
    assert b1 == b2
    print("PASS criterion 10: two selftest runs produced byte-identical reports")
