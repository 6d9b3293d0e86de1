"""Optimal testers, Born values, feasibility reports, and the dual family."""

from fractions import Fraction
from math import comb

import numpy as np
import pytest

from anomalyid.certification import (
    CertifyReport,
    _certify_dense,
    _certify_factorized,
    born_probability_reduced,
    certify_report,
    completeness_residual,
    dual_certificate,
    dual_gap_report,
    min_tester_eigenvalue,
    n_independence_check,
    optimal_testers,
    success_probability_born,
    success_probability_formula,
    zero_error_residual,
)
from anomalyid.operators import DimensionCapError, SubsystemLayout, kron_all
from anomalyid.twirl import AnomalyPattern, all_hypotheses, all_patterns, projectors


# -- optimal testers -----------------------------------------------------------

def test_testers_n1():
    testers = optimal_testers(1, 1, 2)
    pi0, pi1 = projectors(2)
    (t1,) = testers.elements.values()
    assert np.abs(t1 - pi1 / 2).max() < 1e-14
    assert np.abs(testers.inconclusive - pi0 / 2).max() < 1e-14


def test_testers_orthogonal_supports():
    testers = optimal_testers(3, 1, 2)
    mats = list(testers.elements.values())
    assert len(mats) == 3
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.abs(mats[i] @ mats[j]).max() < 1e-12


def test_testers_completeness_n4k2():
    testers = optimal_testers(4, 2, 2)
    assert len(testers.elements) == 6
    total = sum(testers.elements.values()) + testers.inconclusive
    assert np.abs(total - np.eye(256) / 16).max() < 1e-12
    assert completeness_residual(testers) < 1e-12


# -- zero error ------------------------------------------------------------------

def test_zero_error_small():
    testers = optimal_testers(2, 1, 2)
    hyps = all_hypotheses(2, 1, 2)
    assert zero_error_residual(testers, hyps) <= 1e-12


def test_zero_error_n4k2():
    testers = optimal_testers(4, 2, 2)
    hyps = all_hypotheses(4, 2, 2)
    assert zero_error_residual(testers, hyps) <= 1e-10


def test_zero_error_detects_perturbation():
    n, k, d = 2, 1, 2
    testers = optimal_testers(n, k, d)
    hyps = all_hypotheses(n, k, d)
    pi0, _ = projectors(d)
    bump = 1e-3 * kron_all([pi0] * n)
    for r in testers.elements:
        testers.elements[r] = testers.elements[r] + bump
    assert zero_error_residual(testers, hyps) > 1e-6


# -- Born values -------------------------------------------------------------------

def test_born_examples():
    testers = optimal_testers(1, 1, 2)
    hyps = all_hypotheses(1, 1, 2)
    assert success_probability_born(testers, hyps) == pytest.approx(0.75, abs=1e-12)

    testers = optimal_testers(4, 2, 2)
    hyps = all_hypotheses(4, 2, 2)
    assert success_probability_born(testers, hyps) == pytest.approx(5 / 8, abs=1e-12)


def test_born_n5_k2_d3_through_factorized_report():
    report = certify_report(5, 2, 3)
    assert report.method == "factorized"
    assert report.born == pytest.approx(65 / 81, abs=1e-12)


def test_formula_examples():
    for d in (2, 3, 4):
        assert success_probability_formula(1, d) == Fraction(d * d - 1, d * d)
    assert success_probability_formula(2, 2) == Fraction(5, 8)
    assert success_probability_formula(3, 2) == Fraction(35, 64)
    assert success_probability_formula(2, 3) == Fraction(65, 81)
    assert success_probability_formula(4, 2) == Fraction(63, 128)


@pytest.mark.parametrize("k", range(1, 7))
def test_formula_qubit_closed_form(k):
    assert success_probability_formula(k, 2) == Fraction(comb(2 * k + 1, k + 1), 4**k)


def test_formula_monotone():
    for k in range(1, 6):
        values = [success_probability_formula(k, d) for d in range(2, 7)]
        assert values == sorted(values)
    for d in range(2, 7):
        values = [success_probability_formula(k, d) for k in range(1, 6)]
        assert values == sorted(values, reverse=True)


def test_reduced_born_matches_formula():
    for k, d in [(1, 2), (2, 2), (1, 3), (2, 3), (3, 2)]:
        got = born_probability_reduced(k, d)
        assert got == pytest.approx(float(success_probability_formula(k, d)), abs=1e-12)


# -- certification report ------------------------------------------------------------

@pytest.mark.parametrize(
    "n,k,d",
    [(1, 1, 2), (2, 1, 2), (3, 1, 2), (4, 1, 2), (5, 1, 2), (1, 1, 3), (2, 1, 3),
     (3, 1, 3), (2, 2, 2), (3, 2, 2), (4, 2, 2), (5, 2, 2), (2, 2, 3), (3, 2, 3)],
)
def test_certify_grid(n, k, d):
    report = certify_report(n, k, d)
    assert report.zero_error <= 1e-10
    assert report.completeness <= 1e-10
    assert report.min_tester_eig >= -1e-10
    assert report.min_inconclusive_eig >= -1e-10
    assert report.born == pytest.approx(float(report.formula), abs=1e-10)
    assert report.passed


def test_certify_over_cap_uses_factorization():
    assert certify_report(4, 1, 3).method == "factorized"  # 3^8 > 4096
    assert certify_report(3, 1, 3).method == "dense"


def test_factorized_agrees_with_dense_in_cap():
    for n, k, d in [(3, 1, 3), (4, 2, 2), (3, 1, 2)]:
        dense = _certify_dense(n, k, d)
        fact = _certify_factorized(n, k, d)
        assert fact.born == pytest.approx(dense.born, abs=1e-12)
        assert fact.zero_error <= 1e-12 and dense.zero_error <= 1e-12


def test_certify_rejects_bad_args():
    with pytest.raises(ValueError):
        certify_report(2, 3, 2)
    with pytest.raises(DimensionCapError):
        certify_report(4, 4, 3)  # anomalous block alone is 3^8 > 4096


def test_n_independence():
    values = n_independence_check([4, 5], k=2, d=2)
    assert values[4] == pytest.approx(5 / 8, abs=1e-10)
    assert values[5] == pytest.approx(5 / 8, abs=1e-10)
    singles = n_independence_check([1, 2, 3, 4, 5], k=1, d=2)
    assert all(v == pytest.approx(3 / 4, abs=1e-10) for v in singles.values())


# -- dual certificate -------------------------------------------------------------------

def test_dual_trace_and_saturation():
    cert, min_eig = dual_certificate(200.0)
    assert np.trace(cert.Y) == pytest.approx(160.0, abs=1e-8)
    assert min_eig < 0
    assert cert.epsilon == pytest.approx(-min_eig)
    assert cert.y == pytest.approx(5 / 8 + cert.epsilon)


def test_dual_scaling_stability():
    _, eig200 = dual_certificate(200.0)
    _, eig400 = dual_certificate(400.0)
    ratio = (200.0 * abs(eig200)) / (400.0 * abs(eig400))
    assert abs(ratio - 1.0) < 0.2


@pytest.mark.parametrize("nu", [50.0, 200.0, 800.0])
def test_dual_shifted_matrix_psd(nu):
    from anomalyid.certification import _dual_pieces
    from anomalyid.operators import transpose_computational

    cert, min_eig = dual_certificate(nu)
    layout, hypotheses, _ = _dual_pieces(4, 2, 2)
    patterns = sorted(hypotheses)
    m_nu = cert.Y - (16.0 / 6.0) * transpose_computational(hypotheses[patterns[0]])
    for s in patterns[1:]:
        m_nu += nu * transpose_computational(hypotheses[s])
    shifted = m_nu + cert.epsilon * np.eye(256)
    assert np.linalg.eigvalsh(shifted)[0] >= -1e-10


def test_dual_gap_report_decreasing():
    rows = dual_gap_report([50.0, 200.0, 800.0])
    eps = [row.epsilon for row in rows]
    assert eps[0] > eps[1] > eps[2]
    assert rows[-1].dual_value - 5 / 8 <= 0.01
    assert all(row.dual_value >= 5 / 8 - 1e-10 for row in rows)


def test_dual_rejects_nonpositive_nu():
    with pytest.raises(ValueError):
        dual_certificate(0.0)


def test_dual_feasible_point_in_unit_normalisation():
    """(Y + eps 1) / d^n with y = P* + eps is dual feasible: both constraint
    blocks are PSD and the reduced-trace constraint is saturated."""
    from anomalyid.certification import _dual_pieces
    from anomalyid.operators import partial_trace, transpose_computational

    nu = 300.0
    cert, _ = dual_certificate(nu)
    layout, hypotheses, _ = _dual_pieces(4, 2, 2)
    patterns = sorted(hypotheses)
    dn = 16.0
    y_hat = (cert.Y + cert.epsilon * np.eye(256)) / dn
    for r_star in patterns:
        m = y_hat - (1 / 6.0) * transpose_computational(hypotheses[r_star])
        for s in patterns:
            if s != r_star:
                m += (nu / dn) * transpose_computational(hypotheses[s])
        assert np.linalg.eigvalsh(m)[0] >= -1e-10
    reduced = partial_trace(y_hat, layout.dims, layout.in_axes)
    assert np.abs(reduced - cert.y * np.eye(16)).max() < 1e-10
