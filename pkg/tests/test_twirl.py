"""Weingarten tables, averaged Choi matrices, the E basis, hypotheses."""

import numpy as np
import pytest

from anomalyid.combinatorics import all_perms, cycle_type
from anomalyid.operators import (
    SubsystemLayout,
    haar_unitaries,
    min_eigenvalue,
    partial_trace,
    reorder_subsystems,
)
from anomalyid.twirl import (
    AnomalyPattern,
    all_hypotheses,
    all_patterns,
    basis_operator_E,
    choi_average,
    choi_average_monte_carlo,
    choi_identity,
    choi_two_anomalies_closed_form,
    hypothesis_choi,
    pair_major_choi_average,
    perm_operator,
    projectors,
    weingarten_table,
)

RNG = np.random.default_rng(321)


# -- patterns ----------------------------------------------------------------

def test_patterns_lexicographic():
    pats = all_patterns(4, 2)
    assert [p.members for p in pats] == [
        (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4),
    ]
    assert pats[0].complement == (3, 4)
    with pytest.raises(ValueError):
        AnomalyPattern(3, (0,))
    with pytest.raises(ValueError):
        AnomalyPattern(3, (1, 1))


# -- Weingarten --------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 5])
def test_weingarten_k1(d):
    table = weingarten_table(1, d)
    assert table.values[(1,)] == pytest.approx(1.0 / d)
    assert not table.pseudo_inverse


@pytest.mark.parametrize("d", [2, 3])
def test_weingarten_k2_matches_hand_inverse(d):
    # invert the 2x2 Gram matrix ((d^2, d), (d, d^2)) by hand
    det = d**4 - d**2
    expect_id = d**2 / det
    expect_swap = -d / det
    table = weingarten_table(2, d)
    assert table.values[(1, 1)] == pytest.approx(expect_id, abs=1e-14)
    assert table.values[(2,)] == pytest.approx(expect_swap, abs=1e-14)


def test_weingarten_k2_values():
    table = weingarten_table(2, 2)
    assert table.values[(1, 1)] == pytest.approx(1 / 3)
    assert table.values[(2,)] == pytest.approx(-1 / 6)
    table = weingarten_table(2, 3)
    assert table.values[(1, 1)] == pytest.approx(1 / 8)
    assert table.values[(2,)] == pytest.approx(-1 / 24)


@pytest.mark.parametrize("k,d", [(1, 2), (2, 2), (2, 3), (3, 3)])
def test_weingarten_orthogonality(k, d):
    """sum_pi Wg(sigma pi^-1) d^{#cycles(pi)} = delta_{sigma, id} for k <= d."""
    from anomalyid.combinatorics import compose_perms, inverse_perm

    table = weingarten_table(k, d)
    perms = all_perms(k)
    for sigma in perms[:6]:
        total = sum(
            table(compose_perms(sigma, inverse_perm(pi))) * d ** len(cycle_type(pi))
            for pi in perms
        )
        expected = 1.0 if sigma == tuple(range(k)) else 0.0
        assert total == pytest.approx(expected, abs=1e-10)


def test_weingarten_pseudo_inverse_path():
    table = weingarten_table(3, 2)
    assert table.pseudo_inverse
    # G Wg G = G (Moore-Penrose property restated through the class function)
    from anomalyid.combinatorics import compose_perms, inverse_perm

    perms = all_perms(3)
    gram = np.array(
        [
            [2.0 ** len(cycle_type(compose_perms(p, inverse_perm(q)))) for q in perms]
            for p in perms
        ]
    )
    wg = np.array(
        [
            [table(compose_perms(p, inverse_perm(q))) for q in perms]
            for p in perms
        ]
    )
    assert np.allclose(gram @ wg @ gram, gram, atol=1e-9)


# -- permutation operators ---------------------------------------------------

def test_perm_operator_examples():
    assert np.array_equal(perm_operator((0, 1), 3), np.eye(9))
    swap = perm_operator((1, 0), 2)
    expected = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            expected[j * 2 + i, i * 2 + j] = 1.0
    assert np.array_equal(swap, expected)
    cycle = perm_operator((1, 2, 0), 2)
    assert np.array_equal(np.linalg.matrix_power(cycle, 3), np.eye(8))


def test_perm_operator_is_representation():
    from anomalyid.combinatorics import compose_perms

    for p in all_perms(3)[:4]:
        for q in all_perms(3)[:4]:
            lhs = perm_operator(p, 2) @ perm_operator(q, 2)
            rhs = perm_operator(compose_perms(p, q), 2)
            assert np.array_equal(lhs, rhs)


# -- projectors and Choi matrices ---------------------------------------------

@pytest.mark.parametrize("d", [2, 3])
def test_projectors(d):
    pi0, pi1 = projectors(d)
    assert np.abs(pi0 @ pi0 - pi0).max() < 1e-12
    assert np.abs(pi1 @ pi1 - pi1).max() < 1e-12
    assert np.abs(pi0 @ pi1).max() < 1e-12
    assert np.trace(pi0) == pytest.approx(1.0)
    assert np.trace(pi1) == pytest.approx(d * d - 1.0)
    assert np.linalg.matrix_rank(pi0) == 1
    assert np.linalg.matrix_rank(pi1) == d * d - 1


def test_choi_identity_trace():
    assert np.trace(choi_identity(3)) == pytest.approx(3.0)


@pytest.mark.parametrize("d", [2, 3])
def test_choi_average_k1(d):
    assert np.abs(choi_average(1, d) - np.eye(d * d) / d).max() < 1e-14


def test_choi_average_k2_closed_form():
    for d in (2, 3):
        got = choi_average(2, d)
        expected = choi_two_anomalies_closed_form(d)
        assert np.abs(got - expected).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_closed_form_is_psd_with_trace_d2(d):
    c = choi_two_anomalies_closed_form(d)
    assert min_eigenvalue(c) >= -1e-10
    assert np.trace(c) == pytest.approx(d * d)


@pytest.mark.parametrize("k,d", [(1, 2), (2, 2), (1, 3), (3, 2)])
def test_choi_average_trace(k, d):
    assert np.trace(choi_average(k, d)) == pytest.approx(float(d) ** k)


@pytest.mark.parametrize("k,d", [(1, 2), (2, 2), (2, 3), (3, 2)])
def test_choi_average_matches_monte_carlo(k, d):
    """Weingarten construction vs the sampling oracle, per entry, 4 sigma."""
    mean, se = choi_average_monte_carlo(k, d, trials=20_000, seed=k * 10 + d)
    exact = choi_average(k, d)
    delta = np.abs(mean - exact)
    tol = 4.0 * se + 1e-12
    assert (delta <= tol).all(), f"max z ~ {(delta / (se + 1e-300)).max():.2f}"


def test_pair_major_reordering_consistency():
    # reordering the block-ordered C^(2) must equal building from pair factors
    d = 2
    pair = pair_major_choi_average(2, d)
    block = choi_average(2, d)
    back = reorder_subsystems(pair, (d,) * 4, [0, 2, 1, 3])
    assert np.abs(back - block).max() < 1e-14


# -- E basis -----------------------------------------------------------------

def test_basis_e_examples():
    layout = SubsystemLayout(n_devices=1, local_dim=2)
    pi0, _ = projectors(2)
    e_empty = basis_operator_E(AnomalyPattern(1, ()), layout)
    assert np.abs(e_empty - pi0).max() < 1e-14
    assert np.trace(e_empty) == pytest.approx(1.0)

    layout2 = SubsystemLayout(n_devices=2, local_dim=2)
    e1 = basis_operator_E(AnomalyPattern(2, (1,)), layout2)
    assert np.trace(e1) == pytest.approx(3.0)


def test_basis_e_orthogonality_and_resolution():
    layout = SubsystemLayout(n_devices=3, local_dim=2)
    import itertools

    subsets = [
        AnomalyPattern(3, s)
        for r in range(4)
        for s in itertools.combinations((1, 2, 3), r)
    ]
    ops = [basis_operator_E(s, layout) for s in subsets]
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            assert np.abs(ops[i] @ ops[j]).max() < 1e-12
    assert np.abs(sum(ops) - np.eye(layout.dim)).max() < 1e-12


# -- hypotheses ----------------------------------------------------------------

def test_hypothesis_k1_single_device():
    layout = SubsystemLayout(n_devices=1, local_dim=2)
    f = hypothesis_choi(AnomalyPattern(1, (1,)), layout)
    assert np.abs(f - np.eye(4) / 2).max() < 1e-14


def test_hypothesis_bookkeeping_n2():
    layout = SubsystemLayout(n_devices=2, local_dim=2)
    f = hypothesis_choi(AnomalyPattern(2, (2,)), layout)
    assert np.trace(f) == pytest.approx(4.0)
    # tracing out device 2 leaves |1>><<1| times tr C^(1) = 2 |1>><<1|
    reduced = partial_trace(f, layout.dims, layout.device_axes(1))
    assert np.abs(reduced - 2.0 * choi_identity(2)).max() < 1e-12


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_single_anomaly_e_basis_expansion(n, d):
    """F_r = d^(n-2) (E_empty + E_r) for a single anomaly."""
    layout = SubsystemLayout(n_devices=n, local_dim=d)
    for r in all_patterns(n, 1):
        f = hypothesis_choi(r, layout)
        expected = float(d) ** (n - 2) * (
            basis_operator_E(AnomalyPattern(n, ()), layout)
            + basis_operator_E(r, layout)
        )
        assert np.abs(f - expected).max() < 1e-10


@pytest.mark.parametrize("n,k,d", [(2, 1, 2), (3, 2, 2), (2, 2, 3), (4, 2, 2)])
def test_hypothesis_trace_symmetry_psd(n, k, d):
    for f in all_hypotheses(n, k, d).values():
        assert np.trace(f) == pytest.approx(float(d) ** n)
        assert np.abs(f - f.T).max() < 1e-12  # transpose convention is inert
        assert min_eigenvalue(f) >= -1e-10


def test_local_twirl_invariance_k1():
    """Conjugation by per-device U_j (x) conj(U_j) fixes single-anomaly F_r."""
    n, d = 2, 2
    layout = SubsystemLayout(n_devices=n, local_dim=d)
    f = hypothesis_choi(AnomalyPattern(n, (1,)), layout)
    for trial in range(20):
        us = haar_unitaries(d, n, np.random.default_rng(1000 + trial))
        w = np.eye(1, dtype=complex)
        for j in range(n):
            w = np.kron(w, np.kron(us[j], us[j].conj()))
        conjugated = w @ f @ w.conj().T
        assert np.abs(conjugated - f).max() < 1e-12


def test_global_twirl_invariance_k2():
    """(U (x) conj(U))^(x n) fixes the two-anomaly hypotheses."""
    n, d = 3, 2
    layout = SubsystemLayout(n_devices=n, local_dim=d)
    f = hypothesis_choi(AnomalyPattern(n, (1, 3)), layout)
    for trial in range(20):
        u = haar_unitaries(d, 1, np.random.default_rng(2000 + trial))[0]
        w = np.eye(1, dtype=complex)
        for _ in range(n):
            w = np.kron(w, np.kron(u, u.conj()))
        conjugated = w @ f @ w.conj().T
        assert np.abs(conjugated - f).max() < 1e-9
