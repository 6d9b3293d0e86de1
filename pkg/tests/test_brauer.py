"""Walled Brauer diagrams: composition, operators, relations, Bratteli."""

import json
from math import factorial

import numpy as np
import pytest

from anomalyid.brauer import (
    WalledBrauerDiagram,
    bratteli_lattice,
    check_commutant,
    check_generator_relations,
    compose,
    contraction,
    diagram_to_operator,
    enumerate_diagrams,
    generator,
    identity_diagram,
    mixed_unitary_action,
    random_diagram,
    transposition,
)
from anomalyid.combinatorics import MixedIrrepLabel


# -- diagram validation --------------------------------------------------------

def test_wall_rules_enforced():
    # top-bottom strand crossing the wall is forbidden
    with pytest.raises(ValueError):
        WalledBrauerDiagram.from_endpoints(
            1, 1, [(("top", 1), ("bottom", 2)), (("top", 2), ("bottom", 1))]
        )
    # same-row pair that stays on one side is forbidden
    with pytest.raises(ValueError):
        WalledBrauerDiagram.from_endpoints(
            2, 2,
            [
                (("top", 1), ("top", 2)),
                (("top", 3), ("top", 4)),
                (("bottom", 1), ("bottom", 2)),
                (("bottom", 3), ("bottom", 4)),
            ],
        )
    # not a perfect matching
    with pytest.raises(ValueError):
        WalledBrauerDiagram(1, 1, ((0, 1), (0, 1)))


def test_canonical_equality():
    a = WalledBrauerDiagram.from_endpoints(
        1, 1, [(("top", 2), ("top", 1)), (("bottom", 1), ("bottom", 2))]
    )
    assert a == contraction(1, 1)
    assert hash(a) == hash(contraction(1, 1))


# -- generators ----------------------------------------------------------------

def test_generator_examples():
    s1 = transposition(1, 2, 0)
    assert set(s1.to_endpoint_pairs()) == {
        (("top", 1), ("bottom", 2)),
        (("top", 2), ("bottom", 1)),
    }
    e = contraction(1, 1)
    assert set(e.to_endpoint_pairs()) == {
        (("top", 1), ("top", 2)),
        (("bottom", 1), ("bottom", 2)),
    }
    s2 = transposition(2, 1, 2)  # swap of the two right columns
    assert (1, 2) in s2.pairs or set(s2.to_endpoint_pairs()) == {
        (("top", 1), ("bottom", 1)),
        (("top", 2), ("bottom", 3)),
        (("top", 3), ("bottom", 2)),
    }


def test_generator_rejects_wall_crossing_index():
    with pytest.raises(ValueError):
        transposition(2, 2, 2)  # i = n would cross the wall
    with pytest.raises(ValueError):
        generator("left-transposition", 2, 2, i=2)
    with pytest.raises(ValueError):
        generator("right-transposition", 2, 2, i=2)
    assert generator("contraction", 1, 1) == contraction(1, 1)
    assert generator("left-transposition", 3, 0, i=2) == transposition(2, 3, 0)


# -- composition -----------------------------------------------------------------

def test_compose_identity():
    ident = identity_diagram(2, 1)
    out = compose(ident, ident)
    assert out.diagram == ident
    assert out.loop_count == 0


def test_compose_contraction_pseudo_idempotent():
    e = contraction(1, 1)
    out = compose(e, e)
    assert out.diagram == e
    assert out.loop_count == 1


def test_compose_worked_example_n2_m2():
    """Stacking a diagram with a bottom arc onto one with the matching top arc
    closes exactly one loop."""
    a = WalledBrauerDiagram.from_endpoints(
        2, 2,
        [
            (("top", 1), ("bottom", 2)),
            (("top", 2), ("top", 3)),
            (("bottom", 1), ("bottom", 3)),
            (("top", 4), ("bottom", 4)),
        ],
    )
    b = WalledBrauerDiagram.from_endpoints(
        2, 2,
        [
            (("top", 1), ("top", 3)),
            (("top", 2), ("bottom", 1)),
            (("bottom", 2), ("bottom", 3)),
            (("top", 4), ("bottom", 4)),
        ],
    )
    out = compose(a, b)
    expected = WalledBrauerDiagram.from_endpoints(
        2, 2,
        [
            (("top", 1), ("bottom", 1)),
            (("top", 2), ("top", 3)),
            (("bottom", 2), ("bottom", 3)),
            (("top", 4), ("bottom", 4)),
        ],
    )
    assert out.diagram == expected
    assert out.loop_count == 1


def test_compose_shape_mismatch():
    with pytest.raises(ValueError):
        compose(identity_diagram(1, 1), identity_diagram(2, 0))


def test_compose_associative_with_loop_bookkeeping():
    rng = np.random.default_rng(42)
    for _ in range(100):
        a = random_diagram(2, 2, rng)
        b = random_diagram(2, 2, rng)
        c = random_diagram(2, 2, rng)
        ab = compose(a, b)
        bc = compose(b, c)
        left = compose(ab.diagram, c)
        right = compose(a, bc.diagram)
        assert left.diagram == right.diagram
        assert ab.loop_count + left.loop_count == bc.loop_count + right.loop_count


# -- operator realisation --------------------------------------------------------

def test_operator_examples():
    assert np.array_equal(diagram_to_operator(identity_diagram(1, 1), 2), np.eye(4))
    e_op = diagram_to_operator(contraction(1, 1), 2)
    expected = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            expected[i * 2 + i, j * 2 + j] = 1.0
    assert np.array_equal(e_op, expected)
    swap = diagram_to_operator(transposition(1, 2, 0), 3)
    assert swap.shape == (9, 9)
    for i in range(3):
        for j in range(3):
            assert swap[j * 3 + i, i * 3 + j] == 1.0


@pytest.mark.parametrize("n,m,d", [(1, 1, 2), (2, 2, 4)])
def test_operator_realisation_faithful_for_large_d(n, m, d):
    diagrams = enumerate_diagrams(n, m)
    assert len(diagrams) == factorial(n + m)
    seen = {}
    for diag in diagrams:
        key = diagram_to_operator(diag, d).tobytes()
        assert key not in seen, f"{diag} collides with {seen.get(key)}"
        seen[key] = diag


def test_homomorphism_examples():
    e = contraction(1, 1)
    assert compose(e, e).loop_count == 1
    from anomalyid.brauer import homomorphism_check

    assert homomorphism_check(e, e, 2) < 1e-12
    s1 = transposition(1, 2, 0)
    assert homomorphism_check(s1, s1, 2) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_homomorphism_random_pairs(d):
    from anomalyid.brauer import homomorphism_check

    rng = np.random.default_rng(7 + d)
    for _ in range(50):
        a = random_diagram(2, 2, rng)
        b = random_diagram(2, 2, rng)
        assert homomorphism_check(a, b, d) <= 1e-10


# -- generator relations ----------------------------------------------------------

@pytest.mark.parametrize("n,m,d", [(2, 2, 2), (1, 1, 3), (3, 0, 2), (2, 2, 3)])
def test_generator_relations(n, m, d):
    residuals = check_generator_relations(n, m, d)
    assert residuals, "no relations evaluated"
    worst = max(residuals.values())
    assert worst <= 1e-12, f"worst relation: {max(residuals, key=residuals.get)}"


def test_pseudo_idempotent_specific():
    e = diagram_to_operator(contraction(1, 1), 3)
    assert np.abs(e @ e - 3 * e).max() < 1e-12


# -- commutant ---------------------------------------------------------------------

def test_commutant_examples():
    rng = np.random.default_rng(5)
    assert check_commutant(identity_diagram(1, 1), 2, 5, rng) < 1e-14
    assert check_commutant(contraction(1, 1), 2, 20, rng) <= 1e-12
    diag = random_diagram(2, 2, rng)
    assert check_commutant(diag, 3, 20, rng) <= 1e-9


def test_mixed_action_shape():
    u = np.eye(2)
    assert mixed_unitary_action(u, 2, 1).shape == (8, 8)


# -- Bratteli lattice ----------------------------------------------------------------

def test_bratteli_trivial():
    lattice = bratteli_lattice(1, 0, 2)
    assert lattice.final_level == {MixedIrrepLabel((1,), (), 2): 1}


def test_bratteli_33_path_counts():
    lattice = bratteli_lattice(3, 3, 2)
    final = {
        (lab.left, lab.right): count for lab, count in lattice.final_level.items()
    }
    assert final == {
        ((3,), (3,)): 1,
        ((2,), (2,)): 5,
        ((1,), (1,)): 9,
        ((), ()): 5,
    }
    assert lattice.dimension_sum() == 64  # 1*7 + 5*5 + 9*3 + 5*1


def test_bratteli_44_labels():
    lattice = bratteli_lattice(4, 4, 2)
    labels = {(lab.left, lab.right) for lab in lattice.final_level}
    assert labels == {
        ((4,), (4,)),
        ((3,), (3,)),
        ((2,), (2,)),
        ((1,), (1,)),
        ((), ()),
    }


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("m", [0, 1, 2, 3])
@pytest.mark.parametrize("d", [2, 3])
def test_bratteli_dimension_sum(n, m, d):
    lattice = bratteli_lattice(n, m, d)
    assert lattice.dimension_sum() == d ** (n + m)


def test_bratteli_level_zero():
    lattice = bratteli_lattice(2, 1, 2)
    assert lattice.levels[0] == {MixedIrrepLabel((), (), 2): 1}
    assert len(lattice.levels) == 4


# -- JSON wire format -----------------------------------------------------------------

def test_json_roundtrip():
    diag = contraction(2, 1)
    data = json.loads(json.dumps(diag.to_json_dict()))
    assert WalledBrauerDiagram.from_json_dict(data) == diag


def test_json_roundtrip_exhaustive_22():
    for diag in enumerate_diagrams(2, 2):
        data = json.loads(json.dumps(diag.to_json_dict()))
        assert WalledBrauerDiagram.from_json_dict(data) == diag


def test_json_malformed_pair_named():
    data = {"n_left": 1, "n_right": 1, "pairs": [[["top", 1]], [["x"], ["y"]]]}
    with pytest.raises(ValueError, match="pair"):
        WalledBrauerDiagram.from_json_dict(data)
