"""Unit tests for the contact superalgebra and E(1,6)."""

from fractions import Fraction

import pytest

from e16verma.contact import (
    ContactElement,
    GRADING_T,
    THETA,
    check_L1_L2_L3,
    check_root_system,
    contact_bracket,
    e16_basis,
    e16_membership,
    e16_project,
    monomial_degree,
    op_A,
    root_datum,
    _basis_generators,
)
from e16verma.exactnum import IUNIT, ONE, Q, QI
from e16verma.grassmann import MASKS_BY_SIZE, mask_of, popcount

C = ContactElement.monomial


# ---------------------------------------------------------------------------
# bracket
# ---------------------------------------------------------------------------

def test_grading_element_eigenvalues():
    for k, word in [(0, (1,)), (1, (1, 2)), (2, ()), (0, (1, 2, 3)), (3, (2, 4, 6))]:
        b = C(k, word)
        d = 2 * k + len(word) - 2
        assert contact_bracket(GRADING_T, b) == b.scale(Q(d))
        assert monomial_degree(k, mask_of(word)) == d


def test_bracket_frozen_examples():
    # [xi_i, xi_j] = -delta_ij
    assert contact_bracket(C(0, (1,)), C(0, (1,))) == C(0, ()).scale(Q(-1))
    assert not contact_bracket(C(0, (1,)), C(0, (2,)))
    # so(6)-type products
    assert contact_bracket(C(0, (1, 2)), C(0, (1,))) == C(0, (2,))
    assert contact_bracket(C(0, (1, 2)), C(0, (1, 3))) == C(0, (2, 3))
    # a mixed example computed by hand from the monomial formula:
    # [t xi_1, xi_12]: first part ((2-1)*0 - 1*(2-2)) = 0; second part
    # (-1)^1 t (d_1 xi_1)(d_1 xi_12) = -t * 1 * xi_2
    assert contact_bracket(C(1, (1,)), C(0, (1, 2))) == C(1, (2,)).scale(Q(-1))


def test_bracket_bilinear_and_parity_degree():
    a = C(1, (1, 3)) + C(0, (2,)).scale(QI(1, 2))
    b = C(0, (1, 2, 3)).scale(Q(3, 7)) - C(2, ())
    c = C(0, (5,))
    lhs = contact_bracket(a + b.scale(Q(5)), c)
    rhs = contact_bracket(a, c) + contact_bracket(b, c).scale(Q(5))
    assert lhs == rhs


def test_bracket_super_skew_on_monomials():
    monos = [
        C(0, ()), C(1, ()), C(0, (1,)), C(0, (3,)), C(1, (2,)),
        C(0, (1, 2)), C(0, (2, 5)), C(1, (1, 4)),
        C(0, (1, 2, 3)), C(0, (2, 4, 6)), C(1, (1, 5, 6)),
    ]
    for x in monos:
        px = popcount(next(iter(x.data))[1]) & 1
        for y in monos:
            py = popcount(next(iter(y.data))[1]) & 1
            sgn = -1 if px and py else 1
            assert contact_bracket(x, y) == contact_bracket(y, x).scale(Q(-sgn))


# ---------------------------------------------------------------------------
# the A operator and membership
# ---------------------------------------------------------------------------

def test_op_A_frozen_examples():
    assert not op_A(C(0, ()))            # three t-derivatives of t^0 xi_*
    assert not op_A(C(0, (1,)))          # two t-derivatives of t^0 (...)
    assert op_A(C(0, (1, 2, 3))) == C(0, (4, 5, 6))
    assert op_A(C(1, (1, 2))) == C(0, (3, 4, 5, 6)).scale(Q(-1))
    # integration side: |L| = 4 integrates once
    assert op_A(C(0, (1, 2, 3, 4))) == C(1, (5, 6))
    assert op_A(C(1, (1, 2, 3, 4))) == C(2, (5, 6)).scale(Q(1, 2))


def test_projection_examples():
    assert e16_project(C(0, (1,))) == C(0, (1,))
    assert e16_project(C(0, (1, 2, 3))) == C(0, (1, 2, 3)) - C(0, (4, 5, 6)).scale(IUNIT)


def test_membership_frozen_examples():
    member = C(0, (1, 2, 3, 4)) - C(1, (5, 6)).scale(IUNIT)
    res = e16_membership(member, 8)
    assert res.ok and not res.residual

    not_member = C(0, (1, 2, 3)) + C(0, (4, 5, 6))
    res = e16_membership(not_member, 8)
    assert not res.ok and res.residual

    half_i = C(0, (1, 2, 3, 4)) + C(1, (5, 6)).scale(QI(0, Fraction(1, 2)))
    res = e16_membership(half_i, 8)
    assert not res.ok


def test_membership_reconstructs_coordinates():
    basis = e16_basis(4)
    combo = ContactElement()
    weights = [Q(j + 1, 3) if j % 2 else QI(1, -j) for j in range(len(basis))]
    for b, w in zip(basis, weights):
        combo = combo + b.scale(w)
    res = e16_membership(combo, 4)
    assert res.ok
    flat = res.flat_coords(4)
    assert len(flat) == len([w for w in weights if w])
    for j, w in enumerate(weights):
        assert flat.get(j, Q(0)) == w


def test_complement_three_sets_are_proportional():
    # (Id - iA) of complementary 3-sets span the same line
    x = e16_project(C(2, (1, 2, 3)))
    y = e16_project(C(2, (4, 5, 6)))
    # find scalar c with y = c x on the first common monomial
    key = next(iter(x.data))
    c = y.data[key] / x.data[key]
    assert y == x.scale(c)


def test_basis_graded_dimensions():
    dims = [len(_basis_generators(d)) for d in range(-2, 9)]
    assert dims == [1, 6, 16, 16, 16, 16, 16, 16, 16, 16, 16]
    assert len(e16_basis(6)) == 1 + 6 + 7 * 16
    # homogeneity of each basis element
    for b in e16_basis(4):
        assert b.is_homogeneous()


def test_basis_brackets_stay_inside():
    basis = e16_basis(2)
    for x in basis:
        for y in basis:
            br = contact_bracket(x, y)
            if br:
                assert e16_membership(br, 8).ok


def test_theta_is_lowering_element():
    report = check_L1_L2_L3(4)
    assert report["ok"], report["failures"]


# ---------------------------------------------------------------------------
# root datum
# ---------------------------------------------------------------------------

def test_cartan_and_root_vector_shapes():
    rd = root_datum()
    assert len(rd.cartan) == 3
    assert len(rd.root_vectors) == 12
    assert len(rd.positive_roots) == 6
    assert set(rd.simple_roots) == {(1, -1, 0), (0, 1, -1), (0, 1, 1)}
    for r in rd.simple_roots:
        assert r in rd.root_vectors


def test_single_root_eigen_relation():
    rd = root_datum()
    vec = rd.root_vectors[(1, -1, 0)]
    assert contact_bracket(rd.cartan[0], vec) == vec
    assert contact_bracket(rd.cartan[1], vec) == vec.scale(Q(-1))
    assert contact_bracket(rd.cartan[2], vec) == ContactElement()


def test_root_system_report():
    report = check_root_system()
    assert report["ok"], report["failures"]
