"""Induced-module action: eta rewriting, the lambda-action, the commutator
oracle, coefficient functionals, and mixed-basis extraction."""

import random

import pytest

from e16verma.exactnum import GaussianRational, ONE, Q, QI, ZERO
from e16verma.gmodule import builtin
from e16verma.grassmann import (
    ALL_MASKS,
    FULL_MASK,
    MASKS_BY_SIZE,
    eta_bar,
    mask_of,
    mono_product,
    popcount,
    word_of,
)
from e16verma.verma import (
    ActionMatrixSlice,
    ActionPolynomial,
    FORMAL,
    FormalModule,
    UnsupportedDegreeError,
    VermaVector,
    action_terms,
    coefficient_functionals,
    commutator_oracle,
    commutator_suite,
    eta_normalize,
    eta_word_normalize,
    flat_add,
    flat_scale,
    formal_state,
    ind_monomials,
    lambda_action_T,
    mdeg,
    mixed_cells,
    mixed_coefficient,
    reconstruct_from_functionals,
    render_vermavector,
    t_inverse,
)

C = Q(7, 3)  # generic t-eigenvalue used throughout


def vec(module):
    return builtin("vector", C) if module == "vector" else builtin(module, C)


# ---------------------------------------------------------------------------
# eta rewriting
# ---------------------------------------------------------------------------

def test_eta_word_examples():
    assert eta_word_normalize((1, 1)) == (1, 1, 0)
    assert eta_word_normalize((2, 1)) == (-1, 0, mask_of((1, 2)))
    assert eta_word_normalize((1, 2, 1)) == (-1, 1, mask_of((2,)))
    assert eta_word_normalize(()) == (1, 0, 0)
    assert eta_word_normalize((3, 1, 2)) == (1, 0, mask_of((1, 2, 3)))


def _brute_reduce(word, rng):
    """Reduce an eta word by random adjacent rewrites: swap descents with a
    sign, collapse equal neighbours into a Theta."""
    sign, theta = 1, 0
    w = list(word)
    while True:
        sites = [
            n for n in range(len(w) - 1) if w[n] > w[n + 1] or w[n] == w[n + 1]
        ]
        if not sites:
            return sign, theta, mask_of(w)
        n = rng.choice(sites)
        if w[n] == w[n + 1]:
            del w[n : n + 2]
            theta += 1
        else:
            w[n], w[n + 1] = w[n + 1], w[n]
            sign = -sign


def test_eta_confluence_exhaustive():
    rng = random.Random(20260817)
    alphabet = (1, 2, 3)
    words = [()]
    for _ in range(4):
        words = [w + (x,) for w in words for x in alphabet] + words
    for w in set(words):
        expect = eta_word_normalize(w)
        for _ in range(5):
            assert _brute_reduce(w, rng) == expect, w


def test_eta_confluence_random_long():
    rng = random.Random(7)
    for _ in range(200):
        w = tuple(rng.randint(1, 6) for _ in range(rng.randint(5, 9)))
        expect = eta_word_normalize(w)
        for _ in range(3):
            assert _brute_reduce(w, rng) == expect, w


def test_eta_normalize_wrapper():
    vv = eta_normalize((1, 2, 1))
    assert vv.data == {(1, mask_of((2,))): {0: Q(-1)}}


# ---------------------------------------------------------------------------
# the action: frozen examples
# ---------------------------------------------------------------------------

def test_action_trivial_module_lowering_one():
    m = builtin("trivial", C)
    x = VermaVector.unit(m, 0, 0, 0)  # eta_[] (x) v
    P = lambda_action_T((1,), x)
    expect0 = VermaVector(m, {(1, mask_of((1,))): {0: ONE}})  # Theta eta[1]
    expect1 = VermaVector(m, {(0, mask_of((1,))): {0: Q(5) - C}})
    assert P.coefficient(0) == expect0
    assert P.coefficient(1) == expect1
    assert P.lambda_degree() == 1


def test_action_trivial_module_raising_one():
    m = builtin("trivial", C)
    x = VermaVector.unit(m, 0, mask_of((1,)), 0)  # eta[1] (x) v
    P = lambda_action_T((1,), x)
    assert P.coefficient(0) == VermaVector.unit(m, 0, 0, 0)
    assert not P.coefficient(1)
    assert not P.coefficient(2)


def test_action_empty_word_general_identity():
    """Phi_[](lambda)(eta_I (x) v) = -2 Theta eta_I (x) v
    + lambda (eta_I (x) t.v - (6-|I|) eta_I (x) v)
    - lambda^2 sum_{i<j} (xi_ij * eta_I) (x) xi_ji . v, checked on the
    6-dimensional module."""
    m = vec("vector")
    for i_mask in (0, mask_of((1, 3)), mask_of((2, 4, 5)), FULL_MASK):
        for coord in (0, 3):
            x = VermaVector.unit(m, 0, i_mask, coord)
            P = lambda_action_T((), x)
            v = {coord: ONE}
            size = popcount(i_mask)

            assert P.coefficient(0) == VermaVector(
                m, {(1, i_mask): {coord: Q(-2)}}
            )

            lam1 = VermaVector(m, {(0, i_mask): m.act_t(v)}) + VermaVector(
                m, {(0, i_mask): {coord: Q(-(6 - size))}}
            )
            assert P.coefficient(1) == lam1

            lam2 = VermaVector(m)
            for i in range(1, 7):
                for j in range(i + 1, 7):
                    sgn, u = mono_product(mask_of((i, j)), i_mask)
                    if not sgn:
                        continue
                    w = m.act_xi_pair(j, i, v)
                    lam2 = lam2 + VermaVector(m, {(0, u): w}).scale(Q(-sgn))
            assert P.coefficient(2) == lam2


def test_action_word_sign_and_repeats():
    m = vec("vector")
    x = VermaVector.unit(m, 1, mask_of((3, 4)), 2)
    a = lambda_action_T((1, 2), x)
    b = lambda_action_T((2, 1), x)
    assert a == b.scale(Q(-1))
    with pytest.raises(ValueError):
        lambda_action_T((1, 1), x)


def test_action_theta_extension_binomial():
    """The action on Theta^k m0 is the k = 0 action times (lambda+Theta)^k."""
    from math import comb

    m = vec("vector")
    rng = random.Random(11)
    for _ in range(10):
        i_mask = rng.choice(ALL_MASKS)
        coord = rng.randrange(6)
        L = tuple(sorted(rng.sample(range(1, 7), rng.randint(0, 3))))
        k = rng.randint(1, 3)
        base = VermaVector.unit(m, 0, i_mask, coord)
        lifted = VermaVector.unit(m, k, i_mask, coord)
        P0 = lambda_action_T(L, base)
        expect: dict[int, VermaVector] = {}
        for j, vv in P0.coeffs.items():
            for r in range(k + 1):
                shifted = VermaVector(
                    m,
                    {
                        (kk + k - r, mask): dict(fv)
                        for (kk, mask), fv in vv.data.items()
                    },
                ).scale(Q(comb(k, r)))
                cur = expect.get(j + r)
                expect[j + r] = shifted if cur is None else cur + shifted
        P = lambda_action_T(L, lifted)
        assert P == ActionPolynomial(m, expect)


def test_action_degree_compatibility():
    """On a homogeneous input of m-degree d the lambda^j coefficient is
    homogeneous of m-degree d - (2j + |L| - 2)."""
    m = vec("vector")
    rng = random.Random(5)
    for _ in range(40):
        k = rng.randint(0, 3)
        i_mask = rng.choice(ALL_MASKS)
        size = rng.randint(0, 3)
        L = tuple(sorted(rng.sample(range(1, 7), size)))
        d = mdeg(k, i_mask)
        x = VermaVector.unit(m, k, i_mask, rng.randrange(6))
        for j, vv in lambda_action_T(L, x).coeffs.items():
            assert vv.mdegrees() == {d - (2 * j + size - 2)}


def test_action_linearity():
    m = vec("vector")
    x = VermaVector.unit(m, 0, mask_of((2, 3)), 1)
    y = VermaVector.unit(m, 1, mask_of((5,)), 4)
    c = QI(2, -3)
    lhs = lambda_action_T((1, 4), x.scale(c) + y)
    rhs = lambda_action_T((1, 4), x).scale(c) + lambda_action_T((1, 4), y)
    assert lhs == rhs


def test_ind_monomials_counts():
    assert len(ind_monomials(4)) == 80
    assert len(ind_monomials(8)) == 208
    assert ind_monomials(0) == [(0, FULL_MASK)]
    for k, mask in ind_monomials(6):
        assert mdeg(k, mask) <= 6


# ---------------------------------------------------------------------------
# commutator oracle (object level)
# ---------------------------------------------------------------------------

def test_commutator_oracle_pairs():
    m = vec("vector")
    states = [
        VermaVector.unit(m, 0, FULL_MASK, 0),
        VermaVector.unit(m, 1, mask_of((1, 2, 4, 6)), 3),
        VermaVector.unit(m, 2, FULL_MASK, 5)
        + VermaVector.unit(m, 0, mask_of((2, 3)), 1).scale(QI(1, 1)),
    ]
    pairs = [
        ((), ()),
        ((1,), (1,)),
        ((1,), (2,)),
        ((1, 2), (1,)),
        ((1, 2), (3, 4)),
        ((1, 2, 3), (3, 4, 5)),
        ((2, 3, 5), (2, 3, 5)),
    ]
    nonvacuous = 0
    for f, g in pairs:
        for x in states:
            rep = commutator_oracle(f, g, x)
            assert rep["ok"], (f, g, rep)
            nonvacuous += rep["cells_compared"]
    # for several pairs both sides vanish identically ([xi_12, xi_34] has a
    # zero bracket and the operators commute), but not for all of them
    assert nonvacuous > 0


def test_commutator_oracle_detects_wrong_module():
    """A representation with one flipped sign breaks the operator identity."""
    from e16verma.gmodule import ModuleSpec

    good = vec("vector")
    bad_action = {k: dict(v) for k, v in good.xi_action.items()}
    bad_action[(1, 2)] = {k: -v for k, v in bad_action[(1, 2)].items()}
    bad = ModuleSpec(dim=6, t_scalar=C, xi_action=bad_action, name="broken")
    x = VermaVector.unit(bad, 0, mask_of((3, 4, 5, 6)), 0)
    rep = commutator_oracle((1, 2), (2, 3), x)
    assert not rep["ok"]


def test_commutator_oracle_trivial_identity_pair():
    m = builtin("trivial", Q(4))
    x = VermaVector.unit(m, 1, mask_of((1, 2)), 0)
    rep = commutator_oracle((), (), x)
    assert rep["ok"]


# ---------------------------------------------------------------------------
# coefficient functionals
# ---------------------------------------------------------------------------

def _random_state(module, rng, n_max, n_terms=6):
    data = {}
    for _ in range(n_terms):
        k = rng.randint(0, n_max)
        mask = rng.choice(ALL_MASKS)
        coord = rng.randrange(module.dim)
        fv = data.setdefault((k, mask), {})
        fv[coord] = fv.get(coord, ZERO) + QI(rng.randint(-3, 3), rng.randint(-2, 2))
    return VermaVector(module, data)


def test_functionals_vanish_above_input_theta_degree():
    m = vec("vector")
    x = VermaVector.unit(m, 0, mask_of((1, 2)), 0)
    funcs = coefficient_functionals((3,), x)
    for (fam, p), val in funcs.items():
        if p >= 1:
            assert not val, (fam, p)


def test_functionals_reject_high_theta_degree():
    m = vec("vector")
    x = VermaVector.unit(m, 5, FULL_MASK, 0)
    with pytest.raises(UnsupportedDegreeError):
        coefficient_functionals((1,), x)


def test_functionals_trivial_module_no_c():
    m = builtin("trivial", C)
    rng = random.Random(3)
    x = _random_state(m, rng, 2)
    funcs = coefficient_functionals((1, 2, 3), x)
    for p in range(5):
        assert not funcs[("C", p)]
        assert not funcs[("Cd", p)]


@pytest.mark.parametrize("L", [(), (1,), (3,), (1, 2), (2, 5), (1, 2, 3), (2, 4, 6)])
def test_reconstruction_identity_random_states(L):
    m = vec("vector")
    rng = random.Random(hash(L) & 0xFFFF)
    for n_max in (0, 2, 4):
        x = _random_state(m, rng, n_max)
        funcs = coefficient_functionals(L, x)
        assert reconstruct_from_functionals(funcs, m) == lambda_action_T(L, x)


def test_reconstruction_identity_formal():
    x = formal_state(2, masks=[0, mask_of((1,)), mask_of((2, 3)), FULL_MASK])
    for L in ((), (2,), (1, 3), (4, 5, 6)):
        funcs = coefficient_functionals(L, x)
        assert reconstruct_from_functionals(funcs, FORMAL) == lambda_action_T(L, x)


def test_formal_module_single_layer():
    x = formal_state(1)
    P = lambda_action_T((1, 2), x)
    assert P
    with pytest.raises(ValueError):
        lambda_action_T((1,), P.coefficient(0))


# ---------------------------------------------------------------------------
# mixed coefficients
# ---------------------------------------------------------------------------

def test_mixed_coefficient_theta_example():
    m = vec("vector")
    w = {2: ONE}
    P = ActionPolynomial(m, {0: VermaVector(m, {(1, 0): w})})  # Theta (x) w
    assert mixed_coefficient(P, 0, 1) == {0: w}
    assert mixed_coefficient(P, 1, 0) == {0: {2: -ONE}}
    assert mixed_coefficient(P, 0, 0) == {}


def test_mixed_coefficient_lambda2_theta2_example():
    m = vec("vector")
    w = {0: ONE}
    P = ActionPolynomial(m, {2: VermaVector(m, {(2, 0): w})})
    assert mixed_coefficient(P, 2, 2) == {0: w}
    assert mixed_coefficient(P, 3, 1) == {0: {0: Q(-2)}}
    assert mixed_coefficient(P, 4, 0) == {0: w}
    assert mixed_coefficient(P, 2, 0) == {}


def test_mixed_cells_evaluation_consistency():
    m = vec("vector")
    rng = random.Random(99)
    x = _random_state(m, rng, 3)
    P = lambda_action_T((1, 4), x)
    cells = mixed_cells(P)
    for lam0, mu0 in [(Q(2), Q(5)), (QI(1, 1), Q(-3)), (Q(0), Q(1, 2))]:
        theta0 = mu0 - lam0
        # direct: evaluate lambda, then substitute Theta numerically
        direct: dict[int, dict] = {}
        ev = P.evaluate_lambda(lam0)
        for (k, mask), fv in ev.data.items():
            acc = direct.setdefault(mask, {})
            scale = theta0 ** k if k else ONE
            for c, v in fv.items():
                s = acc.get(c, ZERO) + v * scale
                if s:
                    acc[c] = s
                else:
                    acc.pop(c, None)
        direct = {mask: fv for mask, fv in direct.items() if fv}
        # via cells
        via: dict[int, dict] = {}
        for (a, s_), flat in cells.items():
            w = (lam0 ** a if a else ONE) * (mu0 ** s_ if s_ else ONE)
            for mask, fv in flat.items():
                acc = via.setdefault(mask, {})
                for c, v in fv.items():
                    t = acc.get(c, ZERO) + v * w
                    if t:
                        acc[c] = t
                    else:
                        acc.pop(c, None)
        via = {mask: fv for mask, fv in via.items() if fv}
        assert direct == via


# ---------------------------------------------------------------------------
# rendering / coordinate change
# ---------------------------------------------------------------------------

def _t_forward(vv):
    """T: Theta^k eta_I (x) v -> Theta^k bar(eta_I) (x) v."""
    out = VermaVector(vv.module)
    for (k, mask), fv in vv.data.items():
        sign, comp = eta_bar(mask)
        out = out + VermaVector(vv.module, {(k, comp): fv}).scale(Q(sign))
    return out


def test_t_inverse_round_trip():
    m = vec("vector")
    for mask in ALL_MASKS:
        x = VermaVector.unit(m, 2, mask, 1)
        assert _t_forward(t_inverse(x)) == x
        assert t_inverse(_t_forward(x)) == x


def test_render_strings():
    m = vec("vector")
    x = VermaVector(m, {(1, mask_of((1, 3))): {2: QI(0, 1)}})
    s = render_vermavector(x)
    assert "Theta" in s and "eta[13]" in s and "(i) e2" in s
    y = formal_state(0, masks=[mask_of((2,))])
    assert "v[2,0]" in render_vermavector(y)
    P = lambda_action_T((1,), y)
    assert "lambda" in repr(P) or not P.coeffs


# ---------------------------------------------------------------------------
# matrix slice vs object action
# ---------------------------------------------------------------------------

def test_matrix_slice_matches_object_action():
    m = vec("vector")
    sl = ActionMatrixSlice(m, max_mdeg=8)
    rng = random.Random(17)
    for _ in range(12):
        n_mono = rng.randrange(len(sl.monomials))
        k, i_mask = sl.monomials[n_mono]
        if mdeg(k, i_mask) > 4:
            continue
        coord = rng.randrange(6)
        col = sl.flat(n_mono, coord)
        size = rng.randint(0, 3)
        L_mask = mask_of(tuple(sorted(rng.sample(range(1, 7), size))))
        mats = sl.matrices(L_mask)
        P = lambda_action_T(word_of(L_mask), VermaVector.unit(m, k, i_mask, coord))
        for j, vv in P.coeffs.items():
            re, im = mats[j]
            col_re = re.getcol(col).toarray().ravel()
            col_im = im.getcol(col).toarray().ravel()
            rebuilt = {}
            for flat_idx in col_re.nonzero()[0].tolist() + col_im.nonzero()[0].tolist():
                kk, mm = sl.monomials[flat_idx // 6]
                cc = flat_idx % 6
                rebuilt[(kk, mm, cc)] = QI(
                    int(col_re[flat_idx]), int(col_im[flat_idx])
                ) / Q(sl.den)
            expect = {
                (kk, mm, cc): v
                for (kk, mm), fv in vv.data.items()
                for cc, v in fv.items()
                for kk, mm in [(kk, mm)]
            }
            assert rebuilt == expect


def test_commutator_suite_small():
    m = vec("vector")
    rep = commutator_suite(m, max_input_mdeg=2, max_size=1)
    assert rep["ok"], rep["failures"]
    assert rep["pairs_checked"] == 49
