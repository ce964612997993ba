"""Unit tests for the exact/modular linear algebra helpers."""

import random

import pytest

from e16verma._linalg import (
    ExactRREF,
    ModPEliminator,
    default_screening_prime,
    is_probable_prime,
    modp_residue,
    nullspace,
    rank,
    sqrt_minus_one,
)
from e16verma.exactnum import ONE, Q, QI, ZERO


def test_nullspace_simple_plane():
    # x + y + z = 0 over columns [0,1,2]
    rows = [{0: ONE, 1: ONE, 2: ONE}]
    ker = nullspace(rows, [0, 1, 2])
    assert len(ker) == 2
    for v in ker:
        total = sum((v.get(c, ZERO) for c in (0, 1, 2)), ZERO)
        assert not total


def test_nullspace_unconstrained_column_is_free():
    rows = [{0: ONE, 1: Q(2)}]
    ker = nullspace(rows, [0, 1, 2])
    assert len(ker) == 2
    assert any(v == {2: ONE} for v in ker)


def test_nullspace_rejects_stray_columns():
    with pytest.raises(ValueError):
        nullspace([{5: ONE}], [0, 1])


def test_rank_and_dependent_rows():
    rows = [
        {0: ONE, 1: ONE},
        {0: Q(2), 1: Q(2)},
        {1: QI(0, 1)},
    ]
    assert rank(rows) == 2


def test_exact_rref_kernel_matches_brute_force():
    rng = random.Random(20260817)
    for _ in range(25):
        nrows, ncols = rng.randint(1, 6), rng.randint(1, 6)
        rows = []
        for _ in range(nrows):
            row = {}
            for c in range(ncols):
                if rng.random() < 0.6:
                    row[c] = QI(rng.randint(-3, 3), rng.randint(-2, 2))
            row = {c: v for c, v in row.items() if v}
            if row:
                rows.append(row)
        ker = nullspace(rows, list(range(ncols)))
        #each kernel vector annihilates every row
        for v in ker:
            for row in rows:
                acc = ZERO
                for c, coef in row.items():
                    acc = acc + coef * v.get(c, ZERO)
                assert not acc
        # rank-nullity
        assert rank(rows) + len(ker) == ncols


def test_primality_and_sqrt_minus_one():
    assert is_probable_prime(2147483629)
    assert not is_probable_prime(2147483629 - 2)  # even
    assert is_probable_prime(13)
    r = sqrt_minus_one(13)
    assert r * r % 13 == 12
    p, r = default_screening_prime()
    assert p % 4 == 1
    assert r * r % p == p - 1


def test_modp_residue_and_eliminator_certificate():
    p, r = default_screening_prime()
    x = QI(3, -2)
    res = modp_residue(x, p, r)
    assert res == (3 - 2 * r) % p
    # full-column-rank system: identity 3x3
    elim = ModPEliminator(p)
    for c in range(3):
        assert elim.add_row({c: 1})
    assert elim.nullity(3) == 0
    # singular system keeps positive nullity
    elim = ModPEliminator(p)
    elim.add_row({0: 1, 1: 1})
    elim.add_row({0: 2, 1: 2})
    assert elim.nullity(2) == 1


def test_modp_matches_exact_rank_generically():
    p, r = default_screening_prime()
    rng = random.Random(7)
    for _ in range(20):
        nrows, ncols = rng.randint(1, 5), rng.randint(1, 5)
        rows = []
        for _ in range(nrows):
            row = {
                c: QI(rng.randint(-4, 4), rng.randint(-4, 4))
                for c in range(ncols)
                if rng.random() < 0.7
            }
            rows.append({c: v for c, v in row.items() if v})
        exact = rank(rows)
        elim = ModPEliminator(p)
        for row in rows:
            elim.add_row({c: modp_residue(v, p, r) for c, v in row.items()})
        assert elim.rank <= exact
        # with entries this small, the screening prime never loses rank
        assert elim.rank == exact
