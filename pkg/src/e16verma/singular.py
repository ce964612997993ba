"""Singular-vector conditions on Ind(F) as exact linear systems.

A vector m = sum_{k<=K} Theta^k sum_I eta_I (x) v_{I,k} (in T-coordinates)
is subjected to the conditions

  S1: all lambda^j coefficients (j >= 2) of the combined polynomial
      Phi_L(lambda) - i (-1)^(|L|(|L|+1)/2) lambda^(3-|L|) Phi_{L*}(lambda)
      vanish, for every L in I< with 0 <= |L| <= 3 (L* the Hodge dual);
  S2: the lambda^1 coefficient vanishes for 1 <= |L| <= 3;
  S3: the lambda^0 coefficient vanishes for |L| = 3;
  S0 (optional): the six positive-root vectors of so(6), evaluated at
      lambda = 0, annihilate m.

Unknowns are the F-coordinates of the v_{I,k}.  Every condition row is
homogeneous in the m-degree 2k + 6 - |I|, so the system splits into blocks
per degree; ``verify_bound`` exploits this with a sound modular screening
(a nonsingular reduction mod p certifies a zero kernel; anything else falls
back to exact elimination over Q(i)).
"""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Iterable, NamedTuple

import numpy as np

from ._linalg import ExactRREF, is_probable_prime, nullspace, sqrt_minus_one
from .contact import root_datum
from .exactnum import GaussianRational, ONE, Q, QI, ZERO, scalar_to_text
from .gmodule import ModuleSpec
from .grassmann import (
    ALL_MASKS,
    FULL_MASK,
    MASKS_BY_SIZE,
    N_INDICES,
    derive_mask,
    hodge_modified,
    mask_of,
    merge_sign,
    mono_product,
    normalize,
    popcount,
    word_of,
)
from .verma import (
    ActionPolynomial,
    FORMAL,
    VermaVector,
    action_terms,
    coefficient_functionals,
    flat_add,
    flat_scale,
    formal_state,
    lambda_action_T,
    mdeg,
    mixed_cells,
    render_vermavector,
    t_inverse,
)

__all__ = [
    "UnknownIndex",
    "ConstraintSystem",
    "combined_action",
    "assemble",
    "assemble_degree_block",
    "kernel",
    "kernel_vector_to_verma",
    "exact_block_kernel",
    "screen_block_zero_kernel",
    "conditions_hold",
    "shape_compliant",
    "verify_bound",
    "singular_vectors",
    "reproduce_proof_steps",
    "audit_technical_identities",
    "SHAPE_SUPPORT",
    "weight_of",
]


class UnknownIndex(NamedTuple):
    k: int
    mask: int
    coord: int


# condition monomials: all L with |L| <= 3, ordered by (size, mask)
CONDITION_MASKS: tuple[int, ...] = tuple(
    m for size in range(4) for m in MASKS_BY_SIZE[size]
)

# allowed (Theta-power, |I|) support of a singular vector, per m-degree;
# degrees 8, 7, 6 appear in the working list of shapes but are emptied by
# the final elimination step, and degrees > 8 carry nothing at all.
SHAPE_SUPPORT: dict[int, frozenset[tuple[int, int]]] = {
    8: frozenset({(2, 2)}),
    7: frozenset({(2, 3)}),
    6: frozenset({(2, 4)}),
    5: frozenset({(2, 5), (1, 3), (0, 1)}),
    4: frozenset({(2, 6), (1, 4), (0, 2)}),
    3: frozenset({(1, 5), (0, 3)}),
    2: frozenset({(1, 6), (0, 4)}),
    1: frozenset({(0, 5)}),
    0: frozenset({(0, 6)}),
}


def _triangle_sign(l: int) -> int:
    return -1 if (l * (l + 1) // 2) & 1 else 1


def combined_action(L: Iterable[int], m: VermaVector) -> ActionPolynomial:
    """Phi_L(lambda) m - i (-1)^(|L|(|L|+1)/2) lambda^(3-|L|) Phi_{L*}(lambda) m
    for |L| <= 3."""
    word = tuple(L)
    sign, sword = normalize(word)
    if sign == 0:
        raise ValueError(f"repeated index in L: {word}")
    l = len(sword)
    if l > 3:
        raise ValueError("the combined condition object needs |L| <= 3")
    l_mask = mask_of(sword)
    d_sign, d_mask = hodge_modified(l_mask)
    main = lambda_action_T(sword, m)
    dual = lambda_action_T(word_of(d_mask), m)
    factor = QI(0, -1) * Q(_triangle_sign(l) * d_sign)
    out = main + dual.scale(factor).shift_lambda(3 - l)
    return out.scale(Q(sign))


@lru_cache(maxsize=None)
def _combined_terms(l_mask: int, i_mask: int) -> tuple:
    """Term list of the combined condition object on eta_I (x) v (k = 0):
    rows (lambda_power, theta_power, out_mask, op, re, im) with Gaussian
    integer coefficients re + i im."""
    l = popcount(l_mask)
    d_sign, d_mask = hodge_modified(l_mask)
    # -i (-1)^(l(l+1)/2) * (dual sign): purely imaginary integer
    dual_im = -_triangle_sign(l) * d_sign
    rows = []
    for (j, dth, om, op, c) in action_terms(l_mask, i_mask):
        rows.append((j, dth, om, op, c, 0))
    for (j, dth, om, op, c) in action_terms(d_mask, i_mask):
        rows.append((j + 3 - l, dth, om, op, 0, c * dual_im))
    return tuple(rows)


def _condition_tag(l_size: int, j_total: int) -> str | None:
    if j_total >= 2:
        return "S1"
    if j_total == 1:
        return "S2" if 1 <= l_size <= 3 else None
    return "S3" if l_size == 3 else None


def _positive_root_pairs() -> list[tuple[int, list[tuple[int, int, GaussianRational]]]]:
    """(root index, [(a, b, coefficient)]) for the six positive-root vectors,
    each a combination of xi_a xi_b monomials."""
    rd = root_datum()
    out = []
    for idx, alpha in enumerate(rd.positive_roots):
        elt = rd.root_vectors[alpha]
        combo = []
        for (k, mask), coeff in sorted(elt.items()):
            if k != 0 or popcount(mask) != 2:
                raise AssertionError("root vector outside Lambda^2")
            a, b = word_of(mask)
            combo.append((a, b, coeff))
        out.append((idx, combo))
    return out


# ---------------------------------------------------------------------------
# per-degree blocks
# ---------------------------------------------------------------------------

class DegreeBlock:
    """All condition rows whose unknowns live in one m-degree.

    Entries are affine in the t-eigenvalue c: value = base + c * t_part,
    with both parts Gaussian integers when the module's matrices are
    integral (the builtin modules are).  Stored as parallel COO arrays for
    the modular screen and rebuilt exactly on demand.
    """

    __slots__ = (
        "degree",
        "columns",
        "row_keys",
        "r_idx",
        "c_idx",
        "b_re",
        "b_im",
        "t_re",
        "t_im",
        "integral",
        "_screen_cache",
    )

    def __init__(self, degree, columns, row_keys, entries, integral):
        self.degree = degree
        self.columns = columns
        self.row_keys = row_keys
        n = len(entries)
        self.r_idx = np.empty(n, dtype=np.int64)
        self.c_idx = np.empty(n, dtype=np.int64)
        self.b_re = np.empty(n, dtype=np.int64)
        self.b_im = np.empty(n, dtype=np.int64)
        self.t_re = np.empty(n, dtype=np.int64)
        self.t_im = np.empty(n, dtype=np.int64)
        for pos, (r, c, br, bi, tr, ti) in enumerate(entries):
            self.r_idx[pos] = r
            self.c_idx[pos] = c
            self.b_re[pos] = br
            self.b_im[pos] = bi
            self.t_re[pos] = tr
            self.t_im[pos] = ti
        self.integral = integral
        self._screen_cache = None

    @property
    def ncols(self) -> int:
        return len(self.columns)

    @property
    def nrows(self) -> int:
        return len(self.row_keys)

    def exact_rows(self, c: GaussianRational):
        """[(row_key, {col_position: GaussianRational})], zero entries and
        empty rows dropped."""
        per_row: dict[int, dict[int, GaussianRational]] = {}
        for pos in range(len(self.r_idx)):
            base = QI(int(self.b_re[pos]), int(self.b_im[pos]))
            tpart = QI(int(self.t_re[pos]), int(self.t_im[pos]))
            val = base + c * tpart
            if not val:
                continue
            per_row.setdefault(int(self.r_idx[pos]), {})[int(self.c_idx[pos])] = val
        out = []
        for r in sorted(per_row):
            row = per_row[r]
            if row:
                out.append((self.row_keys[r], row))
        return out


def _xi_fanout(module: ModuleSpec):
    """fan[(a, b, coord)] -> tuple of (out_coord, GaussianRational), for the
    ordered action of xi_a xi_b on a unit coordinate."""
    fan = {}
    for a in range(1, N_INDICES + 1):
        for b in range(1, N_INDICES + 1):
            if a == b:
                continue
            for coord in range(module.dim):
                out = module.act_xi_pair(a, b, {coord: ONE})
                fan[(a, b, coord)] = tuple(sorted(out.items()))
    return fan


def _module_is_integral(module: ModuleSpec) -> bool:
    for mat in module.xi_action.values():
        for v in mat.values():
            if v.re.denominator != 1 or v.im.denominator != 1:
                return False
    return True


def assemble_degree_block(
    module: ModuleSpec, k_max: int, degree: int, include_S0: bool = False
) -> DegreeBlock:
    """Rows of S1-S3 (and optionally S0) restricted to unknowns of the given
    m-degree.  Row keys are deterministic provenance tuples."""
    columns = [
        UnknownIndex(k, mask, coord)
        for k in range(k_max + 1)
        for mask in ALL_MASKS
        if mdeg(k, mask) == degree
        for coord in range(module.dim)
    ]
    columns.sort()
    col_pos = {u: n for n, u in enumerate(columns)}
    fan = _xi_fanout(module)
    integral = _module_is_integral(module)
    root_pairs = _positive_root_pairs() if include_S0 else ()

    rows_map: dict[tuple, dict[int, list[int]]] = {}

    def scatter(row_key, cpos, c_re, c_im, channel):
        cell = rows_map.setdefault(row_key, {}).setdefault(cpos, [0, 0, 0, 0])
        if channel == 0:
            cell[0] += c_re
            cell[1] += c_im
        else:
            cell[2] += c_re
            cell[3] += c_im

    for u in columns:
        cpos = col_pos[u]
        for l_mask in CONDITION_MASKS:
            l_size = popcount(l_mask)
            for (j, dth, om, op, c_re, c_im) in _combined_terms(l_mask, u.mask):
                kind = op[0]
                for r in range(u.k + 1):
                    j_tot = j + r
                    tag = _condition_tag(l_size, j_tot)
                    if tag is None:
                        continue
                    w = comb(u.k, r)
                    out_k = dth + u.k - r
                    if kind == "id" or kind == "t":
                        key = (tag, l_size, l_mask, j_tot, out_k, om, u.coord)
                        scatter(key, cpos, c_re * w, c_im * w,
                                0 if kind == "id" else 1)
                    else:
                        for out_coord, val in fan[(op[1], op[2], u.coord)]:
                            if val.re.denominator != 1 or val.im.denominator != 1:
                                raise AssertionError(
                                    "non-integral module entries need the "
                                    "exact-only path"
                                )
                            key = (tag, l_size, l_mask, j_tot, out_k, om, out_coord)
                            scatter(
                                key,
                                cpos,
                                int(val.re) * c_re * w - int(val.im) * c_im * w,
                                int(val.re) * c_im * w + int(val.im) * c_re * w,
                                0,
                            )
        if include_S0:
            for idx, combo in root_pairs:
                for a, b, coeff in combo:
                    if coeff.re.denominator != 1 or coeff.im.denominator != 1:
                        raise AssertionError("non-integral root coefficient")
                    ga, gi = int(coeff.re), int(coeff.im)
                    pair_mask = mask_of((a, b))
                    for (j, dth, om, op, c) in action_terms(pair_mask, u.mask):
                        if j != 0:
                            continue
                        kind = op[0]
                        out_k = dth + u.k
                        if kind == "id" or kind == "t":
                            key = ("S0", idx, 0, 0, out_k, om, u.coord)
                            scatter(key, cpos, ga * c, gi * c,
                                    0 if kind == "id" else 1)
                        else:
                            for out_coord, val in fan[(op[1], op[2], u.coord)]:
                                vr, vi = int(val.re), int(val.im)
                                key = ("S0", idx, 0, 0, out_k, om, out_coord)
                                scatter(
                                    key,
                                    cpos,
                                    c * (ga * vr - gi * vi),
                                    c * (ga * vi + gi * vr),
                                    0,
                                )

    row_keys = sorted(rows_map)
    entries = []
    for r, key in enumerate(row_keys):
        for cpos, (br, bi, tr, ti) in sorted(rows_map[key].items()):
            if br or bi or tr or ti:
                entries.append((r, cpos, br, bi, tr, ti))
    return DegreeBlock(degree, tuple(columns), tuple(row_keys), entries, integral)


# a < 2^21 prime congruent to 1 mod 4, small enough that the compressed
# screening products stay far inside int64
def _screening_prime() -> tuple[int, int]:
    p = (1 << 20) + 1
    while True:
        if p % 4 == 1 and is_probable_prime(p):
            return p, sqrt_minus_one(p)
        p += 2


SCREEN_P, SCREEN_R = _screening_prime()


def _dense_rank_modp(mat: np.ndarray, p: int, need: int) -> int:
    """Row-reduce a dense int64 matrix mod p; returns the rank, stopping
    early once it cannot reach `need`."""
    m = mat % p
    nrows, ncols = m.shape
    rank = 0
    row = 0
    for col in range(ncols):
        if ncols - col < need - rank:
            return rank
        piv = None
        for rr in range(row, nrows):
            if m[rr, col]:
                piv = rr
                break
        if piv is None:
            continue
        if piv != row:
            m[[row, piv]] = m[[piv, row]]
        inv = pow(int(m[row, col]), p - 2, p)
        m[row] = (m[row] * inv) % p
        nz = np.nonzero(m[:, col])[0]
        nz = nz[nz != row]
        if nz.size:
            m[nz] = (m[nz] - np.outer(m[nz, col], m[row])) % p
        rank += 1
        row += 1
        if rank == need or row == nrows:
            break
    return rank


def _block_screen_data(block: DegreeBlock):
    """Compressed mod-p images S_b, S_t (complex pairs) with a deterministic
    ncols x nrows compressor; cached on the block."""
    if block._screen_cache is not None:
        return block._screen_cache
    from scipy.sparse import coo_matrix

    p = SCREEN_P
    n, rcount = block.ncols, block.nrows
    rng = np.random.default_rng(0xE16 + 7919 * block.degree + n)
    R = rng.integers(0, p, size=(n, rcount), dtype=np.int64)

    def compress(vals):
        A = coo_matrix(
            ((vals % p).astype(np.int64), (block.r_idx, block.c_idx)),
            shape=(rcount, n),
        ).tocsr()
        return np.asarray((A.T @ R.T).T % p, dtype=np.int64)

    cache = (
        compress(block.b_re),
        compress(block.b_im),
        compress(block.t_re),
        compress(block.t_im),
    )
    block._screen_cache = cache
    return cache


def _modp_scalar(x, p: int) -> int | None:
    num = x.numerator % p
    den = x.denominator % p
    if den == 0:
        return None
    return (num * pow(den, p - 2, p)) % p


def screen_block_zero_kernel(block: DegreeBlock, c: GaussianRational) -> bool:
    """True when the mod-p reduction certifies that the block's kernel at
    t-eigenvalue c is zero.  False means "unknown" (exact path required)."""
    if block.ncols == 0:
        return True
    if not block.integral or block.nrows < block.ncols:
        return False
    p = SCREEN_P
    cre = _modp_scalar(c.re, p)
    cim = _modp_scalar(c.im, p)
    if cre is None or cim is None:
        return False
    sb_re, sb_im, st_re, st_im = _block_screen_data(block)
    s_re = (sb_re + cre * st_re - cim * st_im) % p
    s_im = (sb_im + cre * st_im + cim * st_re) % p
    z = (s_re + SCREEN_R * s_im) % p
    return _dense_rank_modp(z, p, block.ncols) == block.ncols


def exact_block_kernel(block: DegreeBlock, c: GaussianRational):
    """Exact Q(i) kernel basis of the block at t-eigenvalue c, as a list of
    {UnknownIndex: value} maps; back-multiplication re-checked."""
    rows = block.exact_rows(c)
    cols = list(range(block.ncols))
    basis = nullspace([row for _, row in rows], cols)
    out = []
    for vec in basis:
        for _, row in rows:
            acc = ZERO
            for cpos, val in row.items():
                x = vec.get(cpos)
                if x is not None:
                    acc = acc + val * x
            if acc:
                raise AssertionError("kernel residual is nonzero")
        out.append({block.columns[cpos]: val for cpos, val in vec.items()})
    return out


# ---------------------------------------------------------------------------
# global system (spec-shaped API)
# ---------------------------------------------------------------------------

class ConstraintSystem:
    """Global sparse system over Q(i): rows (provenance, {UnknownIndex:
    value}) in deterministic order."""

    __slots__ = ("module", "k_max", "include_S0", "columns", "rows")

    def __init__(self, module, k_max, include_S0, columns, rows):
        self.module = module
        self.k_max = k_max
        self.include_S0 = include_S0
        self.columns = columns
        self.rows = rows

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def to_text(self) -> str:
        lines = [f"columns {self.ncols} rows {self.nrows} kmax {self.k_max}"]
        for key, row in self.rows:
            body = " ".join(
                f"{u.k}:{u.mask}:{u.coord}={scalar_to_text(v)}"
                for u, v in sorted(row.items())
            )
            lines.append(f"{key} | {body}")
        return "\n".join(lines) + "\n"


def assemble(module: ModuleSpec, k_max: int, include_S0: bool = False) -> ConstraintSystem:
    """The full S1-S3 (+S0) system for unknowns with Theta-exponent <= k_max."""
    columns = []
    rows = []
    for degree in range(2 * k_max + N_INDICES + 1):
        block = assemble_degree_block(module, k_max, degree, include_S0)
        columns.extend(block.columns)
        for key, row in block.exact_rows(module.t_scalar):
            rows.append((key, {block.columns[cpos]: v for cpos, v in row.items()}))
    rows.sort(key=lambda kr: kr[0])
    columns.sort()
    return ConstraintSystem(module, k_max, include_S0, tuple(columns), rows)


def kernel(sys: ConstraintSystem):
    """Exact kernel basis of a ConstraintSystem, back-verified."""
    basis = nullspace([row for _, row in sys.rows], list(sys.columns))
    for vec in basis:
        for _, row in sys.rows:
            acc = ZERO
            for u, val in row.items():
                x = vec.get(u)
                if x is not None:
                    acc = acc + val * x
            if acc:
                raise AssertionError("kernel residual is nonzero")
    return basis


def kernel_vector_to_verma(vec: dict, module: ModuleSpec) -> VermaVector:
    data: dict[tuple[int, int], dict] = {}
    for u, val in vec.items():
        data.setdefault((u.k, u.mask), {})[u.coord] = val
    return VermaVector(module, data)


# ---------------------------------------------------------------------------
# soundness / shape / audit checks
# ---------------------------------------------------------------------------

def conditions_hold(vv: VermaVector, include_S0: bool = False) -> bool:
    """Direct re-verification of S1-S3 (and optionally S0) through the
    object-level action, independent of the assembled matrices."""
    for l_mask in CONDITION_MASKS:
        l_size = popcount(l_mask)
        P = combined_action(word_of(l_mask), vv)
        for j, coeff in P.coeffs.items():
            tag = _condition_tag(l_size, j)
            if tag is not None and coeff:
                return False
    if include_S0:
        for _, combo in _positive_root_pairs():
            acc = VermaVector(vv.module)
            for a, b, coeff in combo:
                P = lambda_action_T((a, b) if a < b else (b, a), vv)
                part = P.coefficient(0)
                if a > b:
                    part = part.scale(Q(-1))
                acc = acc + part.scale(coeff)
            if acc:
                return False
    return True


def shape_compliant(vv: VermaVector) -> tuple[bool, bool]:
    """(matches one of the eight degree shapes, satisfies the itemized
    vanishing constraints v_{I,4}=v_{I,3}=0, v_{I,2}=0 for |I|<=4,
    v_{I,1}=0 for |I|<=2, v_{empty,0}=0)."""
    degrees = vv.mdegrees()
    shape_ok = True
    item_ok = True
    for (k, mask) in vv.data:
        size = popcount(mask)
        d = mdeg(k, mask)
        if (k, size) not in SHAPE_SUPPORT.get(d, frozenset()):
            shape_ok = False
        if k >= 3:
            item_ok = False
        elif k == 2 and size <= 4:
            item_ok = False
        elif k == 1 and size <= 2:
            item_ok = False
        elif k == 0 and size == 0:
            item_ok = False
    if len(degrees) > 1:
        shape_ok = False
    return shape_ok, item_ok


def _fam(funcs, name, p):
    return funcs.get((name, p), {})


def _combo(funcs, *parts):
    """parts: (coefficient, family, p).  Returns the flat combination."""
    out: dict = {}
    for coeff, name, p in parts:
        out = flat_add(out, flat_scale(_fam(funcs, name, p), coeff))
    return out


MINUS_I = QI(0, -1)


def audit_technical_identities(vv: VermaVector, check_all_L3: bool = True) -> dict:
    """The coefficient identities that hold on any S1-S3 solution:

    (i)   for L = (j): B0+b1 = B1+a1+2b2 = 2a2+B2+3b3 = 3a3+B3+4b4
          = 4a4+B4 = 0;
    (ii)  for |L| = 3: the same five blocks minus i times the dual blocks;
    (iii) for |L| = 3: the lambda^0 blocks b0 - i bd0, (a_{p-1}+b_p)
          - i(ad_{p-1}+bd_p) for p = 1..4, and a4 - i ad4;
    (iv)  for L = (): C3+4B4+6a4, C2+3a3+3B3+6b4,
          2C3+2(B4-a4)-i(ad1+bd2), 4C2+3B3-3a3-3i ad0-3i bd1,
          C3-2i Bd1-2i bd2, C2-6i Bd0+3i ad0-3i bd1,
          10Cd0+4Bd1-3ad1+bd2 — all zero.
    """
    failures = []

    def expect_zero(label, flat):
        if flat:
            failures.append(label)

    def blocks(funcs, dual: bool):
        suffix = "d" if dual else ""
        a, b, B = "a" + suffix, "b" + suffix, "B" + suffix
        yield _combo(funcs, (ONE, B, 0), (ONE, b, 1))
        yield _combo(funcs, (ONE, B, 1), (ONE, a, 1), (Q(2), b, 2))
        yield _combo(funcs, (Q(2), a, 2), (ONE, B, 2), (Q(3), b, 3))
        yield _combo(funcs, (Q(3), a, 3), (ONE, B, 3), (Q(4), b, 4))
        yield _combo(funcs, (Q(4), a, 4), (ONE, B, 4))

    # (i)
    for j in range(1, N_INDICES + 1):
        funcs = coefficient_functionals((j,), vv)
        for p, blk in enumerate(blocks(funcs, dual=False)):
            expect_zero(("i", j, p), blk)

    # (ii) + (iii)
    l3 = MASKS_BY_SIZE[3] if check_all_L3 else MASKS_BY_SIZE[3][:4]
    for l_mask in l3:
        word = word_of(l_mask)
        funcs = coefficient_functionals(word, vv)
        for p, (blk, dblk) in enumerate(
            zip(blocks(funcs, dual=False), blocks(funcs, dual=True))
        ):
            expect_zero(("ii", word, p), flat_add(blk, flat_scale(dblk, MINUS_I)))
        lam0 = [
            _combo(funcs, (ONE, "b", 0), (MINUS_I, "bd", 0)),
        ]
        for p in range(1, 5):
            lam0.append(
                _combo(
                    funcs,
                    (ONE, "a", p - 1),
                    (ONE, "b", p),
                    (MINUS_I, "ad", p - 1),
                    (MINUS_I, "bd", p),
                )
            )
        lam0.append(_combo(funcs, (ONE, "a", 4), (MINUS_I, "ad", 4)))
        for p, blk in enumerate(lam0):
            expect_zero(("iii", word, p), blk)

    # (iv)
    funcs = coefficient_functionals((), vv)
    m3i = Q(3) * MINUS_I
    iv_list = [
        _combo(funcs, (ONE, "C", 3), (Q(4), "B", 4), (Q(6), "a", 4)),
        _combo(funcs, (ONE, "C", 2), (Q(3), "a", 3), (Q(3), "B", 3), (Q(6), "b", 4)),
        _combo(
            funcs,
            (Q(2), "C", 3), (Q(2), "B", 4), (Q(-2), "a", 4),
            (MINUS_I, "ad", 1), (MINUS_I, "bd", 2),
        ),
        _combo(
            funcs,
            (Q(4), "C", 2), (Q(3), "B", 3), (Q(-3), "a", 3),
            (m3i, "ad", 0), (m3i, "bd", 1),
        ),
        _combo(funcs, (ONE, "C", 3), (Q(2) * MINUS_I, "Bd", 1), (Q(2) * MINUS_I, "bd", 2)),
        _combo(
            funcs,
            (ONE, "C", 2), (Q(6) * MINUS_I, "Bd", 0),
            (Q(-3) * MINUS_I, "ad", 0), (m3i, "bd", 1),
        ),
        _combo(
            funcs,
            (Q(10), "Cd", 0), (Q(4), "Bd", 1), (Q(-3), "ad", 1), (ONE, "bd", 2),
        ),
    ]
    for n, blk in enumerate(iv_list):
        expect_zero(("iv", n), blk)

    return {"ok": not failures, "failures": failures}


def weight_of(vv: VermaVector) -> tuple | None:
    """If vv is a simultaneous eigenvector of H_1, H_2, H_3 (acting at
    lambda = 0), the eigenvalue triple; otherwise None."""
    weights = []
    for l in (1, 2, 3):
        a, b = 2 * l - 1, 2 * l
        P = lambda_action_T((a, b), vv)
        img = P.coefficient(0).scale(MINUS_I)  # H_l = -i xi_{2l-1,2l}
        mu = None
        for (key, fv) in vv.data.items():
            for coord, val in fv.items():
                got = img.data.get(key, {}).get(coord, ZERO)
                cand = got / val
                if mu is None:
                    mu = cand
                elif mu != cand:
                    return None
        if img != vv.scale(mu if mu is not None else ZERO):
            return None
        weights.append(mu if mu is not None else ZERO)
    return tuple(weights)


# ---------------------------------------------------------------------------
# the main verification entry point
# ---------------------------------------------------------------------------

def verify_bound(
    module: ModuleSpec,
    k_max: int = 5,
    t_scan: Iterable[GaussianRational] | None = None,
    audit: bool = True,
    collect_vectors: bool = False,
    progress=None,
    include_S0: bool = False,
) -> dict:
    """For each t-eigenvalue in the scan, compute the kernel of the S1-S3
    system per m-degree and check each kernel basis vector against the
    structural constraints and degree shapes of the main bound.

    Returns a report; report["ok"] is True iff every homogeneous kernel
    component complies and (when audit) all coefficient identities hold.
    With ``include_S0`` the highest-weight rows are added as well, which can
    only shrink each kernel.
    """
    if t_scan is None:
        t_scan = [Q(n) for n in range(-10, 11)]
    t_scan = list(t_scan)
    max_degree = 2 * k_max + N_INDICES
    blocks = []
    for degree in range(max_degree + 1):
        blocks.append(
            assemble_degree_block(module, k_max, degree, include_S0=include_S0)
        )
        if progress:
            progress(f"assembled degree {degree}: "
                     f"{blocks[-1].nrows} rows x {blocks[-1].ncols} cols")
    report = {
        "module": module.name,
        "k_max": k_max,
        "t_scan": [scalar_to_text(c) for c in t_scan],
        "per_c": {},
        "counterexamples": [],
        "ok": True,
    }
    for c in t_scan:
        mod_c = ModuleSpec(
            dim=module.dim, t_scalar=c, xi_action=module.xi_action, name=module.name
        )
        entry = {"degrees": {}, "kernel_total": 0}
        for block in blocks:
            d = block.degree
            if screen_block_zero_kernel(block, c):
                entry["degrees"][d] = {"kernel_dim": 0, "screened": True}
                continue
            basis = exact_block_kernel(block, c)
            info = {
                "kernel_dim": len(basis),
                "screened": False,
                "shape_ok": True,
                "constraints_ok": True,
                "audit_ok": True,
            }
            if collect_vectors:
                info["vectors"] = []
            for vec in basis:
                vv = kernel_vector_to_verma(vec, mod_c)
                if not conditions_hold(vv, include_S0=include_S0):
                    raise AssertionError(
                        "assembled kernel fails direct condition re-check"
                    )
                shape_ok, item_ok = shape_compliant(vv)
                ok_here = shape_ok and item_ok
                audit_rep = None
                if audit and ok_here:
                    audit_rep = audit_technical_identities(vv)
                    if not audit_rep["ok"]:
                        ok_here = False
                        info["audit_ok"] = False
                if not shape_ok:
                    info["shape_ok"] = False
                if not item_ok:
                    info["constraints_ok"] = False
                if not ok_here:
                    report["ok"] = False
                    report["counterexamples"].append(
                        {
                            "module": module.name,
                            "t_scalar": scalar_to_text(c),
                            "degree": d,
                            "shape_ok": shape_ok,
                            "constraints_ok": item_ok,
                            "audit_failures": (
                                audit_rep["failures"] if audit_rep else []
                            ),
                            "vector_T": render_vermavector(vv),
                            "vector_m": render_vermavector(t_inverse(vv)),
                        }
                    )
                if collect_vectors:
                    info["vectors"].append(vv)
            entry["degrees"][d] = info
            entry["kernel_total"] += len(basis)
        report["per_c"][scalar_to_text(c)] = entry
        if progress:
            progress(f"t = {scalar_to_text(c)}: kernel total {entry['kernel_total']}")
    return report


def singular_vectors(
    module: ModuleSpec, k_max: int = 5, include_S0: bool = True
) -> list[dict]:
    """Explicit kernel vectors of the full system (with S0 by default),
    with degrees, weights, and both coordinate renderings."""
    out = []
    max_degree = 2 * k_max + N_INDICES
    for degree in range(max_degree + 1):
        block = assemble_degree_block(module, k_max, degree, include_S0)
        if screen_block_zero_kernel(block, module.t_scalar):
            continue
        for vec in exact_block_kernel(block, module.t_scalar):
            vv = kernel_vector_to_verma(vec, module)
            if not conditions_hold(vv, include_S0=include_S0):
                raise AssertionError("kernel fails direct condition re-check")
            out.append(
                {
                    "degree": degree,
                    "weight": weight_of(vv),
                    "vector": vv,
                    "vector_T": render_vermavector(vv),
                    "vector_m": render_vermavector(t_inverse(vv)),
                }
            )
    return out


# ---------------------------------------------------------------------------
# proof-step reproduction
# ---------------------------------------------------------------------------

def _sym_v(k, mask):
    return ("v", k, mask)


def _sym_t(k, mask):
    return ("t", k, mask)


def _sym_x(a, b, k, mask):
    if a < b:
        return ("x", a, b, k, mask), 1
    return ("x", b, a, k, mask), -1


def _flat_put(out, mask, sym, coeff):
    if not coeff:
        return
    tgt = out.setdefault(mask, {})
    cur = tgt.get(sym, ZERO) + coeff
    if cur:
        tgt[sym] = cur
    else:
        tgt.pop(sym, None)
        if not tgt:
            out.pop(mask, None)


def _sign_1_plus_I(size: int) -> int:
    return -1 if (1 + size) & 1 else 1


_D1_MASK = mask_of((2, 3, 4, 5, 6))  # the Hodge dual monomial of xi_1


def _alfa(s: int):
    """sum_I (-1)^(1+|I|) [ -3 (xi_23456 * eta_I) (x) v_{I,s+2}
    + (xi_23456 * eta_I) (x) t.v_{I,s+2}
    + sum_l d_l (xi_23456l * eta_I) (x) v_{I,s+2}
    - sum_{l != j} (d_l xi_23456j * eta_I) (x) xi_jl . v_{I,s+2} ]"""
    out: dict = {}
    k = s + 2
    for i_mask in ALL_MASKS:
        sg = _sign_1_plus_I(popcount(i_mask))
        star, u = mono_product(_D1_MASK, i_mask)
        if star:
            _flat_put(out, u, _sym_v(k, i_mask), Q(-3 * sg * star))
            _flat_put(out, u, _sym_t(k, i_mask), Q(sg * star))
        # sum_l d_l (xi_23456 l * eta_I): only l = 1 extends the monomial
        app = merge_sign(_D1_MASK, 1)  # bit of index 1
        full_star, fu = mono_product(FULL_MASK, i_mask)
        if full_star:
            d_sign, om = derive_mask(1, fu)
            _flat_put(out, om, _sym_v(k, i_mask),
                      Q(sg * app * full_star * d_sign))
        # - sum_{l != j} (d_l xi_23456 j * eta_I) (x) xi_jl . v: j = 1 only
        appj = merge_sign(_D1_MASK, 1)
        lj = FULL_MASK
        for l in word_of(_D1_MASK):
            s_l, ml = derive_mask(l, lj)
            star2, u2 = mono_product(ml, i_mask)
            if not star2:
                continue
            sym, sgn_x = _sym_x(1, l, k, i_mask)  # xi_{j l} = xi_{1 l}
            _flat_put(out, u2, sym, Q(-sg * appj * s_l * star2 * sgn_x))
    return out


def _beta(s: int):
    """sum_I (-1)^(1+|I|) { -sum_{l<j} (xi_1lj * eta_I) (x) xi_jl . v_{I,s+2}
    + 3i (xi_23456 * eta_I) (x) v_{I,s+1}
    + i [ sum_l (d_l xi_23456 * d_l eta_I) (x) v_{I,s+2}
          - sum_{r<p} (d_r d_p xi_23456 * eta_I) (x) xi_pr . v_{I,s+2} ] }"""
    out: dict = {}
    k = s + 2
    iu = QI(0, 1)
    for i_mask in ALL_MASKS:
        sg = Q(_sign_1_plus_I(popcount(i_mask)))
        for l in range(2, N_INDICES + 1):
            for j in range(l + 1, N_INDICES + 1):
                lm = mask_of((1, l, j))
                star, u = mono_product(lm, i_mask)
                if not star:
                    continue
                app = merge_sign(1, mask_of((l, j)))  # xi_1 xi_l xi_j ordered
                sym, sgn_x = _sym_x(j, l, k, i_mask)
                _flat_put(out, u, sym, sg * Q(-star * app * sgn_x))
        star, u = mono_product(_D1_MASK, i_mask)
        if star:
            _flat_put(out, u, _sym_v(s + 1, i_mask), sg * Q(3 * star) * iu)
        for l in word_of(_D1_MASK & i_mask):
            s1, lm = derive_mask(l, _D1_MASK)
            s2, im = derive_mask(l, i_mask)
            star2, u2 = mono_product(lm, im)
            if star2:
                _flat_put(out, u2, _sym_v(k, i_mask), sg * Q(s1 * s2 * star2) * iu)
        dword = word_of(_D1_MASK)
        for a in range(len(dword)):
            for b in range(a + 1, len(dword)):
                r, pp = dword[a], dword[b]
                s_p, m1 = derive_mask(pp, _D1_MASK)
                s_r, m2 = derive_mask(r, m1)
                star3, u3 = mono_product(m2, i_mask)
                if not star3:
                    continue
                sym, sgn_x = _sym_x(pp, r, k, i_mask)
                _flat_put(out, u3, sym, sg * Q(-s_p * s_r * star3 * sgn_x) * iu)
    return out


def _gamma(s: int):
    """sum_I (-1)^(1+|I|) [ (xi_1 * eta_I) (x) v_{I,s+2}
    + (xi_1 * eta_I) (x) t.v_{I,s+2}
    + sum_l d_l (xi_1l * eta_I) (x) v_{I,s+2}
    - sum_{j != 1} (xi_j * eta_I) (x) xi_j1 . v_{I,s+2} ]"""
    out: dict = {}
    k = s + 2
    one_mask = 1
    for i_mask in ALL_MASKS:
        sg = _sign_1_plus_I(popcount(i_mask))
        star, u = mono_product(one_mask, i_mask)
        if star:
            _flat_put(out, u, _sym_v(k, i_mask), Q(sg * star))
            _flat_put(out, u, _sym_t(k, i_mask), Q(sg * star))
        for l in range(2, N_INDICES + 1):
            lm = mask_of((1, l))
            star2, u2 = mono_product(lm, i_mask)
            if not star2:
                continue
            d_sign, om = derive_mask(l, u2)
            _flat_put(out, om, _sym_v(k, i_mask), Q(sg * star2 * d_sign))
        for j in range(2, N_INDICES + 1):
            jm = 1 << (j - 1)
            star3, u3 = mono_product(jm, i_mask)
            if not star3:
                continue
            sym, sgn_x = _sym_x(j, 1, k, i_mask)
            _flat_put(out, u3, sym, Q(-sg * star3 * sgn_x))
    return out


def _delta(s: int):
    """sum_I (-1)^(1+|I|) [ (xi_1 * eta_I) (x) v_{I,s+1}
    - d_1 eta_I (x) v_{I,s+2} ]"""
    out: dict = {}
    for i_mask in ALL_MASKS:
        sg = _sign_1_plus_I(popcount(i_mask))
        star, u = mono_product(1, i_mask)
        if star:
            _flat_put(out, u, _sym_v(s + 1, i_mask), Q(sg * star))
        d_sign, om = derive_mask(1, i_mask)
        if d_sign:
            _flat_put(out, om, _sym_v(s + 2, i_mask), Q(-sg * d_sign))
    return out


def _flat_columns(flat):
    return {(mask, sym) for mask, fv in flat.items() for sym in fv}


def _flat_as_row(flat):
    return {(mask, sym): v for mask, fv in flat.items() for sym, v in fv.items()}


def _reduces_to_zero(target, generators) -> bool:
    """target and generators are flat elements; True iff target lies in the
    Q(i)-span of the generators."""
    rref = ExactRREF()
    for g in generators:
        rref.add_row(_flat_as_row(g))
    residue = rref.reduce(_flat_as_row(target))
    return not residue


def _theta_layer(vv: VermaVector, p: int):
    out: dict = {}
    for (k, mask), fv in vv.data.items():
        if k == p:
            out[mask] = dict(fv)
    return out


def _flat_eq(x, y) -> bool:
    return _flat_as_row(x) == _flat_as_row(y)


def reproduce_proof_steps(verbose: bool = False) -> dict:
    """Reproduce the extraction steps of the degree-bound proof on a generic
    symbolic vector; every comparison is exact.  Returns a report with one
    entry per step."""
    steps: dict[str, bool] = {}
    detail: dict[str, str] = {}

    def record(name: str, ok: bool, note: str = ""):
        steps[name] = bool(ok)
        if note:
            detail[name] = note

    # -- mixed-basis extraction of the four displayed equation families ----
    m6 = formal_state(6)
    P = combined_action((1,), m6)
    d2 = ActionPolynomial(
        FORMAL,
        {j - 2: vv.scale(Q(j * (j - 1))) for j, vv in P.coeffs.items() if j >= 2},
    )
    cells = mixed_cells(d2)
    alfa = {s: _alfa(s) for s in range(0, 5)}
    beta = {s: _beta(s) for s in range(1, 5)}
    gamma = {s: _gamma(s) for s in range(2, 5)}

    ok_alfa = True
    for s in range(0, 5):
        raw = cells.get((3, s), {})
        want = flat_scale(alfa[s], QI(0, (s + 1) * (s + 2)))
        if not _flat_eq(raw, want):
            ok_alfa = False
    record("alfa", ok_alfa)

    span_a = list(alfa.values())
    ok_beta = True
    for s in range(1, 5):
        raw = cells.get((2, s), {})
        diff = flat_add(raw, flat_scale(beta[s], Q(-(s + 1) * (s + 2))))
        if not _reduces_to_zero(diff, span_a):
            ok_beta = False
    record("beta", ok_beta)

    span_ab = span_a + list(beta.values())
    ok_gamma = True
    for s in range(2, 5):
        raw = cells.get((1, s), {})
        diff = flat_add(raw, flat_scale(gamma[s], Q(-(s + 1) * (s + 2))))
        if not _reduces_to_zero(diff, span_ab):
            ok_gamma = False
    record("gamma", ok_gamma)

    ok_delta = True
    delta_note = ""
    for s in range(3, 5):
        raw = cells.get((0, s), {})
        dd = _delta(s)
        diff = flat_add(raw, flat_scale(dd, Q((s + 1) * (s + 2))))
        if not _reduces_to_zero(diff, [beta[s - 2], gamma[s - 1]]):
            ok_delta = False
        # structure: every output monomial of delta carries exactly one
        # symbol with a unit coefficient; the eta_23456 coefficient is
        # v_{*,s+2}
        for mask, fv in dd.items():
            if len(fv) != 1:
                ok_delta = False
                delta_note = f"output eta[{mask}] not a single symbol"
        top = dd.get(_D1_MASK, {})
        if top != {_sym_v(s + 2, FULL_MASK): ONE}:
            ok_delta = False
            delta_note = "eta_23456 coefficient is not v_{*,s+2}"
    record("delta", ok_delta, delta_note)

    # -- the S2 blocks for L = (j): action route == functional route -------
    m4 = formal_state(4)
    empty = 0

    def s2_blocks(funcs):
        return [
            _combo(funcs, (ONE, "B", 0), (ONE, "b", 1)),
            _combo(funcs, (ONE, "B", 1), (ONE, "a", 1), (Q(2), "b", 2)),
            _combo(funcs, (Q(2), "a", 2), (ONE, "B", 2), (Q(3), "b", 3)),
            _combo(funcs, (Q(3), "a", 3), (ONE, "B", 3), (Q(4), "b", 4)),
            _combo(funcs, (Q(4), "a", 4), (ONE, "B", 4)),
        ]

    ok_threeway = True
    funcs_j = {}
    for j in range(1, N_INDICES + 1):
        funcs = coefficient_functionals((j,), m4)
        funcs_j[j] = funcs
        lam1 = lambda_action_T((j,), m4).coefficient(1)
        for p, blk in enumerate(s2_blocks(funcs)):
            if not _flat_eq(_theta_layer(lam1, p), blk):
                ok_threeway = False
    record("s2-blocks-threeway", ok_threeway)

    # -- tecres rows --------------------------------------------------------
    ok_t1 = ok_t2 = ok_t3 = True
    ok_vj1 = ok_vj2 = ok_vjl1 = True
    for j in range(1, N_INDICES + 1):
        jm = 1 << (j - 1)
        blks = s2_blocks(funcs_j[j])
        # coefficient of eta_j: the three t-eigenvalue rows (as extracted,
        # each is minus the displayed row)
        if blks[1].get(jm, {}) != {_sym_t(1, empty): -ONE, _sym_v(1, empty): Q(6)}:
            ok_t1 = False
        if blks[0].get(jm, {}) != {_sym_t(0, empty): -ONE, _sym_v(0, empty): Q(5)}:
            ok_t2 = False
        if blks[2].get(jm, {}) != {_sym_t(2, empty): -ONE, _sym_v(2, empty): Q(7)}:
            ok_t3 = False
        # coefficient of the empty monomial: v_{j,1} and 2 v_{j,2}
        if blks[0].get(empty, {}) != {_sym_v(1, jm): ONE}:
            ok_vj1 = False
        if blks[1].get(empty, {}) != {_sym_v(2, jm): Q(2)}:
            ok_vj2 = False
        # coefficient of eta_l (l != j): -v_{jl,1} + xi_{lj}.v_{empty,0}
        # (displayed for j < l; for l < j the row flips sign as a whole --
        # what matters is that the v_{jl,1} coefficient is a unit, so that
        # v_{empty,0} = 0 forces v_{jl,1} = 0)
        for l in range(1, N_INDICES + 1):
            if l == j:
                continue
            lm = 1 << (l - 1)
            got = blks[0].get(lm, {})
            v_sym = _sym_v(1, jm | lm)
            sym_x, sgn_x = _sym_x(l, j, 0, empty)
            if j < l:
                if got != {v_sym: -ONE, sym_x: Q(sgn_x)}:
                    ok_vjl1 = False
            else:
                cv = got.get(v_sym, ZERO)
                if cv not in (ONE, -ONE) or set(got) != {v_sym, sym_x}:
                    ok_vjl1 = False
    record("tecres", ok_t1)
    record("tecres2", ok_t2)
    record("tecres3", ok_t3)
    record("row-vj1", ok_vj1)
    record("row-vj2", ok_vj2)
    record("row-vjl1", ok_vjl1)

    # -- |L| = 3 rows and the eigenvalue pairing ----------------------------
    ok_l3 = True
    ok_force = True
    for lw in ((1, 2, 3), (2, 4, 6), (1, 4, 5)):
        l_mask = mask_of(lw)
        funcs3 = coefficient_functionals(lw, m4)
        mixed = mixed_cells(lambda_action_T(lw, m4))
        rows_l3 = {}
        for p in range(3):
            bp_ap = _combo(funcs3, (ONE, "B", p), (-ONE, "a", p))
            # mixed cell (lambda^1, mu^p) must equal B_p - a_p
            if not _flat_eq(mixed.get((1, p), {}), bp_ap):
                ok_l3 = False
            rows_l3[p] = bp_ap.get(l_mask, {})
        if rows_l3[1] != {_sym_t(1, empty): ONE, _sym_v(1, empty): Q(-4)}:
            ok_l3 = False
        if rows_l3[0] != {_sym_t(0, empty): ONE, _sym_v(0, empty): Q(-4)}:
            ok_l3 = False
        if rows_l3[2] != {_sym_t(2, empty): ONE, _sym_v(2, empty): Q(-4)}:
            ok_l3 = False
        # pairing with the tecres rows (t-eigenvalues 5, 6, 7 against 4)
        tec_rows = {
            0: {_sym_t(0, empty): -ONE, _sym_v(0, empty): Q(5)},
            1: {_sym_t(1, empty): -ONE, _sym_v(1, empty): Q(6)},
            2: {_sym_t(2, empty): -ONE, _sym_v(2, empty): Q(7)},
        }
        for p in range(3):
            rref = ExactRREF()
            rref.add_row(dict(tec_rows[p]))
            rref.add_row(dict(rows_l3[p]))
            if rref.rank != 2:
                ok_force = False
    record("l3-rows", ok_l3)
    record("force-v-empty", ok_force)

    # -- final step: b2(j) and its linear independence ----------------------
    top = VermaVector(
        FORMAL,
        {
            (2, mask): {_sym_v(2, mask): ONE}
            for size in (2, 3, 4)
            for mask in MASKS_BY_SIZE[size]
        },
    )
    ok_b2 = True
    killed = set()
    for j in range(1, N_INDICES + 1):
        funcs = coefficient_functionals((j,), top)
        blk = _combo(funcs, (ONE, "B", 1), (ONE, "a", 1), (Q(2), "b", 2))
        want: dict = {}
        for size in (2, 3, 4):
            for i_mask in MASKS_BY_SIZE[size]:
                d_sign, om = derive_mask(j, i_mask)
                if d_sign:
                    _flat_put(
                        want, om, _sym_v(2, i_mask),
                        Q(2 * _sign_1_plus_I(size) * d_sign),
                    )
        if not _flat_eq(blk, want):
            ok_b2 = False
        # one symbol per output monomial -> linear independence
        for mask, fv in blk.items():
            if len(fv) != 1:
                ok_b2 = False
            for sym in fv:
                killed.add(sym)
    expected_kill = {
        _sym_v(2, mask) for size in (2, 3, 4) for mask in MASKS_BY_SIZE[size]
    }
    if killed != expected_kill:
        ok_b2 = False
    record("b2-linear-independence", ok_b2)

    report = {"ok": all(steps.values()), "steps": steps}
    if verbose:
        report["detail"] = detail
    return report
