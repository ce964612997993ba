"""The contact superalgebra on C[t] (x) Lambda(6) and the subalgebra E(1,6).

Conventions
-----------
* A ``ContactElement`` is a sparse map ``(t-exponent k, xi-monomial mask) ->
  coefficient`` over Q(i).
* Grading: deg(t^m xi_I) = 2m + |I| - 2; parity = |I| mod 2.
* Bracket on monomials f = t^m xi_I, g = t^n xi_J:

      [f, g] = ((2-|I|) n - m (2-|J|)) t^(m+n-1) xi_I xi_J
               + (-1)^|I| t^(m+n) sum_i (d_i xi_I)(d_i xi_J).

  (This is the contact bracket [f,g] = (2f - sum xi_i d_i f) dt(g)
  - dt(f) (2g - sum xi_i d_i g) + (-1)^p(f) sum_i d_i(f) d_i(g), evaluated
  on monomials where the Euler operator gives |I| f.)
* The linear operator A maps t^k xi_L to
  (-1)^(|L|(|L|+1)/2) (d/dt)^(3-|L|) (t^k xi*_L), where a negative power of
  d/dt means integration in t (t^k -> t^(k+1)/(k+1), constant of
  integration zero).  E(1,6) is the image of (Id - i A); concretely it is
  spanned by the elements (Id - i A)(t^k xi_L) with |L| <= 3.

  For |L| = 3 the spanning family is linearly dependent: complementary
  3-sets give proportional images (A pairs them with opposite signs), so
  the returned *basis* keeps only 3-sets containing the index 1.  The
  resulting graded dimensions are 1 (deg -2), 6 (deg -1), 16 (each deg >= 0).
* The distinguished elements: t (the grading element, degree 0) and
  Theta = -1/2 (degree -2; brackets [Theta, g_i] recover g_(i-2)).
* Cartan subalgebra of the so(6) part: H_l = -i xi_(2l-1, 2l); root
  vectors E_(+-eps_l +- eps_j) are the standard complex combinations of
  xi_(ab) fixed by the defining formulas below; a weight/root is stored as
  an integer triple of eigenvalues (alpha(H_1), alpha(H_2), alpha(H_3)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .exactnum import GaussianRational, IUNIT, ONE, Q, QI, ZERO, scalar_to_text
from .grassmann import (
    ALL_MASKS,
    FULL_MASK,
    MASKS_BY_SIZE,
    N_INDICES,
    derive_mask,
    hodge_modified,
    mask_of,
    mono_product,
    monomial_to_text,
    popcount,
    word_of,
)

__all__ = [
    "ContactElement",
    "contact_bracket",
    "monomial_degree",
    "THETA",
    "GRADING_T",
    "op_A",
    "e16_project",
    "e16_basis",
    "e16_membership",
    "MembershipResult",
    "check_L1_L2_L3",
    "RootDatum",
    "root_datum",
    "check_root_system",
    "check_jacobi_closure",
    "name_jacobi_failures",
]


def monomial_degree(k: int, mask: int) -> int:
    return 2 * k + popcount(mask) - 2


class ContactElement:
    """Sparse element of C[t] (x) Lambda(6): {(t-exp, xi-mask): coefficient}."""

    __slots__ = ("data",)

    def __init__(self, data: dict[tuple[int, int], GaussianRational] | None = None):
        clean: dict[tuple[int, int], GaussianRational] = {}
        if data:
            for (k, mask), coef in data.items():
                if k < 0:
                    raise ValueError("negative t-exponent")
                if not 0 <= mask <= FULL_MASK:
                    raise ValueError("xi-mask out of range")
                coef = coef if isinstance(coef, GaussianRational) else GaussianRational(coef)
                if coef:
                    clean[(k, mask)] = coef
        self.data = clean

    @classmethod
    def monomial(cls, k: int, word_or_mask, coef=ONE) -> "ContactElement":
        mask = word_or_mask if isinstance(word_or_mask, int) else mask_of(word_or_mask)
        return cls({(k, mask): coef})

    def __bool__(self) -> bool:
        return bool(self.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContactElement):
            return NotImplemented
        return self.data == other.data

    def __add__(self, other: "ContactElement") -> "ContactElement":
        out = dict(self.data)
        for key, coef in other.data.items():
            s = out.get(key, ZERO) + coef
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        res = ContactElement.__new__(ContactElement)
        res.data = out
        return res

    def __neg__(self) -> "ContactElement":
        res = ContactElement.__new__(ContactElement)
        res.data = {k: -c for k, c in self.data.items()}
        return res

    def __sub__(self, other: "ContactElement") -> "ContactElement":
        return self + (-other)

    def scale(self, coef) -> "ContactElement":
        coef = coef if isinstance(coef, GaussianRational) else GaussianRational(coef)
        if not coef:
            return ContactElement()
        res = ContactElement.__new__(ContactElement)
        res.data = {k: c * coef for k, c in self.data.items()}
        return res

    def items(self) -> Iterator[tuple[tuple[int, int], GaussianRational]]:
        return iter(sorted(self.data.items()))

    def degrees(self) -> set[int]:
        return {monomial_degree(k, mask) for (k, mask) in self.data}

    def homogeneous_component(self, degree: int) -> "ContactElement":
        res = ContactElement.__new__(ContactElement)
        res.data = {
            (k, mask): c
            for (k, mask), c in self.data.items()
            if monomial_degree(k, mask) == degree
        }
        return res

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def parity(self) -> int | None:
        """0/1 for homogeneous-parity elements, None for mixed, 0 for zero."""
        ps = {popcount(mask) & 1 for (_, mask) in self.data}
        if not ps:
            return 0
        if len(ps) > 1:
            return None
        return ps.pop()

    def __repr__(self) -> str:
        if not self.data:
            return "0"
        parts = []
        for (k, mask), coef in sorted(self.data.items()):
            mono = []
            if k == 1:
                mono.append("t")
            elif k > 1:
                mono.append(f"t^{k}")
            if mask:
                mono.append(monomial_to_text(mask))
            body = " ".join(mono) if mono else "1"
            parts.append(f"({scalar_to_text(coef)}) {body}")
        return " + ".join(parts)


THETA = ContactElement({(0, 0): Q(-1, 2)})
GRADING_T = ContactElement({(1, 0): ONE})


def contact_bracket(f: ContactElement, g: ContactElement) -> ContactElement:
    out: dict[tuple[int, int], GaussianRational] = {}

    def add(key: tuple[int, int], val: GaussianRational) -> None:
        s = out.get(key, ZERO) + val
        if s:
            out[key] = s
        else:
            out.pop(key, None)

    for (m, i_mask), cf in f.data.items():
        size_i = popcount(i_mask)
        for (n, j_mask), cg in g.data.items():
            size_j = popcount(j_mask)
            coef = cf * cg
            # first part: ((2-|I|) n - m (2-|J|)) t^(m+n-1) xi_I xi_J
            factor = (2 - size_i) * n - m * (2 - size_j)
            if factor:
                sign, union = mono_product(i_mask, j_mask)
                if sign:
                    add((m + n - 1, union), coef * Q(factor * sign))
            # second part: (-1)^|I| t^(m+n) sum_i (d_i xi_I)(d_i xi_J)
            shared = i_mask & j_mask
            if shared:
                for bit in range(N_INDICES):
                    if not shared >> bit & 1:
                        continue
                    s1, rest_i = derive_mask(bit + 1, i_mask)
                    s2, rest_j = derive_mask(bit + 1, j_mask)
                    s3, union = mono_product(rest_i, rest_j)
                    if not s3:
                        continue
                    total = s1 * s2 * s3 * (-1 if size_i & 1 else 1)
                    add((m + n, union), coef * Q(total))
    res = ContactElement.__new__(ContactElement)
    res.data = out
    return res


# ---------------------------------------------------------------------------
# the A operator and E(1,6)
# ---------------------------------------------------------------------------

def _tri_sign(size: int) -> int:
    return -1 if (size * (size + 1) // 2) & 1 else 1


def op_A(x: ContactElement) -> ContactElement:
    """A(t^k xi_L) = (-1)^(|L|(|L|+1)/2) (d/dt)^(3-|L|) (t^k xi*_L).

    Negative derivative powers integrate (with zero constant term).
    """
    out = ContactElement()
    for (k, mask), coef in x.data.items():
        size = popcount(mask)
        hsign, comp = hodge_modified(mask)
        power = 3 - size
        c = Fraction(1)
        new_k = k
        if power >= 0:
            for _ in range(power):
                c *= new_k
                new_k -= 1
            if c == 0:
                continue
        else:
            for _ in range(-power):
                new_k += 1
                c /= new_k
        scal = coef * Q(c * hsign * _tri_sign(size))
        out = out + ContactElement({(new_k, comp): scal})
    return out


def e16_project(x: ContactElement) -> ContactElement:
    """(Id - i A)(x); its image spans E(1,6)."""
    return x - op_A(x).scale(IUNIT)


def _basis_generators(degree: int) -> list[tuple[int, int]]:
    """Generator monomials (t-exp, mask) whose projections span degree d."""
    gens: list[tuple[int, int]] = []
    if degree < -2:
        return gens
    for size in range(4):
        k2 = degree - size + 2
        if k2 < 0 or k2 % 2:
            continue
        k = k2 // 2
        for mask in MASKS_BY_SIZE[size]:
            # complementary 3-sets give proportional projections; keep the
            # half containing index 1 so the family is a basis
            if size == 3 and not mask & 1:
                continue
            gens.append((k, mask))
    return gens


@lru_cache(maxsize=None)
def _basis_elements_at_degree(degree: int) -> tuple[ContactElement, ...]:
    return tuple(
        e16_project(ContactElement.monomial(k, mask))
        for k, mask in _basis_generators(degree)
    )


def e16_basis(max_degree: int) -> list[ContactElement]:
    """Graded basis of E(1,6) through max_degree, ordered by degree then
    by (t-exponent, mask) of the generating monomial."""
    if max_degree < -2:
        raise ValueError("max_degree must be at least -2")
    out: list[ContactElement] = []
    for d in range(-2, max_degree + 1):
        out.extend(_basis_elements_at_degree(d))
    return out


@dataclass(frozen=True)
class MembershipResult:
    ok: bool
    # coordinates per degree: {degree: {position in e16_basis(degree slice): coeff}}
    coords: dict[int, dict[int, GaussianRational]]
    residual: "ContactElement"

    def flat_coords(self, max_degree: int) -> dict[int, GaussianRational]:
        """Coordinates indexed by position in e16_basis(max_degree)."""
        offsets = {}
        pos = 0
        for d in range(-2, max_degree + 1):
            offsets[d] = pos
            pos += len(_basis_generators(d))
        flat = {}
        for d, cs in self.coords.items():
            for j, c in cs.items():
                flat[offsets[d] + j] = c
        return flat


@lru_cache(maxsize=None)
def _degree_solver(degree: int):
    """Row-reduced representation of the degree-d basis for coordinate solves.

    Returns (monomial list, list of (pivot position, reduced row dict,
    coordinate combination dict)).  Each reduced row is a dict
    {monomial index: coeff}; the combination dict expresses the reduced row
    as a combination of original basis elements.
    """
    basis = _basis_elements_at_degree(degree)
    monomials = sorted({key for b in basis for key in b.data})
    mono_index = {key: j for j, key in enumerate(monomials)}
    rows: list[tuple[dict[int, GaussianRational], dict[int, GaussianRational]]] = []
    for j, b in enumerate(basis):
        row = {mono_index[key]: coef for key, coef in b.data.items()}
        comb: dict[int, GaussianRational] = {j: ONE}
        for prow, pcomb, ppos in rows:
            if ppos in row:
                factor = row[ppos]
                for col, val in prow.items():
                    s = row.get(col, ZERO) - factor * val
                    if s:
                        row[col] = s
                    else:
                        row.pop(col, None)
                for col, val in pcomb.items():
                    s = comb.get(col, ZERO) - factor * val
                    if s:
                        comb[col] = s
                    else:
                        comb.pop(col, None)
        if not row:
            raise AssertionError(
                f"degree-{degree} spanning family is dependent; basis selection is wrong"
            )
        ppos = min(row)
        inv = row[ppos].inverse()
        row = {c: v * inv for c, v in row.items()}
        comb = {c: v * inv for c, v in comb.items()}
        rows.append((row, comb, ppos))
    return monomials, mono_index, rows


def e16_membership(x: ContactElement, max_degree: int) -> MembershipResult:
    """Decompose x in the graded basis of E(1,6); exact coordinates or a
    failure with the nonzero residual as certificate."""
    coords: dict[int, dict[int, GaussianRational]] = {}
    residual = ContactElement()
    for d in sorted(x.degrees()):
        comp = x.homogeneous_component(d)
        if d < -2 or d > max_degree:
            residual = residual + comp
            continue
        monomials, mono_index, rows = _degree_solver(d)
        vec: dict[int, GaussianRational] = {}
        unknown = ContactElement()
        for key, coef in comp.data.items():
            j = mono_index.get(key)
            if j is None:
                unknown = unknown + ContactElement({key: coef})
            else:
                vec[j] = coef
        dcoords: dict[int, GaussianRational] = {}
        for row, comb, ppos in rows:
            if ppos not in vec:
                continue
            factor = vec[ppos]
            for col, val in row.items():
                s = vec.get(col, ZERO) - factor * val
                if s:
                    vec[col] = s
                else:
                    vec.pop(col, None)
            for col, val in comb.items():
                s = dcoords.get(col, ZERO) + factor * val
                if s:
                    dcoords[col] = s
                else:
                    dcoords.pop(col, None)
        if vec or unknown:
            rem = unknown
            for j, coef in vec.items():
                rem = rem + ContactElement({monomials[j]: coef})
            residual = residual + rem
        if dcoords:
            coords[d] = dcoords
    ok = not residual
    if not ok:
        # report only the residual; partial coordinates are not meaningful
        return MembershipResult(False, {}, residual)
    return MembershipResult(True, coords, ContactElement())


# ---------------------------------------------------------------------------
# structural checks: grading element and Theta-lowering
# ---------------------------------------------------------------------------

def check_L1_L2_L3(max_degree: int) -> dict:
    """Check [t, b] = deg(b) b on the full basis and that [Theta, g_i]
    spans g_(i-2) for 0 <= i <= max_degree (by exact rank)."""
    report: dict = {"max_degree": max_degree, "grading_ok": True, "theta_ok": True,
                    "failures": []}
    for d in range(-2, max_degree + 1):
        basis = _basis_elements_at_degree(d)
        for j, b in enumerate(basis):
            if contact_bracket(GRADING_T, b) != b.scale(Q(d)):
                report["grading_ok"] = False
                report["failures"].append(("grading", d, j))
    for i in range(0, max_degree + 1):
        target_dim = len(_basis_generators(i - 2))
        images = [contact_bracket(THETA, b) for b in _basis_elements_at_degree(i)]
        rows: list[dict[int, GaussianRational]] = []
        rank = 0
        for img in images:
            res = e16_membership(img, max_degree)
            if not res.ok:
                report["theta_ok"] = False
                report["failures"].append(("theta_image_outside", i))
                continue
            row = dict(res.coords.get(i - 2, {}))
            for key, coef in list(res.coords.items()):
                if key != i - 2 and coef:
                    report["theta_ok"] = False
                    report["failures"].append(("theta_image_wrong_degree", i))
            for prow in rows:
                if not row:
                    break
                p = min(prow)
                if p in row:
                    factor = row[p] / prow[p]
                    for col, val in prow.items():
                        s = row.get(col, ZERO) - factor * val
                        if s:
                            row[col] = s
                        else:
                            row.pop(col, None)
            if row:
                rows.append(row)
                rank += 1
        if rank != target_dim:
            report["theta_ok"] = False
            report["failures"].append(("theta_rank", i, rank, target_dim))
    report["ok"] = report["grading_ok"] and report["theta_ok"]
    return report


# ---------------------------------------------------------------------------
# root datum of the so(6) part of degree zero
# ---------------------------------------------------------------------------

Root = tuple[int, int, int]


def _xi(i: int, j: int) -> ContactElement:
    return ContactElement.monomial(0, (i, j))


@dataclass(frozen=True)
class RootDatum:
    """Cartan elements H_l = -i xi_(2l-1,2l) and the twelve root vectors of
    the so(6) part, indexed by integer root triples."""

    cartan: tuple[ContactElement, ContactElement, ContactElement]
    root_vectors: dict[Root, ContactElement]

    @property
    def positive_roots(self) -> list[Root]:
        return [r for r in sorted(self.root_vectors, reverse=True) if _is_positive(r)]

    @property
    def simple_roots(self) -> list[Root]:
        return [(1, -1, 0), (0, 1, -1), (0, 1, 1)]

    def weight_of(self, root: Root, l: int) -> int:
        return root[l - 1]


def _is_positive(root: Root) -> bool:
    for c in root:
        if c > 0:
            return True
        if c < 0:
            return False
    return False


@lru_cache(maxsize=1)
def root_datum() -> RootDatum:
    cartan = tuple(
        _xi(2 * l - 1, 2 * l).scale(QI(0, -1)) for l in (1, 2, 3)
    )
    vectors: dict[Root, ContactElement] = {}
    for l, j in ((1, 2), (1, 3), (2, 3)):
        a, b = 2 * l - 1, 2 * l
        c, d = 2 * j - 1, 2 * j
        minus_ac = _xi(a, c).scale(Q(-1))
        # E_(eps_l - eps_j), E_(eps_l + eps_j) and their negatives
        combos = {
            (1, -1): minus_ac - _xi(b, d) - _xi(a, d).scale(IUNIT) + _xi(b, c).scale(IUNIT),
            (1, 1): minus_ac + _xi(b, d) + _xi(a, d).scale(IUNIT) + _xi(b, c).scale(IUNIT),
            (-1, 1): minus_ac - _xi(b, d) + _xi(a, d).scale(IUNIT) - _xi(b, c).scale(IUNIT),
            (-1, -1): minus_ac + _xi(b, d) - _xi(a, d).scale(IUNIT) - _xi(b, c).scale(IUNIT),
        }
        for (sl, sj), vec in combos.items():
            root = [0, 0, 0]
            root[l - 1] = sl
            root[j - 1] = sj
            vectors[tuple(root)] = vec
    return RootDatum(cartan, vectors)


def check_root_system() -> dict:
    """Verify the Cartan/root relations of the degree-zero so(6) part and
    the dictionary between xi_(ij) and 6x6 skew matrices."""
    rd = root_datum()
    report: dict = {"ok": True, "failures": []}
    # Cartan elements commute
    for a in range(3):
        for b in range(3):
            if contact_bracket(rd.cartan[a], rd.cartan[b]):
                report["ok"] = False
                report["failures"].append(("cartan_commute", a + 1, b + 1))
    # [H_l, E_alpha] = alpha(H_l) E_alpha for all twelve roots
    for root, vec in sorted(rd.root_vectors.items()):
        for l in (1, 2, 3):
            lhs = contact_bracket(rd.cartan[l - 1], vec)
            rhs = vec.scale(Q(root[l - 1]))
            if lhs != rhs:
                report["ok"] = False
                report["failures"].append(("root_eigen", root, l))
    # [E_alpha, E_(-alpha)] lands in the Cartan span
    for root, vec in sorted(rd.root_vectors.items()):
        if not _is_positive(root):
            continue
        neg = rd.root_vectors[tuple(-c for c in root)]
        br = contact_bracket(vec, neg)
        if not _in_cartan_span(br, rd):
            report["ok"] = False
            report["failures"].append(("cartan_pairing", root))
    # xi_(ij) <-> E_(ji) - E_(ij): structure constants match so(6)
    for i in range(1, N_INDICES + 1):
        for j in range(i + 1, N_INDICES + 1):
            for k in range(1, N_INDICES + 1):
                for l in range(k + 1, N_INDICES + 1):
                    br = contact_bracket(_xi(i, j), _xi(k, l))
                    mat = _skew_commutator(i, j, k, l)
                    if br != mat:
                        report["ok"] = False
                        report["failures"].append(("so6_dictionary", (i, j), (k, l)))
    return report


def _in_cartan_span(x: ContactElement, rd: RootDatum) -> bool:
    # solve x = sum c_l H_l exactly; H_l are disjoint monomials xi_(2l-1,2l)
    rem = x
    for l in (1, 2, 3):
        mask = mask_of((2 * l - 1, 2 * l))
        coef = rem.data.get((0, mask))
        if coef:
            rem = rem - rd.cartan[l - 1].scale(coef / QI(0, -1))
    return not rem


def _skew_commutator(i: int, j: int, k: int, l: int) -> ContactElement:
    """Commutator [E_(ji)-E_(ij), E_(lk)-E_(kl)] mapped back to xi-monomials."""
    mat: dict[tuple[int, int], int] = {}

    def m_add(dst, src, s):
        for (r, c), v in src.items():
            dst[(r, c)] = dst.get((r, c), 0) + s * v

    def skew(a, b):
        return {(b, a): 1, (a, b): -1}

    A = skew(i, j)
    B = skew(k, l)
    prod: dict[tuple[int, int], int] = {}
    for (r, c), v in A.items():
        for (r2, c2), v2 in B.items():
            if c == r2:
                prod[(r, c2)] = prod.get((r, c2), 0) + v * v2
    for (r, c), v in B.items():
        for (r2, c2), v2 in A.items():
            if c == r2:
                prod[(r, c2)] = prod.get((r, c2), 0) - v * v2
    out = ContactElement()
    seen = set()
    for (r, c), v in prod.items():
        if v == 0 or (r, c) in seen:
            continue
        seen.add((r, c))
        seen.add((c, r))
        if r == c:
            if v:
                raise AssertionError("so(6) commutator has diagonal part")
            continue
        a, b = min(r, c), max(r, c)
        coef = v if (c, r) == (a, b) else -v  # coefficient of E_(ba) - E_(ab)
        # E_(ba)-E_(ab) corresponds to xi_(ab)
        if coef:
            out = out + ContactElement.monomial(0, (a, b), Q(coef))
    return out


# ---------------------------------------------------------------------------
# Jacobi/closure suite on exact integer structure-constant tensors
# ---------------------------------------------------------------------------

def _lcm(a: int, b: int) -> int:
    import math

    return a * b // math.gcd(a, b)


def _scaled_int_tensor(table: list[list[dict[int, GaussianRational]]], n_out: int):
    """Clear denominators of a structure-constant table into int64 arrays.

    Returns (re, im, den) with table[x][y][e] == (re[x,y,e] + i im[x,y,e])/den.
    """
    import math

    den = 1
    for row in table:
        for cell in row:
            for coef in cell.values():
                den = _lcm(den, coef.re.denominator)
                den = _lcm(den, coef.im.denominator)
    n1 = len(table)
    n2 = len(table[0]) if n1 else 0
    re = np.zeros((n1, n2, n_out), dtype=np.int64)
    im = np.zeros((n1, n2, n_out), dtype=np.int64)
    entries: list[tuple[int, int, int, int, int]] = []
    common = 0
    for x, row in enumerate(table):
        for y, cell in enumerate(row):
            for e, coef in cell.items():
                rnum = coef.re.numerator * (den // coef.re.denominator)
                inum = coef.im.numerator * (den // coef.im.denominator)
                entries.append((x, y, e, rnum, inum))
                common = math.gcd(common, math.gcd(rnum, inum))
    if common > 1 and den % common == 0:
        den //= common
    else:
        common = 1
    for x, y, e, rnum, inum in entries:
        rnum //= common
        inum //= common
        if abs(rnum) >= 2**62 or abs(inum) >= 2**62:
            raise OverflowError("structure constants exceed int64 range")
        re[x, y, e] = rnum
        im[x, y, e] = inum
    return re, im, int(den)


class _StructureTables:
    """Structure constants of E(1,6) in its graded basis, per degree pair."""

    def __init__(self, left_max: int, right_max: int):
        self.left_max = left_max
        self.right_max = right_max
        coord_max = left_max + right_max
        self.dims = {
            d: len(_basis_generators(d)) for d in range(-2, coord_max + 1)
        }
        self.tables: dict[tuple[int, int], tuple[np.ndarray, np.ndarray, int]] = {}
        self.closure_ok = True
        self.closure_failures: list[tuple[int, int, int, int]] = []
        for d1 in range(-2, left_max + 1):
            basis1 = _basis_elements_at_degree(d1)
            for d2 in range(-2, right_max + 1):
                basis2 = _basis_elements_at_degree(d2)
                d_out = d1 + d2
                n_out = self.dims.get(d_out, 0)
                table = [
                    [dict() for _ in range(len(basis2))] for _ in range(len(basis1))
                ]
                for x, bx in enumerate(basis1):
                    for y, by in enumerate(basis2):
                        br = contact_bracket(bx, by)
                        if not br:
                            continue
                        if d_out < -2:
                            self.closure_ok = False
                            self.closure_failures.append((d1, d2, x, y))
                            continue
                        res = e16_membership(br, d_out)
                        if not res.ok or set(res.coords) - {d_out}:
                            self.closure_ok = False
                            self.closure_failures.append((d1, d2, x, y))
                            continue
                        table[x][y] = res.coords.get(d_out, {})
                self.tables[(d1, d2)] = _scaled_int_tensor(table, n_out)

    def table(self, d1: int, d2: int):
        """Table for the ordered degree pair, zero-filled below the grading
        floor (brackets into degree < -2 vanish by the grading)."""
        key = (d1, d2)
        if key not in self.tables:
            if d1 >= -2 and d2 >= -2:
                raise KeyError(f"structure table {key} was not built")
            n1 = self.dims.get(d1, 0)
            n2 = self.dims.get(d2, 0)
            z = np.zeros((n1, n2, 0), dtype=np.int64)
            self.tables[key] = (z, z.copy(), 1)
        return self.tables[key]


def _compose_tables(left, right, order: str):
    """Contract two (re, im, den) integer tensors as complex products.

    Falls back to exact Python-integer (object dtype) arrays whenever the
    int64 product bound could be exceeded.
    """
    lre, lim, lden = left
    rre, rim, rden = right
    lmax = max(int(np.abs(lre).max(initial=0)), int(np.abs(lim).max(initial=0)))
    rmax = max(int(np.abs(rre).max(initial=0)), int(np.abs(rim).max(initial=0)))
    contracted = max(lre.shape[-1], 1)
    if lmax * rmax * contracted >= 2**62:
        lre, lim = lre.astype(object), lim.astype(object)
        rre, rim = rre.astype(object), rim.astype(object)
    re = np.einsum(order, lre, rre) - np.einsum(order, lim, rim)
    im = np.einsum(order, lre, rim) + np.einsum(order, lim, rre)
    return re, im, lden * rden


def check_jacobi_closure(jacobi_degree: int = 4, closure_degree: int = 6) -> dict:
    """Criterion suite for the algebra structure.

    * super-Jacobi on all ordered graded basis triples with degrees <=
      jacobi_degree, checked exactly via denominator-cleared integer
      structure-constant tensors (int64 with exact big-int fallback);
    * closure under the bracket for all ordered basis pairs with degree sum
      <= closure_degree, via exact membership in the graded basis;
    * [t, b] = deg(b) b on every basis element the tables touch, and
      super-skew-symmetry of the bracket on all pairs up to jacobi_degree.
    """
    span = max(2 * jacobi_degree, closure_degree + 2, jacobi_degree)
    tables = _StructureTables(span, span)
    report: dict = {
        "jacobi_degree": jacobi_degree,
        "closure_degree": closure_degree,
        "closure_ok": tables.closure_ok,
        "closure_failures": [
            f for f in tables.closure_failures if f[0] + f[1] <= closure_degree
        ],
        "jacobi_ok": True,
        "jacobi_failures": [],
        "skew_ok": True,
        "grading_ok": True,
        "triples_checked": 0,
        "pairs_closed": 0,
    }
    # every closure failure matters, but only pairs within the requested
    # range gate the criterion; anything worse is still reported
    report["closure_failures_beyond_range"] = [
        f for f in tables.closure_failures if f[0] + f[1] > closure_degree
    ]
    report["closure_ok"] = not report["closure_failures"]
    for d1 in range(-2, span + 1):
        for d2 in range(-2, span + 1):
            if d1 + d2 <= closure_degree:
                report["pairs_closed"] += tables.dims[d1] * tables.dims[d2]

    # super-skew on pairs + grading element, object-level (cheap)
    for d1 in range(-2, span + 1):
        basis1 = _basis_elements_at_degree(d1)
        for b in basis1:
            if contact_bracket(GRADING_T, b) != b.scale(Q(d1)):
                report["grading_ok"] = False
    for d1 in range(-2, jacobi_degree + 1):
        basis1 = _basis_elements_at_degree(d1)
        for d2 in range(-2, jacobi_degree + 1):
            basis2 = _basis_elements_at_degree(d2)
            sgn = -1 if (d1 & 1) and (d2 & 1) else 1
            for bx in basis1:
                for by in basis2:
                    lhs = contact_bracket(bx, by)
                    rhs = contact_bracket(by, bx).scale(Q(-sgn))
                    if lhs != rhs:
                        report["skew_ok"] = False

    # super-Jacobi per ordered degree triple, integer tensor contraction:
    # [a,[b,c]] - [[a,b],c] - (-1)^(p(a)p(b)) [b,[a,c]] = 0
    rng = range(-2, jacobi_degree + 1)
    for d1 in rng:
        n1 = tables.dims[d1]
        if not n1:
            continue
        for d2 in rng:
            n2 = tables.dims[d2]
            if not n2:
                continue
            for d3 in rng:
                n3 = tables.dims[d3]
                if not n3:
                    continue
                sgn = -1 if (d1 & 1) and (d2 & 1) else 1
                # T1[x,y,z,f] = sum_e C23[y,z,e] C1(23)[x,e,f]
                T1 = _compose_tables(
                    tables.table(d2, d3), tables.table(d1, d2 + d3), "yze,xef->xyzf"
                )
                # T2[x,y,z,f] = sum_e C12[x,y,e] C(12)3[e,z,f]
                T2 = _compose_tables(
                    tables.table(d1, d2), tables.table(d1 + d2, d3), "xye,ezf->xyzf"
                )
                # T3[x,y,z,f] = sum_e C13[x,z,e] C2(13)[y,e,f]
                T3 = _compose_tables(
                    tables.table(d1, d3), tables.table(d2, d1 + d3), "xze,yef->xyzf"
                )

                lcm = 1
                for _, _, dv in (T1, T2, T3):
                    lcm = _lcm(lcm, dv)
                acc_re = None
                acc_im = None
                use_object = False
                bound = 0
                for (re, im, dv), s in zip((T1, T2, T3), (1, -1, -sgn)):
                    if not re.size:
                        continue
                    scale = s * (lcm // dv)
                    if re.dtype == object:
                        use_object = True
                    else:
                        m = max(
                            int(np.abs(re).max(initial=0)),
                            int(np.abs(im).max(initial=0)),
                        )
                        bound += m * abs(scale)
                for (re, im, dv), s in zip((T1, T2, T3), (1, -1, -sgn)):
                    if not re.size:
                        continue
                    scale = s * (lcm // dv)
                    if use_object or bound >= 2**62:
                        re = re.astype(object)
                        im = im.astype(object)
                    if acc_re is None:
                        acc_re = re * scale
                        acc_im = im * scale
                    else:
                        acc_re = acc_re + re * scale
                        acc_im = acc_im + im * scale
                report["triples_checked"] += n1 * n2 * n3
                if acc_re is not None and (
                    any(bool(v) for v in acc_re.flat)
                    or any(bool(v) for v in acc_im.flat)
                ):
                    report["jacobi_ok"] = False
                    nz = [
                        idx
                        for idx, (vr, vi) in enumerate(zip(acc_re.flat, acc_im.flat))
                        if vr or vi
                    ]
                    report["jacobi_failures"].append(((d1, d2, d3), nz[:5]))
    report["ok"] = (
        report["jacobi_ok"]
        and report["closure_ok"]
        and report["skew_ok"]
        and report["grading_ok"]
    )
    return report


def name_jacobi_failures(
    degree_triples: Iterable[tuple[int, int, int]], limit: int = 3
) -> list[tuple[str, str, str]]:
    """Rescan the given degree triples object-level and name basis triples
    violating super-Jacobi, as readable monomial strings (at most ``limit``).

    Uses the module-level bracket at call time, so it sees the same function
    the tensor suite saw (including any test instrumentation).
    """
    named: list[tuple[str, str, str]] = []
    for (d1, d2, d3) in degree_triples:
        sgn = -1 if (d1 & 1) and (d2 & 1) else 1
        for bx in _basis_elements_at_degree(d1):
            for by in _basis_elements_at_degree(d2):
                for bz in _basis_elements_at_degree(d3):
                    lhs = contact_bracket(bx, contact_bracket(by, bz))
                    m1 = contact_bracket(contact_bracket(bx, by), bz)
                    m2 = contact_bracket(by, contact_bracket(bx, bz))
                    if lhs != m1 + m2.scale(Q(sgn)):
                        named.append((repr(bx), repr(by), repr(bz)))
                        if len(named) >= limit:
                            return named
    return named
