"""Exact arithmetic over the Gaussian rationals Q(i) and sparse bivariate
polynomials in two commuting formal variables.

Conventions
-----------
* A ``GaussianRational`` stores real and imaginary parts as
  :class:`fractions.Fraction`, i.e. always in lowest terms with positive
  denominator.  There is no floating-point mode anywhere in this package.
* A ``BiPoly`` is a sparse polynomial in the pair of central formal
  variables ``(lam, theta)``; zero coefficients are never stored.
* ``bipoly_rebase`` rewrites a polynomial from the ``(lam, theta)`` basis to
  the ``(lam, mu)`` basis where ``mu = lam + theta`` (substitute
  ``theta = mu - lam``); ``bipoly_rebase_inverse`` undoes it.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Iterator, TypeVar

__all__ = [
    "GaussianRational",
    "Q",
    "QI",
    "ZERO",
    "ONE",
    "IUNIT",
    "gr_add",
    "gr_mul",
    "gr_inv",
    "scalar_to_text",
    "scalar_from_text",
    "BiPoly",
    "bipoly_rebase",
    "bipoly_rebase_inverse",
    "rebase_cells",
]


class GaussianRational:
    """An element a + b*i of Q(i) with exact rational components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im:
                raise ValueError("cannot combine a GaussianRational with an imaginary part")
            object.__setattr__(self, "re", re.re)
            object.__setattr__(self, "im", re.im)
            return
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    # The two fields are morally immutable: nothing in this package mutates
    # them after construction, which makes values safe to share across
    # worker processes.
    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- ring structure -------------------------------------------------
    def __add__(self, other) -> "GaussianRational":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other) -> "GaussianRational":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "GaussianRational":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "GaussianRational":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inversion of zero in Q(i)")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other) -> "GaussianRational":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "GaussianRational":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int) -> "GaussianRational":
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    # -- predicates ------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self) -> str:
        return scalar_to_text(self)


def _coerce(x) -> "GaussianRational":
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    return NotImplemented


def Q(num, den: int = 1) -> GaussianRational:
    """Rational shortcut: Q(2, 3) == 2/3 as a GaussianRational."""
    return GaussianRational(Fraction(num, den))


def QI(re=0, im=0) -> GaussianRational:
    """Gaussian shortcut: QI(1, -1) == 1 - i."""
    return GaussianRational(Fraction(re), Fraction(im))


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
IUNIT = GaussianRational(0, 1)


def gr_add(x: GaussianRational, y: GaussianRational) -> GaussianRational:
    return _coerce(x) + _coerce(y)


def gr_mul(x: GaussianRational, y: GaussianRational) -> GaussianRational:
    return _coerce(x) * _coerce(y)


def gr_inv(x: GaussianRational) -> GaussianRational:
    return _coerce(x).inverse()


# ---------------------------------------------------------------------------
# text form: "a/b" or "a/b+c/d*i" (spaces optional, lowercase i)
# ---------------------------------------------------------------------------

def _frac_to_text(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def scalar_to_text(x: GaussianRational) -> str:
    x = _coerce(x)
    if not x.im:
        return _frac_to_text(x.re)
    if x.im == 1:
        im = "i"
    elif x.im == -1:
        im = "-i"
    else:
        im = f"{_frac_to_text(x.im)}*i"
    if not x.re:
        return im
    sign = "+" if x.im > 0 else "-"
    mag = im.lstrip("-") if im in ("i", "-i") else f"{_frac_to_text(abs(x.im))}*i"
    return f"{_frac_to_text(x.re)}{sign}{mag}"


_TERM_RE = _re.compile(
    r"""
    (?P<sign>[+-]?)
    (?:
        (?P<coefi>(?:\d+(?:/\d+)?)?)\*?i   # imaginary term, coefficient optional
      | (?P<rat>\d+(?:/\d+)?)              # real term
    )
    """,
    _re.VERBOSE,
)


def scalar_from_text(text: str) -> GaussianRational:
    """Parse "a/b" / "a/b+c/d*i" (also bare "i", "-i", "3i"). Exact inverse
    of :func:`scalar_to_text` and tolerant of optional spaces."""
    s = "".join(text.split())
    if not s:
        raise ValueError("empty scalar text")
    re_part = Fraction(0)
    im_part = Fraction(0)
    pos = 0
    seen_re = seen_im = False
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad scalar text {text!r} at position {pos}")
        sign = -1 if m.group("sign") == "-" else 1
        if m.group("rat") is not None:
            if seen_re:
                raise ValueError(f"duplicate real part in {text!r}")
            re_part = sign * Fraction(m.group("rat"))
            seen_re = True
        else:
            if seen_im:
                raise ValueError(f"duplicate imaginary part in {text!r}")
            coef = m.group("coefi")
            im_part = sign * (Fraction(coef) if coef else Fraction(1))
            seen_im = True
        pos = m.end()
    return GaussianRational(re_part, im_part)


# ---------------------------------------------------------------------------
# sparse bivariate polynomials
# ---------------------------------------------------------------------------

V = TypeVar("V")


def rebase_cells(
    cells: dict[tuple[int, int], V],
    vadd: Callable[[V, V], V],
    vscale: Callable[[int, V], V],
    is_zero: Callable[[V], bool],
    inverse: bool = False,
) -> dict[tuple[int, int], V]:
    """Change of basis on a sparse exponent map.

    Forward direction: cells are ``(lam-exp, theta-exp) -> value`` and the
    result is ``(lam-exp, mu-exp) -> value`` with ``mu = lam + theta``
    (substitute ``theta = mu - lam`` i.e. spread ``theta^t`` into
    ``sum_r C(t,r) (-1)^r lam^r mu^(t-r)``).  With ``inverse=True`` the roles
    are swapped (substitute ``mu = lam + theta``).

    Value-type agnostic: scalar polynomials and module-valued coefficient
    maps share this code path.
    """
    out: dict[tuple[int, int], V] = {}
    for (a, t), val in cells.items():
        for r in range(t + 1):
            c = comb(t, r) if inverse else comb(t, r) * (-1) ** r
            key = (a + r, t - r)
            piece = vscale(c, val)
            if key in out:
                piece = vadd(out[key], piece)
            if is_zero(piece):
                out.pop(key, None)
            else:
                out[key] = piece
    return out


class BiPoly:
    """Sparse polynomial in two commuting variables over Q(i).

    The exponent pair is ``(lam-exponent, theta-exponent)``; after a rebase
    the second slot is read as a ``mu = lam + theta`` exponent instead.  No
    zero coefficient is ever stored.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[tuple[int, int], GaussianRational] | None = None):
        data: dict[tuple[int, int], GaussianRational] = {}
        if coeffs:
            for (a, t), v in coeffs.items():
                if a < 0 or t < 0:
                    raise ValueError("exponents must be non-negative")
                v = _coerce(v)
                if v:
                    data[(a, t)] = v
        self.coeffs = data

    @classmethod
    def term(cls, a: int, t: int, coef=ONE) -> "BiPoly":
        return cls({(a, t): _coerce(coef)})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __add__(self, other: "BiPoly") -> "BiPoly":
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            s = out.get(key, ZERO) + v
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        res = BiPoly.__new__(BiPoly)
        res.coeffs = out
        return res

    def __neg__(self) -> "BiPoly":
        res = BiPoly.__new__(BiPoly)
        res.coeffs = {k: -v for k, v in self.coeffs.items()}
        return res

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        return self + (-other)

    def __mul__(self, other) -> "BiPoly":
        if isinstance(other, BiPoly):
            out: dict[tuple[int, int], GaussianRational] = {}
            for (a1, t1), v1 in self.coeffs.items():
                for (a2, t2), v2 in other.coeffs.items():
                    key = (a1 + a2, t1 + t2)
                    s = out.get(key, ZERO) + v1 * v2
                    if s:
                        out[key] = s
                    else:
                        out.pop(key, None)
            res = BiPoly.__new__(BiPoly)
            res.coeffs = out
            return res
        c = _coerce(other)
        if c is NotImplemented:
            return NotImplemented
        if not c:
            return BiPoly()
        res = BiPoly.__new__(BiPoly)
        res.coeffs = {k: v * c for k, v in self.coeffs.items()}
        return res

    __rmul__ = __mul__

    def degrees(self) -> tuple[int, int]:
        """Componentwise degree (max exponent in each variable); (-1,-1) for 0."""
        if not self.coeffs:
            return (-1, -1)
        return (
            max(a for a, _ in self.coeffs),
            max(t for _, t in self.coeffs),
        )

    def coefficient(self, a: int, t: int) -> GaussianRational:
        return self.coeffs.get((a, t), ZERO)

    def evaluate(self, lam, second) -> GaussianRational:
        """Evaluate at exact scalar values (second = theta or mu)."""
        lam = _coerce(lam)
        second = _coerce(second)
        total = ZERO
        for (a, t), v in sorted(self.coeffs.items()):
            term = v
            for _ in range(a):
                term = term * lam
            for _ in range(t):
                term = term * second
            total = total + term
        return total

    def items(self) -> Iterator[tuple[tuple[int, int], GaussianRational]]:
        return iter(sorted(self.coeffs.items()))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "BiPoly(0)"
        parts = [
            f"({scalar_to_text(v)})*lam^{a}*th^{t}"
            for (a, t), v in sorted(self.coeffs.items())
        ]
        return "BiPoly(" + " + ".join(parts) + ")"


def bipoly_rebase(p: BiPoly) -> BiPoly:
    """Rewrite from the (lam, theta) basis to (lam, mu), mu = lam + theta."""
    res = BiPoly.__new__(BiPoly)
    res.coeffs = rebase_cells(
        p.coeffs,
        vadd=lambda x, y: x + y,
        vscale=lambda c, v: v * Q(c),
        is_zero=lambda v: not v,
        inverse=False,
    )
    return res


def bipoly_rebase_inverse(p: BiPoly) -> BiPoly:
    """Rewrite from the (lam, mu) basis back to (lam, theta)."""
    res = BiPoly.__new__(BiPoly)
    res.coeffs = rebase_cells(
        p.coeffs,
        vadd=lambda x, y: x + y,
        vscale=lambda c, v: v * Q(c),
        is_zero=lambda v: not v,
        inverse=True,
    )
    return res
