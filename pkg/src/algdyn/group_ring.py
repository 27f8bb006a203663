"""Exact sparse arithmetic in the group rings Z[Z^d] and Q[Z^d].

Elements are Laurent polynomials in ``u_1, ..., u_d`` stored as a map from
exponent tuples to nonzero exact coefficients. Group elements are written
additively: the monomial ``u_1^2 u_2^-1`` is the exponent vector ``(2, -1)``
and the product of monomials is vector addition.

Nothing in this module uses floating point.
"""
from __future__ import annotations

import heapq
import math
import numbers
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

from .errors import DimensionMismatch, PreconditionError, ZeroElementError

Monomial = Tuple[int, ...]

__all__ = [
    "Monomial",
    "LaurentPolynomial",
    "GroupRingElement",
    "RationalGroupRingElement",
    "convolve",
    "involution",
    "norm",
    "content",
    "primitive_part",
    "is_primitive",
    "is_lopsided",
    "dominant_monomial",
    "is_well_balanced",
    "support_generates",
    "divides",
    "exact_quotient",
    "divide_with_remainder",
]


def _as_monomial(exp, dim: int) -> Monomial:
    m = tuple(int(e) for e in exp)
    if len(m) != dim:
        raise DimensionMismatch(f"monomial {m} has length {len(m)}, expected {dim}")
    return m


class LaurentPolynomial:
    """Immutable finitely supported function Z^d -> coefficient ring.

    Subclasses fix the coefficient ring by overriding ``_coerce``.
    """

    __slots__ = ("_dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Optional[Mapping] = None):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self._dim = int(dim)
        clean: Dict[Monomial, numbers.Rational] = {}
        for exp, coef in (terms or {}).items():
            c = self._coerce(coef)
            if c != 0:
                m = _as_monomial(exp, self._dim)
                clean[m] = clean.get(m, 0) + c
                if clean[m] == 0:
                    del clean[m]
        self._terms = clean
        self._hash = None

    @staticmethod
    def _coerce(c):
        raise NotImplementedError

    @classmethod
    def _from_clean(cls, dim, terms):
        obj = cls.__new__(cls)
        obj._dim = dim
        obj._terms = terms
        obj._hash = None
        return obj

    # construction helpers
    @classmethod
    def one(cls, dim: int):
        return cls(dim, {(0,) * dim: 1})

    @classmethod
    def zero(cls, dim: int):
        return cls(dim, {})

    @classmethod
    def monomial(cls, dim: int, exp, coef=1):
        return cls(dim, {tuple(exp): coef})

    @classmethod
    def variable(cls, dim: int, i: int, power: int = 1):
        """The generator ``u_i`` (1-based) raised to ``power``."""
        if not 1 <= i <= dim:
            raise ValueError(f"variable index {i} out of range for d={dim}")
        exp = [0] * dim
        exp[i - 1] = power
        return cls(dim, {tuple(exp): 1})

    # basic accessors
    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> Dict[Monomial, numbers.Rational]:
        return dict(self._terms)

    def support(self):
        return sorted(self._terms)

    def coefficient(self, exp) -> numbers.Rational:
        return self._terms.get(tuple(exp), 0)

    def items(self) -> Iterator[Tuple[Monomial, numbers.Rational]]:
        for m in sorted(self._terms):
            yield m, self._terms[m]

    def __iter__(self):
        return self.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def identity_coefficient(self):
        return self._terms.get((0,) * self._dim, 0)

    def coefficient_sum(self):
        return sum(self._terms.values())

    def min_exponents(self) -> Monomial:
        if not self._terms:
            raise ZeroElementError("zero element has no support")
        return tuple(min(m[i] for m in self._terms) for i in range(self._dim))

    def max_exponents(self) -> Monomial:
        if not self._terms:
            raise ZeroElementError("zero element has no support")
        return tuple(max(m[i] for m in self._terms) for i in range(self._dim))

    def extent(self) -> int:
        """Largest |coordinate| over the support (0 for the zero element)."""
        return max((abs(e) for m in self._terms for e in m), default=0)

    def shift(self, exp):
        """Multiply by the monomial ``u^exp``."""
        exp = _as_monomial(exp, self._dim)
        return type(self)._from_clean(
            self._dim, {tuple(a + b for a, b in zip(m, exp)): c for m, c in self._terms.items()}
        )

    def to_rational(self) -> "RationalGroupRingElement":
        return RationalGroupRingElement._from_clean(
            self._dim, {m: Fraction(c) for m, c in self._terms.items()}
        )

    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self._terms.values())

    def to_integral(self) -> "GroupRingElement":
        if not self.is_integral():
            raise ValueError("element has non-integer coefficients")
        return GroupRingElement(self._dim, {m: int(Fraction(c)) for m, c in self._terms.items()})

    # arithmetic
    def _check(self, other):
        if not isinstance(other, LaurentPolynomial):
            raise TypeError(f"cannot combine with {type(other).__name__}")
        if other._dim != self._dim:
            raise DimensionMismatch(f"dimension mismatch: {self._dim} vs {other._dim}")

    def _result_type(self, other):
        if isinstance(self, RationalGroupRingElement) or isinstance(other, RationalGroupRingElement):
            return RationalGroupRingElement
        return type(self)

    def _scalar(self, s):
        if isinstance(s, LaurentPolynomial):
            return None
        if isinstance(s, numbers.Integral):
            return int(s)
        if isinstance(s, numbers.Rational):
            return Fraction(s)
        raise TypeError(f"unsupported scalar {s!r}")

    def __add__(self, other):
        if not isinstance(other, LaurentPolynomial):
            other = type(self).monomial(self._dim, (0,) * self._dim, other)
        self._check(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v == 0:
                out.pop(m, None)
            else:
                out[m] = v
        cls = self._result_type(other)
        return cls(self._dim, out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._from_clean(self._dim, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, LaurentPolynomial):
            other = type(self).monomial(self._dim, (0,) * self._dim, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        s = self._scalar(other)
        if s is not None:
            cls = RationalGroupRingElement if isinstance(s, Fraction) and s.denominator != 1 else type(self)
            return cls(self._dim, {m: c * s for m, c in self._terms.items()})
        return convolve(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if not isinstance(k, numbers.Integral):
            raise TypeError("exponent must be an integer")
        if k < 0:
            if len(self._terms) == 1:
                (m, c), = self._terms.items()
                if abs(c) == 1:
                    return type(self)._from_clean(self._dim, {tuple(k * e for e in m): c ** (-k)})
            raise ValueError("only units (signed monomials) have negative powers")
        result = type(self).one(self._dim)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, LaurentPolynomial):
            return self._dim == other._dim and self._terms == other._terms
        if isinstance(other, numbers.Rational):
            if other == 0:
                return not self._terms
            return self._terms == {(0,) * self._dim: other}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._dim, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        from .polyio import format_expression

        return f"{type(self).__name__}(d={self._dim}, {format_expression(self)!r})"


class GroupRingElement(LaurentPolynomial):
    """Element of the integral group ring Z[Z^d]."""

    __slots__ = ()

    @staticmethod
    def _coerce(c):
        if isinstance(c, bool):
            return int(c)
        if isinstance(c, numbers.Integral):
            return int(c)
        if isinstance(c, numbers.Rational) and Fraction(c).denominator == 1:
            return int(Fraction(c))
        if isinstance(c, float) and c.is_integer():
            return int(c)
        raise TypeError(f"integral group ring needs integer coefficients, got {c!r}")


class RationalGroupRingElement(LaurentPolynomial):
    """Element of Q[Z^d] with reduced-fraction coefficients."""

    __slots__ = ()

    @staticmethod
    def _coerce(c):
        if isinstance(c, float):
            raise TypeError("rational group ring does not accept floats")
        return Fraction(c)


def convolve(a: LaurentPolynomial, b: LaurentPolynomial) -> LaurentPolynomial:
    """Convolution product ``(ab)_g = sum_h a_{g-h} b_h``."""
    a._check(b)
    out: Dict[Monomial, numbers.Rational] = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            out[m] = out.get(m, 0) + ca * cb
    cls = a._result_type(b)
    return cls._from_clean(a._dim, {m: c for m, c in out.items() if c != 0})


def involution(a: LaurentPolynomial) -> LaurentPolynomial:
    """``(a*)_g = a_{-g}``."""
    return type(a)._from_clean(a._dim, {tuple(-e for e in m): c for m, c in a._terms.items()})


def norm(a: LaurentPolynomial, p=1):
    """Exact l^1 or l^inf norm (``p`` is 1 or ``math.inf``/``"inf"``)."""
    vals = [abs(c) for c in a._terms.values()]
    if p == 1:
        return sum(vals, 0)
    if p in (math.inf, "inf", "infinity"):
        return max(vals, default=0)
    raise ValueError("exact norm supports p = 1 or infinity only")


def content(a: LaurentPolynomial) -> int:
    """gcd of the coefficients of a nonzero integral element."""
    if a.is_zero():
        raise ZeroElementError("content of the zero element is undefined")
    if not a.is_integral():
        raise TypeError("content is defined for integral elements")
    return reduce(math.gcd, (abs(int(c)) for c in a._terms.values()))


def primitive_part(a: LaurentPolynomial) -> GroupRingElement:
    c = content(a)
    return GroupRingElement(a._dim, {m: int(v) // c for m, v in a._terms.items()})


def is_primitive(a: LaurentPolynomial) -> bool:
    return content(a) == 1


def dominant_monomial(a: LaurentPolynomial) -> Optional[Monomial]:
    """The monomial whose coefficient outweighs all others in l^1, if any."""
    if a.is_zero():
        raise ZeroElementError("lopsidedness of the zero element is undefined")
    total = norm(a, 1)
    m, c = max(a._terms.items(), key=lambda kv: abs(kv[1]))
    if abs(c) > total - abs(c):
        return m
    return None


def is_lopsided(a: LaurentPolynomial) -> bool:
    return dominant_monomial(a) is not None


def _lattice_rank_and_index(vectors, dim):
    """Rank and index (covolume) of the subgroup of Z^dim spanned by ``vectors``."""
    rows = [list(v) for v in vectors if any(v)]
    rank, index, r0 = 0, 1, 0
    for col in range(dim):
        # Euclid on column ``col`` among rows r0.. until a single nonzero remains
        while True:
            nz = [i for i in range(r0, len(rows)) if rows[i][col] != 0]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda i: abs(rows[i][col]))
            for i in nz:
                if i != piv:
                    q = rows[i][col] // rows[piv][col]
                    rows[i] = [x - q * y for x, y in zip(rows[i], rows[piv])]
        nz = [i for i in range(r0, len(rows)) if rows[i][col] != 0]
        if nz:
            i = nz[0]
            rows[r0], rows[i] = rows[i], rows[r0]
            index *= abs(rows[r0][col])
            rank += 1
            r0 += 1
    return rank, index


def support_generates(a: LaurentPolynomial) -> bool:
    """True iff the support of ``a`` generates Z^d as a group.

    Equivalent to all elementary divisors of the support matrix being 1.
    """
    rank, index = _lattice_rank_and_index(list(a._terms), a._dim)
    return rank == a._dim and index == 1


def is_well_balanced(a: LaurentPolynomial) -> bool:
    if a.is_zero():
        return False
    if a.coefficient_sum() != 0:
        return False
    origin = (0,) * a._dim
    if any(c > 0 for m, c in a._terms.items() if m != origin):
        return False
    if involution(a) != a:
        return False
    return support_generates(a)


# --- single-divisor division -------------------------------------------------

def _order_key(order: str):
    if order == "grlex":
        return lambda m: (sum(m), m)
    if order == "lex":
        return lambda m: m
    raise ValueError(f"unknown monomial order {order!r}")


def _poly_divide(p: Dict[Monomial, Fraction], f: Dict[Monomial, Fraction], order: str):
    """Multivariate division of polynomial ``p`` by polynomial ``f`` (non-negative exponents)."""
    key = _order_key(order)
    lt = max(f, key=key)
    lc = f[lt]
    rest = [(m, c) for m, c in f.items() if m != lt]
    p = dict(p)
    heap = [(_neg(key(m)), m) for m in p]
    heapq.heapify(heap)
    quotient: Dict[Monomial, Fraction] = {}
    remainder: Dict[Monomial, Fraction] = {}
    while heap:
        _, m = heapq.heappop(heap)
        c = p.pop(m, None)
        if c is None:
            continue
        while heap and heap[0][1] == m:
            heapq.heappop(heap)
        if all(x >= y for x, y in zip(m, lt)):
            t = tuple(x - y for x, y in zip(m, lt))
            q = c / lc
            quotient[t] = quotient.get(t, 0) + q
            for mf, cf in rest:
                e = tuple(x + y for x, y in zip(mf, t))
                v = p.get(e, 0) - q * cf
                if v == 0:
                    p.pop(e, None)
                else:
                    if e not in p:
                        heapq.heappush(heap, (_neg(key(e)), e))
                    p[e] = v
        else:
            remainder[m] = c
    return quotient, remainder


def _neg(k):
    if isinstance(k, tuple):
        return tuple(_neg(x) for x in k)
    return -k


def divide_with_remainder(f: LaurentPolynomial, g: LaurentPolynomial, order: str = "grlex"):
    """Divide ``g`` by ``f`` over Q after normalising both to honest polynomials.

    Both supports are translated so their minimal exponents sit at the
    origin; this strips every monomial factor from ``f`` (monomials are
    units). Returns ``(quotient, remainder)`` as Laurent elements with
    ``g = quotient * f + remainder``.
    """
    f._check(g)
    if f.is_zero():
        raise ZeroElementError("division by the zero element")
    d = f.dim
    if g.is_zero():
        z = RationalGroupRingElement.zero(d)
        return z, z
    sf, sg = f.min_exponents(), g.min_exponents()
    fp = {tuple(x - y for x, y in zip(m, sf)): Fraction(c) for m, c in f._terms.items()}
    gp = {tuple(x - y for x, y in zip(m, sg)): Fraction(c) for m, c in g._terms.items()}
    q, r = _poly_divide(gp, fp, order)
    q_shift = tuple(a - b for a, b in zip(sg, sf))
    quotient = RationalGroupRingElement(d, q).shift(q_shift)
    remainder = RationalGroupRingElement(d, r).shift(sg)
    return quotient, remainder


def exact_quotient(f: LaurentPolynomial, g: LaurentPolynomial, order: str = "grlex"):
    """The q in Q[Z^d] with ``g = q f``, or ``None`` when ``f`` does not divide ``g``."""
    q, r = divide_with_remainder(f, g, order)
    return q if r.is_zero() else None


def divides(f: LaurentPolynomial, g: LaurentPolynomial, order: str = "grlex") -> bool:
    """True iff ``g`` lies in the principal ideal Q[Z^d] f.

    ``f`` must be nonzero. A single polynomial is a Groebner basis of the
    ideal it generates, so a zero remainder decides membership.
    """
    if f.is_zero():
        raise ZeroElementError("divisor must be nonzero")
    return exact_quotient(f, g, order) is not None


def require_primitive(f: LaurentPolynomial) -> None:
    if not is_primitive(f):
        raise PreconditionError(f"{f!r} is not primitive (content {content(f)})")


def from_terms(dim: int, terms: Iterable[Tuple[Iterable[int], int]]) -> GroupRingElement:
    """Build an integral element from ``(exponent, coefficient)`` pairs, rejecting duplicates."""
    out: Dict[Monomial, int] = {}
    for exp, coef in terms:
        m = _as_monomial(exp, dim)
        if m in out:
            raise ValueError(f"duplicate exponent {m}")
        out[m] = coef
    return GroupRingElement(dim, out)
