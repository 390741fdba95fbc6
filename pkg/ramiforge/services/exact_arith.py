"""
Ramiforge - Exact Arithmetic Service
Rationals, polynomials over Q and F_p, factorization mod p, resultants,
discriminants, p-adic valuations and CRT. Nothing here touches floating point.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from random import Random
from typing import Iterable, List, Sequence, Tuple, Union
import logging

from sympy import Poly, Rational, Symbol, isprime, multiplicity, oo
from sympy.ntheory.modular import crt as _sympy_crt
from sympy.polys.domains import QQ, ZZ
from sympy.polys.galoistools import (
    gf_add,
    gf_ddf_zassenhaus,
    gf_degree,
    gf_gcd,
    gf_pow_mod,
    gf_quo,
    gf_sqf_list,
    gf_sub_ground,
)

from ramiforge.errors import InputError, PreconditionError

logger = logging.getLogger(__name__)


# ============================================
# Points of P^1(Q)
# ============================================

class PointAtInfinity:
    """The distinguished point ∞ of P¹(Q)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (PointAtInfinity, ())


INFINITY = PointAtInfinity()

Rat = Fraction
PointP1 = Union[Fraction, PointAtInfinity]
ExtInt = Union[int, type(oo)]

_INFINITY_TOKENS = {"inf", "oo", "∞", "infinity"}


def parse_point(text: str) -> PointP1:
    """
    Parse a point of P¹(Q) written as "n/d", an integer, or "inf".

    Raises:
        InputError: if the text is not a rational or the ∞ token
    """
    token = str(text).strip()
    if token.lower() in _INFINITY_TOKENS:
        return INFINITY
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"Cannot parse point '{text}'", str(e))


def format_point(point: PointP1) -> str:
    return "inf" if point is INFINITY else str(Fraction(point))


def invert_point(point: PointP1) -> PointP1:
    """1/t with the conventions 1/0 = ∞ and 1/∞ = 0."""
    if point is INFINITY:
        return Fraction(0)
    if point == 0:
        return INFINITY
    return 1 / Fraction(point)


def format_valuation(v: ExtInt) -> str:
    if v == oo:
        return "inf"
    if v == -oo:
        return "-inf"
    return str(int(v))


# ============================================
# Valuations
# ============================================

def vp(x: PointP1, p: int) -> ExtInt:
    """
    Exact p-adic valuation with v(0) = +∞ and v(∞) = −∞.

    Args:
        x: a rational, or the point at infinity
        p: a prime

    Returns:
        An int, or sympy's ``oo`` / ``-oo``
    """
    if x is INFINITY:
        return -oo
    x = Fraction(x)
    if x == 0:
        return oo
    return multiplicity(p, abs(x.numerator)) - multiplicity(p, x.denominator)


def is_p_integral(x: Fraction, p: int) -> bool:
    return Fraction(x).denominator % p != 0


def reduce_mod(x: Fraction, modulus: int) -> int:
    """Image of a rational in Z/modulus; the denominator must be invertible."""
    x = Fraction(x)
    if gcd(x.denominator, modulus) != 1:
        raise PreconditionError("reduce_mod", f"{x} is not integral modulo {modulus}")
    return (x.numerator * pow(x.denominator, -1, modulus)) % modulus


def require_prime(p: int, operation: str) -> None:
    if not isinstance(p, int) or not isprime(p):
        raise PreconditionError(operation, f"{p} is not a prime")


# ============================================
# Polynomials over Q
# ============================================

def _strip(coeffs: Iterable, zero) -> tuple:
    items = list(coeffs)
    while items and items[-1] == zero:
        items.pop()
    return tuple(items)


@dataclass(frozen=True)
class PolyQ:
    """Polynomial over Q; ``coeffs[i]`` is the coefficient of degree i."""

    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip((Fraction(c) for c in self.coeffs), 0))

    @classmethod
    def from_desc(cls, coeffs: Sequence) -> "PolyQ":
        """Build from coefficients listed leading term first."""
        return cls(tuple(Fraction(c) for c in reversed(list(coeffs))))

    @classmethod
    def constant(cls, c) -> "PolyQ":
        return cls((Fraction(c),))

    @classmethod
    def monomial(cls, degree: int, c=1) -> "PolyQ":
        return cls(tuple([Fraction(0)] * degree + [Fraction(c)]))

    @classmethod
    def linear_root(cls, r: Fraction) -> "PolyQ":
        """The monic polynomial T − r."""
        return cls((-Fraction(r), Fraction(1)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    @property
    def constant_term(self) -> Fraction:
        return self.coeffs[0] if self.coeffs else Fraction(0)

    @property
    def is_monic(self) -> bool:
        return self.lc == 1

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: "PolyQ") -> "PolyQ":
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyQ(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    def __neg__(self) -> "PolyQ":
        return PolyQ(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "PolyQ") -> "PolyQ":
        return self + (-other)

    def __mul__(self, other) -> "PolyQ":
        if not isinstance(other, PolyQ):
            return PolyQ(tuple(c * Fraction(other) for c in self.coeffs))
        if self.is_zero or other.is_zero:
            return PolyQ(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyQ(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PolyQ":
        result = PolyQ.constant(1)
        for _ in range(k):
            result = result * self
        return result

    def divmod(self, divisor: "PolyQ") -> Tuple["PolyQ", "PolyQ"]:
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = divisor.degree
        quo = [Fraction(0)] * max(len(rem) - dd, 0)
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k] / divisor.lc
            if c == 0:
                continue
            quo[k - dd] = c
            for i, b in enumerate(divisor.coeffs):
                rem[k - dd + i] -= c * b
        return PolyQ(tuple(quo)), PolyQ(tuple(rem[:dd]) if dd > 0 else ())

    def __floordiv__(self, divisor: "PolyQ") -> "PolyQ":
        return self.divmod(divisor)[0]

    def __mod__(self, divisor: "PolyQ") -> "PolyQ":
        return self.divmod(divisor)[1]

    def derivative(self) -> "PolyQ":
        return PolyQ(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def taylor_coefficient(self, k: int, x) -> Fraction:
        """f^(k)(x)/k!, which has integral coefficients in x when f does."""
        x = Fraction(x)
        return sum(
            (comb(i, k) * c * x ** (i - k) for i, c in enumerate(self.coeffs) if i >= k),
            Fraction(0),
        )

    def shift(self, c) -> "PolyQ":
        """f(X + c)."""
        c = Fraction(c)
        n = len(self.coeffs)
        return PolyQ(tuple(
            sum((comb(i, j) * self.coeffs[i] * c ** (i - j) for i in range(j, n)), Fraction(0))
            for j in range(n)
        ))

    def scale_variable(self, s) -> "PolyQ":
        """f(s·X)."""
        s = Fraction(s)
        return PolyQ(tuple(c * s ** i for i, c in enumerate(self.coeffs)))

    def reversed(self) -> "PolyQ":
        """T^deg · f(1/T)."""
        return PolyQ(tuple(reversed(self.coeffs)))

    def monic(self) -> "PolyQ":
        if self.is_zero:
            return self
        return self * (1 / self.lc)

    def min_valuation(self, p: int) -> ExtInt:
        """Smallest p-adic valuation among the coefficients."""
        return min((vp(c, p) for c in self.coeffs if c != 0), default=oo)

    def is_p_integral(self, p: int) -> bool:
        return all(is_p_integral(c, p) for c in self.coeffs)

    def reduce(self, p: int) -> "PolyFp":
        if not self.is_p_integral(p):
            raise PreconditionError("reduce", f"{self} is not {p}-integral")
        return PolyFp(p, tuple(reduce_mod(c, p) for c in self.coeffs))

    def to_sympy(self, symbol: Symbol) -> Poly:
        return Poly(
            [Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)] or [0],
            symbol,
            domain=QQ,
        )

    @classmethod
    def from_sympy(cls, poly: Poly) -> "PolyQ":
        return cls.from_desc(_to_fraction(c) for c in poly.all_coeffs())

    def format(self, var: str = "T") -> str:
        if self.is_zero:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                power = var if i == 1 else f"{var}^{i}"
                body = power if mag == 1 else f"{mag}*{power}"
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.format()


def _to_fraction(value) -> Fraction:
    r = Rational(value)
    return Fraction(int(r.p), int(r.q))


_T = Symbol("T")


def resultant(f: PolyQ, g: PolyQ) -> Fraction:
    """
    Sylvester resultant over Q.

    A constant c against g gives c^deg(g); two constants give 1.
    """
    if f.is_zero or g.is_zero:
        raise PreconditionError("resultant", "zero polynomial")
    if f.degree == 0 and g.degree == 0:
        return Fraction(1)
    if f.degree == 0:
        return f.lc ** g.degree
    if g.degree == 0:
        return g.lc ** f.degree
    return _to_fraction(f.to_sympy(_T).resultant(g.to_sympy(_T)))


def discriminant(f: PolyQ) -> Fraction:
    """
    disc(f) = (−1)^(n(n−1)/2) · Res(f, f′) / lc(f); constants have discriminant 1.
    """
    if f.is_zero:
        raise PreconditionError("discriminant", "zero polynomial")
    n = f.degree
    if n <= 0:
        return Fraction(1)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * resultant(f, f.derivative()) / f.lc


# ============================================
# Polynomials over F_p
# ============================================

@dataclass(frozen=True)
class PolyFp:
    """Polynomial over F_p; ``coeffs[i]`` is the residue of the degree-i coefficient."""

    p: int
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip((int(c) % self.p for c in self.coeffs), 0))

    @classmethod
    def from_dense(cls, dense: Sequence, p: int) -> "PolyFp":
        """From a galoistools dense list (leading coefficient first)."""
        return cls(p, tuple(int(c) for c in reversed(list(dense))))

    def to_dense(self) -> list:
        return [ZZ(c) for c in reversed(self.coeffs)]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def __mul__(self, other: "PolyFp") -> "PolyFp":
        if self.is_zero or other.is_zero:
            return PolyFp(self.p, ())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyFp(self.p, tuple(out))

    def __pow__(self, k: int) -> "PolyFp":
        result = PolyFp(self.p, (1,))
        for _ in range(k):
            result = result * self
        return result

    def monic(self) -> "PolyFp":
        if self.is_zero:
            return self
        inv = pow(self.coeffs[-1], -1, self.p)
        return PolyFp(self.p, tuple(c * inv for c in self.coeffs))

    def roots(self) -> List[int]:
        """Roots in F_p, ascending."""
        if self.is_zero:
            raise PreconditionError("roots", "zero polynomial")
        if self.degree <= 0:
            return []
        # gcd with X^p − X isolates the linear part before any search
        x = [ZZ.one, ZZ.zero]
        dense = gf_pow_mod(x, self.p, self.monic().to_dense(), self.p, ZZ)
        split = gf_gcd(self.monic().to_dense(), gf_add(dense, [self.p - 1, 0], self.p, ZZ), self.p, ZZ)
        if gf_degree(split) <= 0:
            return []
        part = PolyFp.from_dense(split, self.p)
        return sorted((-g.coeffs[0]) % self.p for g, _ in factor_mod_p(part))

    def has_root(self) -> bool:
        return bool(self.roots())

    def is_squarefree(self) -> bool:
        if self.is_zero:
            return False
        _, sqf = gf_sqf_list(self.to_dense(), self.p, ZZ)
        return all(k == 1 for _, k in sqf)

    def format(self, var: str = "X") -> str:
        return f"{PolyQ(tuple(Fraction(c) for c in self.coeffs)).format(var)} (mod {self.p})"

    def __str__(self) -> str:
        return self.format()


def _equal_degree_split(f: list, n: int, p: int, rng: Random) -> List[list]:
    """Cantor–Zassenhaus equal-degree splitting driven by a private RNG."""
    factors = [f]
    if gf_degree(f) <= n:
        return factors

    N = gf_degree(f) // n
    t = [ZZ.one, ZZ.zero]
    while len(factors) < N:
        if p == 2:
            h = r = t
            for _ in range(n - 1):
                r = gf_pow_mod(r, 2, f, p, ZZ)
                h = gf_add(h, r, p, ZZ)
            g = gf_gcd(f, h, p, ZZ)
            t = t + [ZZ.zero, ZZ.zero]
        else:
            r = [ZZ.one] + [ZZ(rng.randrange(p)) for _ in range(2 * n - 1)]
            h = gf_pow_mod(r, (p ** n - 1) // 2, f, p, ZZ)
            g = gf_gcd(f, gf_sub_ground(h, ZZ.one, p, ZZ), p, ZZ)

        if g != [ZZ.one] and g != f:
            factors = _equal_degree_split(g, n, p, rng) + _equal_degree_split(
                gf_quo(f, g, p, ZZ), n, p, rng
            )

    return sorted(factors)


def factor_mod_p(f: PolyFp, seed: int = 0) -> List[Tuple[PolyFp, int]]:
    """
    Factor a polynomial over F_p into monic irreducibles.

    Square-free decomposition, then distinct-degree, then seeded equal-degree
    splitting. The leading coefficient is dropped.

    Args:
        f: nonzero polynomial over F_p
        seed: seed of the equal-degree splitting

    Returns:
        List of (irreducible factor, multiplicity), sorted by degree then coefficients
    """
    if f.is_zero:
        raise PreconditionError("factor_mod_p", "zero polynomial")
    p = f.p
    rng = Random(seed)
    _, sqf = gf_sqf_list(f.to_dense(), p, ZZ)
    factors = []
    for g, k in sqf:
        for h, d in gf_ddf_zassenhaus(g, p, ZZ):
            for irreducible in _equal_degree_split(h, d, p, rng):
                factors.append((PolyFp.from_dense(irreducible, p), k))
    factors.sort(key=lambda item: (item[0].degree, tuple(reversed(item[0].coeffs)), item[1]))
    return factors


def degree_pattern(factors: List[Tuple[PolyFp, int]]) -> List[int]:
    """Factor degrees with multiplicity, ascending."""
    return sorted(g.degree for g, k in factors for _ in range(k))


# ============================================
# Chinese remainders
# ============================================

def crt(residues: Sequence[Tuple[Fraction, int]]) -> int:
    """
    Combine congruences θ ≡ r_i (mod m_i).

    Args:
        residues: pairs (r_i, m_i) with pairwise coprime moduli and each r_i
            integral at the primes of m_i

    Returns:
        The least nonnegative integer solution

    Raises:
        PreconditionError: non-coprime moduli or a non-integral residue
    """
    if not residues:
        return 0
    moduli = [int(m) for _, m in residues]
    for i in range(len(moduli)):
        for j in range(i + 1, len(moduli)):
            if gcd(moduli[i], moduli[j]) != 1:
                raise PreconditionError(
                    "crt", f"moduli {moduli[i]} and {moduli[j]} are not coprime"
                )
    values = [reduce_mod(r, m) for r, m in residues]
    solution = _sympy_crt(moduli, values)
    if solution is None:
        raise PreconditionError("crt", "inconsistent congruences")
    return int(solution[0])
