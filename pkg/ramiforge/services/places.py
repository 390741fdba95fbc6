"""
Ramiforge - Places Service
Local notions at a rational prime p: meeting, intersection multiplicity,
unitization, rationalization and prime divisors of a polynomial.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Set
import logging

from sympy import nextprime

from ramiforge.config import settings
from ramiforge.errors import InputError, InternalConsistencyError, PreconditionError
from ramiforge.services.exact_arith import (
    INFINITY,
    ExtInt,
    PointP1,
    PolyQ,
    degree_pattern,
    discriminant,
    factor_mod_p,
    format_point,
    invert_point,
    require_prime,
    vp,
)

logger = logging.getLogger(__name__)

Provenance = str  # "rational" | "verified" | "user-asserted"


@dataclass(frozen=True)
class AlgPoint:
    """
    A Galois orbit of points of P¹ over Q.

    ``minpoly`` is monic irreducible; the point 0 has minpoly T and ∞ has
    minpoly 1 with ``is_infinity`` set.
    """

    minpoly: PolyQ
    is_infinity: bool = False
    provenance: Provenance = "rational"

    @classmethod
    def infinity(cls) -> "AlgPoint":
        return cls(PolyQ.constant(1), True, "rational")

    @classmethod
    def zero(cls) -> "AlgPoint":
        return cls(PolyQ.monomial(1), False, "rational")

    @classmethod
    def rational(cls, value: PointP1) -> "AlgPoint":
        if value is INFINITY:
            return cls.infinity()
        return cls(PolyQ.linear_root(Fraction(value)), False, "rational")

    @classmethod
    def from_minpoly(cls, minpoly: PolyQ, verify: bool = True) -> "AlgPoint":
        """
        Build an orbit from a minimal polynomial, normalising it to be monic.

        Raises:
            InputError: constant polynomial
        """
        if minpoly.degree < 1:
            raise InputError(f"Minimal polynomial must have degree ≥ 1, got {minpoly}")
        monic = minpoly.monic()
        if monic.degree == 1:
            return cls(monic, False, "rational")
        provenance = irreducibility_provenance(monic) if verify else "user-asserted"
        if provenance == "user-asserted":
            logger.warning(f"Irreducibility of {monic} not certified by the mod-p sieve; accepting as user-asserted")
        return cls(monic, False, provenance)

    @property
    def degree(self) -> int:
        return 1 if self.is_infinity else self.minpoly.degree

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    @property
    def is_zero_point(self) -> bool:
        return not self.is_infinity and self.minpoly == PolyQ.monomial(1)

    @property
    def is_special(self) -> bool:
        """True for the tags 0 and ∞."""
        return self.is_infinity or self.is_zero_point

    @property
    def a0(self) -> Fraction:
        """Constant coefficient of the minimal polynomial (1 for ∞)."""
        return self.minpoly.constant_term

    @property
    def value(self) -> Optional[PointP1]:
        """The point itself when rational."""
        if self.is_infinity:
            return INFINITY
        if self.minpoly.degree == 1:
            return -self.minpoly.constant_term
        return None

    def label(self) -> str:
        if self.is_rational:
            return format_point(self.value)
        return f"roots of {self.minpoly.format('T')}"

    def contains(self, t0: PointP1) -> bool:
        """Whether the rational point t0 lies in this orbit."""
        if t0 is INFINITY:
            return self.is_infinity
        if self.is_infinity:
            return False
        return self.minpoly(t0) == 0


def _subset_sums(parts) -> Set[int]:
    sums = {0}
    for d in parts:
        sums |= {s + d for s in sums}
    return sums


@lru_cache(maxsize=256)
def irreducibility_provenance(m: PolyQ, prime_count: int = None) -> Provenance:
    """
    Sieve the degrees a proper rational factor of m could have.

    Every good reduction prime restricts the candidate factor degrees to the
    subset sums of its factorization pattern; an empty candidate set proves
    irreducibility.

    Returns:
        "verified" when proven irreducible, "user-asserted" otherwise
    """
    n = m.degree
    if n <= 1:
        return "verified"
    prime_count = prime_count or settings.irreducibility_primes
    disc = discriminant(m)
    if disc == 0:
        return "user-asserted"
    candidates = set(range(1, n))
    p, tried = 1, 0
    while tried < prime_count:
        p = int(nextprime(p))
        if not m.is_p_integral(p) or vp(disc, p) != 0:
            continue
        tried += 1
        pattern = degree_pattern(factor_mod_p(m.reduce(p)))
        candidates &= _subset_sums(pattern)
        if not candidates:
            logger.debug(f"{m} proven irreducible after {tried} primes (last {p})")
            return "verified"
    return "user-asserted"


def reverse_minpoly(t1: AlgPoint) -> AlgPoint:
    """
    The orbit of 1/t1: monic (1/a0)·T^n·m(1/T), with m_{1/0} = 1 and m_{1/∞} = T.
    """
    if t1.is_infinity:
        return AlgPoint.zero()
    if t1.is_zero_point:
        return AlgPoint.infinity()
    return AlgPoint(t1.minpoly.reversed() * (1 / t1.a0), False, t1.provenance)


def unitizes(p: int, t1: AlgPoint) -> bool:
    """p unitizes t1: m_{t1} is p-integral with a unit constant term. Never for 0 and ∞."""
    require_prime(p, "unitizes")
    if t1.is_special:
        return False
    return t1.minpoly.is_p_integral(p) and vp(t1.a0, p) == 0


def intersection_multiplicity(p: int, t0: PointP1, t1: AlgPoint) -> ExtInt:
    """
    I_p(t0, t1): v_p(m_{t1}(t0)) if v_p(t0) ≥ 0, and v_p(m_{1/t1}(1/t0)) if v_p(t0) ≤ 0.

    Args:
        p: prime
        t0: rational point or ∞, not in the orbit t1
        t1: branch orbit with v_p(a0) = 0 unless t1 = 0

    Returns:
        A nonnegative int

    Raises:
        PreconditionError: the constant coefficient is not a p-unit, or t0 is a root
        InternalConsistencyError: the two charts disagree at v_p(t0) = 0
    """
    require_prime(p, "intersection_multiplicity")
    if not t1.is_zero_point and vp(t1.a0, p) != 0:
        raise PreconditionError(
            "intersection_multiplicity",
            f"constant coefficient {t1.a0} of {t1.minpoly} is not a {p}-unit",
        )
    if t1.contains(t0):
        raise PreconditionError("intersection_multiplicity", f"{format_point(t0)} lies in the orbit {t1.label()}")

    v0 = vp(t0, p)
    finite_chart = None
    infinite_chart = None
    if v0 >= 0:
        finite_chart = vp(t1.minpoly(t0), p)
    if v0 <= 0:
        infinite_chart = vp(reverse_minpoly(t1).minpoly(invert_point(t0)), p)

    if finite_chart is not None and infinite_chart is not None and finite_chart != infinite_chart:
        raise InternalConsistencyError(
            f"Intersection multiplicity charts disagree at p={p}, t0={format_point(t0)}: "
            f"{finite_chart} vs {infinite_chart}"
        )
    value = finite_chart if finite_chart is not None else infinite_chart
    return int(value)


def meets(p: int, t0: PointP1, t1: AlgPoint) -> bool:
    """
    Whether t0 and t1 meet modulo p, decided by the integrality criterion.

    Raises:
        PreconditionError: m_{t1} is not p-integral
    """
    require_prime(p, "meets")
    if not t1.minpoly.is_p_integral(p):
        raise PreconditionError(
            "meets",
            f"meeting undecidable: minimal polynomial {t1.minpoly} is not {p}-integral",
        )
    if t1.is_zero_point or vp(t1.a0, p) == 0:
        return intersection_multiplicity(p, t0, t1) > 0
    # integral orbit with a non-unit constant term: only residues can meet it
    if t0 is INFINITY or vp(t0, p) < 0:
        return False
    return t1.minpoly.reduce(p)(_residue(t0, p)) == 0


def meets_either_chart(p: int, t0: PointP1, t1: AlgPoint) -> Optional[bool]:
    """Meeting test in whichever chart has a p-integral minimal polynomial; None if neither."""
    if t1.minpoly.is_p_integral(p):
        return meets(p, t0, t1)
    reversed_orbit = reverse_minpoly(t1)
    if reversed_orbit.minpoly.is_p_integral(p):
        return meets(p, invert_point(t0), reversed_orbit)
    return None


def _residue(t0: Fraction, p: int) -> int:
    t0 = Fraction(t0)
    return (t0.numerator * pow(t0.denominator, -1, p)) % p


def is_prime_divisor(p: int, f: PolyQ) -> bool:
    """
    Whether v_p(f(t0)) > 0 for some rational t0, for monic p-integral f.

    Raises:
        PreconditionError: f is not monic or not p-integral
    """
    require_prime(p, "is_prime_divisor")
    if not f.is_monic or not f.is_p_integral(p):
        raise PreconditionError("is_prime_divisor", f"{f} must be monic and {p}-integral")
    if f.degree <= 0:
        return False
    return f.reduce(p).has_root()


def rationalized_by(p: int, t1: AlgPoint) -> bool:
    """
    Whether m_{t1} has a root mod p; always true for rational points.

    Raises:
        PreconditionError: t1 is non-rational and p does not unitize it
    """
    require_prime(p, "rationalized_by")
    if t1.is_rational:
        return True
    if not unitizes(p, t1):
        raise PreconditionError("rationalized_by", f"{p} does not unitize {t1.label()}")
    return t1.minpoly.reduce(p).has_root()


def smallest_residue_root(p: int, f: PolyQ) -> Optional[int]:
    roots = f.reduce(p).roots()
    return roots[0] if roots else None
