"""
Ramiforge - Cover Service
The cover data model E/Q(T), good/bad prime classification and specialization
of the defining polynomial.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import FrozenSet, List, Optional, Tuple
import logging

from ramiforge.errors import InputError, SpecializationError
from ramiforge.models import PrimeClassification
from ramiforge.services.exact_arith import (
    INFINITY,
    PointP1,
    PolyQ,
    discriminant,
    format_point,
    require_prime,
    resultant,
    vp,
)
from ramiforge.services.groups import ConjClass, FiniteGroup
from ramiforge.services.places import AlgPoint, reverse_minpoly

logger = logging.getLogger(__name__)

VERTICAL_DEFAULT_CAVEAT = (
    "vertical ramification is not computed; the declared exception set is assumed complete"
)


@dataclass(frozen=True)
class BivariatePoly:
    """P(T, X) as the T-polynomial coefficients of X^0, X^1, ..."""

    x_coeffs: Tuple[PolyQ, ...]

    @property
    def x_degree(self) -> int:
        return len(self.x_coeffs) - 1

    @property
    def is_monic_in_x(self) -> bool:
        return bool(self.x_coeffs) and self.x_coeffs[-1] == PolyQ.constant(1)

    def specialize(self, t0: Fraction) -> PolyQ:
        return PolyQ(tuple(c(t0) for c in self.x_coeffs))

    def format(self) -> str:
        parts = []
        for i in range(self.x_degree, -1, -1):
            c = self.x_coeffs[i]
            if c.is_zero:
                continue
            power = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
            coeff = c.format("T")
            if not power:
                parts.append(f"({coeff})")
            elif c == PolyQ.constant(1):
                parts.append(power)
            else:
                parts.append(f"({coeff})*{power}")
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class BranchOrbit:
    """A Galois orbit of branch points with its inertia class."""

    point: AlgPoint
    inertia_class: ConjClass

    def __post_init__(self):
        if self.inertia_class.element_order < 2:
            raise InputError(f"Branch orbit {self.point.label()} has trivial inertia class")

    @property
    def reversed_point(self) -> AlgPoint:
        return reverse_minpoly(self.point)


@dataclass(frozen=True, eq=False)
class CoverData:
    """
    A Galois cover E/Q(T): group, branch orbits with inertia classes, optional
    defining polynomial, declared vertical-ramification primes and the
    centerless flag.
    """

    name: str
    group: FiniteGroup
    orbits: Tuple[BranchOrbit, ...]
    defining_poly: Optional[BivariatePoly] = None
    vertical_ram_primes: FrozenSet[int] = frozenset()
    centerless: bool = False
    notes: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.orbits:
            raise InputError(f"Cover {self.name} has no branch orbits")
        keys = [(o.point.is_infinity, o.point.minpoly) for o in self.orbits]
        if len(set(keys)) != len(keys):
            raise InputError(f"Cover {self.name} lists a branch orbit twice")
        if self.defining_poly is not None:
            if not self.defining_poly.is_monic_in_x:
                raise InputError(f"Defining polynomial of {self.name} is not monic in X")
            degree = getattr(self.group, "degree", None)
            if degree is not None and self.defining_poly.x_degree != degree:
                raise InputError(
                    f"Defining polynomial of {self.name} has X-degree {self.defining_poly.x_degree}, "
                    f"group acts on {degree} points"
                )
        for orbit in self.orbits:
            if orbit.inertia_class not in self.group.classes:
                raise InputError(f"Class {orbit.inertia_class.label} is not a class of {self.group.name}")

    @property
    def branch_point_count(self) -> int:
        """Number of branch points over the algebraic closure."""
        return sum(o.point.degree for o in self.orbits)

    @property
    def has_infinity(self) -> bool:
        return any(o.point.is_infinity for o in self.orbits)

    @property
    def rational_branch_points(self) -> List[PointP1]:
        return [o.point.value for o in self.orbits if o.point.is_rational]

    @property
    def classes(self) -> List[ConjClass]:
        return [o.inertia_class for o in self.orbits]

    def is_branch_point(self, t0: PointP1) -> bool:
        return any(o.point.contains(t0) for o in self.orbits)

    def caveats(self) -> List[str]:
        out = list(self.notes)
        for i, orbit in enumerate(self.orbits):
            if orbit.point.provenance == "user-asserted":
                out.append(
                    f"orbit {i} ({orbit.point.minpoly.format('T')}): irreducibility user-asserted"
                )
        if not self.centerless:
            out.append(VERTICAL_DEFAULT_CAVEAT)
        return out


# ============================================
# Bad primes
# ============================================

def _meet_rational(p: int, a: PointP1, b: PointP1) -> bool:
    """Distinct rational points meet iff v(a − b) > 0 or v(1/a − 1/b) > 0, in the chart where both live."""
    va, vb = vp(a, p), vp(b, p)
    if va >= 0 and vb >= 0 and a is not INFINITY and b is not INFINITY:
        if vp(Fraction(a) - Fraction(b), p) > 0:
            return True
    if va <= 0 and vb <= 0:
        inv_a = Fraction(0) if a is INFINITY else 1 / Fraction(a)
        inv_b = Fraction(0) if b is INFINITY else 1 / Fraction(b)
        if vp(inv_a - inv_b, p) > 0:
            return True
    return False


def classify_prime(cover: CoverData, p: int) -> PrimeClassification:
    """
    Good/Bad classification of p for the cover.

    Bad when p divides |G|, when two branch points meet modulo p (orbits
    pairwise through resultants of minimal polynomials in a chart where both
    are p-integral, conjugates through discriminants), when p is a declared
    vertical-ramification prime of a cover with nontrivial center, or when
    neither chart of a non-rational orbit is p-integral (then meeting and
    ramification in the field of the branch point are not decided and p is
    conservatively bad).

    Args:
        cover: the cover
        p: a prime

    Returns:
        PrimeClassification with the reasons collected
    """
    require_prime(p, "classify_prime")
    reasons: List[str] = []

    if cover.group.order % p == 0:
        reasons.append(f"(1) {p} divides |G| = {cover.group.order}")

    charts = []
    for i, orbit in enumerate(cover.orbits):
        m = orbit.point.minpoly
        m_star = orbit.reversed_point.minpoly
        charts.append((m, m_star, m.is_p_integral(p), m_star.is_p_integral(p)))
        if orbit.point.is_rational:
            continue
        finite_ok, infinite_ok = charts[-1][2], charts[-1][3]
        if not finite_ok and not infinite_ok:
            reasons.append(f"(4) undecided for orbit {i}, conservatively bad")
            continue
        disc = discriminant(m if finite_ok else m_star)
        if vp(disc, p) > 0:
            reasons.append(f"(2) conjugates in orbit {i} meet ({p} divides disc = {disc})")

    for (i, a), (j, b) in combinations(enumerate(cover.orbits), 2):
        if a.point.is_rational and b.point.is_rational:
            if _meet_rational(p, a.point.value, b.point.value):
                reasons.append(
                    f"(2) branch points {format_point(a.point.value)} and {format_point(b.point.value)} meet"
                )
            continue
        m_i, ms_i, fi, si = charts[i]
        m_j, ms_j, fj, sj = charts[j]
        tested = False
        if fi and fj:
            tested = True
            if vp(resultant(m_i, m_j), p) > 0:
                reasons.append(f"(2) orbits {i} and {j} meet ({p} divides Res(m_{i}, m_{j}))")
                continue
        if si and sj:
            tested = True
            if vp(resultant(ms_i, ms_j), p) > 0:
                reasons.append(f"(2) orbits {i} and {j} meet ({p} divides Res(m*_{i}, m*_{j}))")
                continue
        if not tested:
            reasons.append(f"(2) undecided for orbits {i} and {j}, conservatively bad")

    if not cover.centerless and p in cover.vertical_ram_primes:
        reasons.append(f"(3) {p} is a declared vertical-ramification prime")

    verdict = "Bad" if reasons else "Good"
    logger.debug(f"{cover.name}: p={p} {verdict} {reasons}")
    return PrimeClassification(p=p, verdict=verdict, reasons=reasons)


def is_good_prime(cover: CoverData, p: int) -> bool:
    return classify_prime(cover, p).good


# ============================================
# Specialization
# ============================================

def specialize_defining_poly(cover: CoverData, t0: PointP1) -> PolyQ:
    """
    P(t0, X) for a rational t0.

    Raises:
        InputError: the cover has no defining polynomial
        SpecializationError: t0 = ∞ or P(t0, X) is not separable
    """
    if cover.defining_poly is None:
        raise InputError(f"Cover {cover.name} has no defining polynomial")
    if t0 is INFINITY:
        raise SpecializationError("specialize_defining_poly", "cannot specialize at ∞")
    f = cover.defining_poly.specialize(Fraction(t0))
    if discriminant(f) == 0:
        raise SpecializationError(
            "specialize_defining_poly",
            f"P({format_point(t0)}, X) = {f.format('X')} is not separable; "
            f"{format_point(t0)} is (possibly) a branch point",
        )
    return f
