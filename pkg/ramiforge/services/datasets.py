"""
Ramiforge - Dataset Service
Generators for the cover families shipped as data files.
"""

from fractions import Fraction
from math import gcd
from typing import Callable, Dict, Optional, Sequence
import logging

from ramiforge.errors import InputError
from ramiforge.services.cover import BivariatePoly, BranchOrbit, CoverData
from ramiforge.services.exact_arith import PolyQ
from ramiforge.services.groups import (
    AbstractGroup,
    alternating_group,
    cyclic_group,
    format_cycle_type,
    symmetric_group,
)
from ramiforge.services.places import AlgPoint

logger = logging.getLogger(__name__)

MONSTER_ORDER_FACTORIZATION = {
    2: 46, 3: 20, 5: 9, 7: 6, 11: 2, 13: 3, 17: 1, 19: 1,
    23: 1, 29: 1, 31: 1, 41: 1, 47: 1, 59: 1, 71: 1,
}


def trinomial_branch_point(n: int, m: int) -> Fraction:
    """m^m (n−m)^(n−m) / n^n."""
    return Fraction(m ** m * (n - m) ** (n - m), n ** n)


def trinomial(n: int, m: int, q: int, r: int, name: Optional[str] = None) -> CoverData:
    """
    The S_n cover given by X^n − T^r X^m + T^q.

    Branch points are 0 (class [m^1 (n−m)^1]), ∞ (class [n^1]) and
    m^m (n−m)^(n−m)/n^n (transpositions).

    Raises:
        InputError: parameters outside 1 ≤ m < n, gcd(m, n) = 1, q(n − m) − rn = 1
    """
    if not (1 <= m < n) or gcd(m, n) != 1:
        raise InputError(f"trinomial needs 1 ≤ m < n with gcd(m, n) = 1, got n={n}, m={m}")
    if q * (n - m) - r * n != 1:
        raise InputError(f"trinomial needs q(n − m) − rn = 1, got q={q}, r={r}")

    group = symmetric_group(n)
    orbits = (
        BranchOrbit(AlgPoint.zero(), group.class_by_label(format_cycle_type((m, n - m)))),
        BranchOrbit(AlgPoint.infinity(), group.class_by_label(format_cycle_type((n,)))),
        BranchOrbit(
            AlgPoint.rational(trinomial_branch_point(n, m)),
            group.class_by_label(format_cycle_type([1] * (n - 2) + [2])),
        ),
    )
    x_coeffs = [PolyQ(())] * (n + 1)
    x_coeffs[n] = PolyQ.constant(1)
    x_coeffs[m] = PolyQ.monomial(r, -1)
    x_coeffs[0] = PolyQ.monomial(q)
    return CoverData(
        name=name or f"trinomial_{n}_{m}_{q}_{r}",
        group=group,
        orbits=orbits,
        defining_poly=BivariatePoly(tuple(x_coeffs)),
        centerless=True,
    )


def quadratic(factors: Sequence[PolyQ], name: Optional[str] = None) -> CoverData:
    """
    The cover Q(T)(√P(T)) with P the product of distinct monic irreducible factors.

    ∞ is a branch point exactly when deg P is odd.
    """
    if not factors:
        raise InputError("quadratic cover needs at least one factor")
    group = cyclic_group(2)
    involution = group.class_by_label("[2^1]")
    product = PolyQ.constant(1)
    orbits = []
    for f in factors:
        product = product * f
        orbits.append(BranchOrbit(AlgPoint.from_minpoly(f), involution))
    if product.degree % 2:
        orbits.append(BranchOrbit(AlgPoint.infinity(), involution))
    return CoverData(
        name=name or f"quad_{product.format('T')}",
        group=group,
        orbits=tuple(orbits),
        defining_poly=BivariatePoly((-product, PolyQ(()), PolyQ.constant(1))),
        centerless=False,
    )


def monster() -> CoverData:
    """Rigid Monster realization: branch points 0, 1, ∞ with classes 2A, 3B, 29A."""
    order = 1
    for p, k in MONSTER_ORDER_FACTORIZATION.items():
        order *= p ** k
    group = AbstractGroup("M", order, [("1A", 1), ("2A", 2), ("3B", 3), ("29A", 29)])
    return CoverData(
        name="monster",
        group=group,
        orbits=(
            BranchOrbit(AlgPoint.zero(), group.class_by_label("2A")),
            BranchOrbit(AlgPoint.rational(Fraction(1)), group.class_by_label("3B")),
            BranchOrbit(AlgPoint.infinity(), group.class_by_label("29A")),
        ),
        centerless=True,
        notes=("defining polynomial unknown; class data only",),
    )


def mestre_a5() -> CoverData:
    """
    Splitting field of (X^5 − X) − T(25X^4 − 9), branched at the roots of
    1 + 3^3·5^5·T^4 with 3-cycle inertia.
    """
    group = alternating_group(5)
    branch = PolyQ.from_desc([1, 0, 0, 0, Fraction(1, 3 ** 3 * 5 ** 5)])
    return CoverData(
        name="mestre_a5",
        group=group,
        orbits=(BranchOrbit(AlgPoint.from_minpoly(branch), group.class_by_label("[1^2 3^1]")),),
        defining_poly=BivariatePoly((
            PolyQ.monomial(1, 9),
            PolyQ.constant(-1),
            PolyQ(()),
            PolyQ(()),
            PolyQ.monomial(1, -25),
            PolyQ.constant(1),
        )),
        centerless=True,
        notes=("regular with group A5 over fields containing Q(i); used here for branch-locus data",),
    )


_T = PolyQ.monomial(1)

BUNDLED: Dict[str, Callable[[], CoverData]] = {
    "quad_t2p1": lambda: quadratic([PolyQ.from_desc([1, 0, 1])], name="quad_t2p1"),
    "quad_sqrt_t": lambda: quadratic([_T], name="quad_sqrt_t"),
    "quad_t2p1_t2m2": lambda: quadratic(
        [PolyQ.from_desc([1, 0, 1]), PolyQ.from_desc([1, 0, -2])], name="quad_t2p1_t2m2"
    ),
    "trinomial_3_1_2_1": lambda: trinomial(3, 1, 2, 1),
    "trinomial_5_2_2_1": lambda: trinomial(5, 2, 2, 1),
    "trinomial_5_1_4_3": lambda: trinomial(5, 1, 4, 3),
    "monster": monster,
    "mestre_a5": mestre_a5,
}


def bundled(name: str) -> CoverData:
    """
    Raises:
        InputError: unknown dataset name
    """
    key = name[:-len(".cover")] if name.endswith(".cover") else name
    if key not in BUNDLED:
        raise InputError(f"Unknown dataset {name}; available: {sorted(BUNDLED)}")
    return BUNDLED[key]()
