"""
Ramiforge - Parametricity Service
Branch Point and Inertia Hypothesis checks for pairs of covers, and the
single-cover criteria built on them.
"""

from math import gcd, lcm
from typing import Any, Dict, List, Literal, Optional, Set
import logging

from sympy import divisors, isprime, legendre_symbol, primerange

from ramiforge.config import settings
from ramiforge.errors import PreconditionError, RamiforgeError
from ramiforge.models import (
    CorollaryVerdict,
    DivisorRow,
    ParametricityVerdict,
    PrescriptionRequest,
    RamifiedEntry,
)
from ramiforge.services.cover import CoverData, classify_prime
from ramiforge.services.exact_arith import PolyQ, discriminant, format_point, require_prime
from ramiforge.services.groups import format_cycle_type, power_closure, same_group
from ramiforge.services.oracle import observe_inertia, squarefree_kernel
from ramiforge.services.places import rationalized_by, unitizes
from ramiforge.services.prescriber import build_recipe, recipe_points

logger = logging.getLogger(__name__)

Chart = Literal["both", "finite", "reversed"]

NON_PARAMETRIC = "{c1} has specializations with group {group} that are not specializations of {c2}; {c2} is not {group}-parametric"


# ============================================
# Prime divisors of the branch locus
# ============================================

def branch_factors(cover: CoverData, chart: Chart = "both") -> List[PolyQ]:
    """Nonconstant factors of m_t (finite chart) and m_{1/t} (reversed chart)."""
    factors = []
    for orbit in cover.orbits:
        if chart in ("both", "finite") and orbit.point.minpoly.degree >= 1:
            factors.append(orbit.point.minpoly)
        if chart in ("both", "reversed") and orbit.reversed_point.minpoly.degree >= 1:
            factors.append(orbit.reversed_point.minpoly)
    return factors


def divisor_status(cover: CoverData, p: int, chart: Chart = "both") -> DivisorRow:
    """
    Whether p is a prime divisor of the branch-locus product.

    Linear factors divide every prime. A p-integral factor divides p iff it
    has a root mod p. A factor that is not p-integral leaves the answer
    undetermined unless another factor already decides it.
    """
    require_prime(p, "divisor_status")
    undetermined = []
    for f in branch_factors(cover, chart):
        if f.degree == 1:
            return DivisorRow(p=p, status="divisor", reason=f"linear factor {f.format('T')}")
        if not f.is_p_integral(p):
            undetermined.append(f.format("T"))
            continue
        roots = f.reduce(p).roots()
        if roots:
            return DivisorRow(p=p, status="divisor", reason=f"{f.format('T')} has root {roots[0]} mod {p}")
    if undetermined:
        return DivisorRow(p=p, status="undetermined", reason=f"not {p}-integral: {', '.join(undetermined)}")
    return DivisorRow(p=p, status="non_divisor")


def divisor_table(cover: CoverData, up_to: int) -> List[DivisorRow]:
    return [divisor_status(cover, int(p)) for p in primerange(2, up_to + 1)]


def drop_check(cover: CoverData, window: int) -> Optional[List[int]]:
    """
    Primes p ≤ window where m_t and m_{1/t} disagree as divisors.

    None when 0 or ∞ is a branch point.
    """
    if any(o.point.is_special for o in cover.orbits):
        return None
    disagreements = []
    for p in primerange(2, window + 1):
        finite = divisor_status(cover, int(p), "finite").status
        reversed_ = divisor_status(cover, int(p), "reversed").status
        if "undetermined" not in (finite, reversed_) and finite != reversed_:
            disagreements.append(int(p))
    return disagreements


# ============================================
# Inertia Hypothesis
# ============================================

def check_inertia_hypothesis(c1: CoverData, c2: CoverData) -> ParametricityVerdict:
    """
    Whether some inertia class of c1 lies outside the power closure of c2's classes.

    Raises:
        PreconditionError: the covers have different groups
    """
    if not same_group(c1.group, c2.group):
        raise PreconditionError(
            "check_inertia_hypothesis", f"groups differ: {c1.group.name} vs {c2.group.name}"
        )
    closure = power_closure(c2.group, c2.classes)
    closure_labels = {c.label for c in closure}
    missing = []
    for cls in c1.classes:
        if cls.label not in closure_labels and cls.label not in missing:
            missing.append(cls.label)
    holds = bool(missing)
    return ParametricityVerdict(
        hypothesis="IH",
        holds=holds,
        exact=True,
        witnesses=missing,
        consequence=NON_PARAMETRIC.format(c1=c1.name, c2=c2.name, group=c1.group.name) if holds else "",
        evidence={"closure": [c.label for c in closure]},
    )


def realize_inertia_witness(
    c1: CoverData, c2: CoverData, witness: str, max_prime: Optional[int] = None
) -> Dict[str, Any]:
    """
    Prescribe the witness class on c1 at the first admissible prime and check
    with the oracle that the observed inertia lies outside c2's power closure.

    Raises:
        PreconditionError: no admissible prime, or c1 has no defining polynomial
    """
    max_prime = max_prime or settings.prime_window
    if c1.defining_poly is None:
        raise PreconditionError("realize_inertia_witness", f"{c1.name} has no defining polynomial")
    index = next((i for i, o in enumerate(c1.orbits) if o.inertia_class.label == witness), None)
    if index is None:
        raise PreconditionError("realize_inertia_witness", f"{witness} is not an inertia class of {c1.name}")
    point = c1.orbits[index].point
    closure_types = {format_cycle_type(c.cycle_type) for c in power_closure(c2.group, c2.classes) if c.cycle_type}

    for p in primerange(2, max_prime + 1):
        p = int(p)
        if not classify_prime(c1, p).good or not classify_prime(c2, p).good:
            continue
        if not point.is_special and (not unitizes(p, point) or not rationalized_by(p, point)):
            continue
        recipe = build_recipe(c1, PrescriptionRequest(ramified=[RamifiedEntry(p=p, orbit_index=index, exponent=1)]))
        _, t0 = recipe_points(c1, recipe, 1)[0]
        report = observe_inertia(c1, t0, p)
        if not report.exact:
            continue
        return {
            "prime": p,
            "t0": format_point(t0),
            "observed_cycle_type": report.inertia_cycle_type,
            "outside_closure": report.inertia_cycle_type not in closure_types,
        }
    raise PreconditionError("realize_inertia_witness", f"no admissible prime ≤ {max_prime}")


# ============================================
# Branch Point Hypothesis
# ============================================

def _exact_mode(c1: CoverData, c2: CoverData) -> bool:
    return all(o.point.degree <= 2 for c in (c1, c2) for o in c.orbits)


def _kernels(cover: CoverData) -> Optional[Set[int]]:
    """Squarefree kernels of the quadratic branch factors; None when some factor is linear."""
    kernels = set()
    for f in branch_factors(cover):
        if f.degree == 1:
            return None
        kernels.add(squarefree_kernel(discriminant(f)))
    return kernels


def _representative_prime(residue: int, modulus: int) -> int:
    q = residue
    while not isprime(q) or q <= 2:
        q += modulus
    return q


def _divides(kernels: Optional[Set[int]], q: int) -> bool:
    if kernels is None:
        return True
    return any(legendre_symbol(k % q, q) == 1 for k in kernels)


def _minimal_modulus(classes: Set[int], modulus: int) -> int:
    units = [r for r in range(modulus) if gcd(r, modulus) == 1]
    for candidate in divisors(modulus):
        membership: Dict[int, bool] = {}
        consistent = True
        for r in units:
            key = r % candidate
            if membership.setdefault(key, r in classes) != (r in classes):
                consistent = False
                break
        if consistent:
            return int(candidate)
    return modulus


def _admissible(c1: CoverData, c2: CoverData, p: int) -> bool:
    return classify_prime(c1, p).good and classify_prime(c2, p).good


def check_branch_point_hypothesis(
    c1: CoverData, c2: CoverData, prime_window: Optional[int] = None
) -> ParametricityVerdict:
    """
    Whether infinitely many primes divide the branch locus of c1 but not that of c2.

    Exact when every branch point of both covers has degree ≤ 2: divisibility
    by a quadratic factor is a Legendre symbol of its discriminant kernel, so
    the witness primes are a union of classes modulo lcm(4|k|), each holding
    infinitely many primes. Otherwise the verdict is empirical on the window.
    """
    window = prime_window or settings.prime_window
    caveats: List[str] = []
    consequence = NON_PARAMETRIC.format(c1=c1.name, c2=c2.name, group=c1.group.name)

    if _exact_mode(c1, c2):
        k1, k2 = _kernels(c1), _kernels(c2)
        if k2 is None:
            return ParametricityVerdict(
                hypothesis="BPH", holds=False, exact=True,
                evidence={"reason": f"{c2.name} has a rational branch point; every prime divides its branch locus"},
            )
        modulus = lcm(*(4 * abs(k) for k in (k1 or set()) | k2))
        classes = set()
        for r in range(1, modulus):
            if gcd(r, modulus) != 1:
                continue
            q = _representative_prime(r, modulus)
            if _divides(k1, q) and not _divides(k2, q):
                classes.add(r)
        reduced = _minimal_modulus(classes, modulus)
        witness_classes = sorted({r % reduced for r in classes})

        empirical, exceptions, flagged = [], [], []
        for p in primerange(2, window + 1):
            p = int(p)
            if modulus % p == 0 or not _admissible(c1, c2, p):
                flagged.append(p)
                continue
            observed = (
                divisor_status(c1, p).status == "divisor"
                and divisor_status(c2, p).status == "non_divisor"
            )
            if observed:
                empirical.append(p)
            if observed != (p % modulus in classes):
                exceptions.append(p)
        if exceptions:
            logger.warning(f"BPH congruence and window disagree at {exceptions}")
        if classes and not empirical:
            caveats.append(f"holds, but no admissible witness in window p ≤ {window}")
        return ParametricityVerdict(
            hypothesis="BPH",
            holds=bool(classes),
            exact=True,
            witnesses=[f"p ≡ {r} mod {reduced}" for r in witness_classes],
            consequence=consequence if classes else "",
            evidence={
                "kernels_c1": sorted(k1) if k1 is not None else "rational branch point",
                "kernels_c2": sorted(k2),
                "modulus": reduced,
                "window": window,
                "empirical_witnesses": empirical,
                "exceptions": exceptions,
                "flagged": flagged,
            },
            caveats=caveats,
        )

    witnesses, undetermined = [], []
    for p in primerange(2, window + 1):
        p = int(p)
        s1, s2 = divisor_status(c1, p).status, divisor_status(c2, p).status
        if "undetermined" in (s1, s2):
            undetermined.append(p)
        elif s1 == "divisor" and s2 == "non_divisor":
            witnesses.append(p)
    caveats.append(f"empirical verdict on the window p ≤ {window}; infinitude is not proven")
    drops = {c.name: drop_check(c, window) for c in (c1, c2)}
    return ParametricityVerdict(
        hypothesis="BPH",
        holds=bool(witnesses),
        exact=False,
        witnesses=[str(p) for p in witnesses],
        consequence=consequence if witnesses else "",
        evidence={
            "window": window,
            "witness_count": len(witnesses),
            "admissible_witnesses": [p for p in witnesses if _admissible(c1, c2, p)],
            "undetermined": undetermined,
            "drop_disagreements": drops,
        },
        caveats=caveats,
    )


# ============================================
# Single-cover criteria
# ============================================

def check_four_branch_corollary(cover: CoverData) -> CorollaryVerdict:
    """Exactly four branch points over Q̄, none rational (∞ counts as rational)."""
    count = cover.branch_point_count
    rational = [o.point.label() for o in cover.orbits if o.point.is_rational]
    holds = count == 4 and not rational
    if holds:
        detail = "four non-rational branch points; not parametric against any cover with a rational branch point"
    elif count != 4:
        detail = f"{count} branch points"
    else:
        detail = f"rational branch points {rational}"
    return CorollaryVerdict(check="four_branch", holds=holds, detail=detail)


def check_H2(cover: CoverData) -> CorollaryVerdict:
    """
    Whether [n^1] or some [m^1 (n−m)^1] with gcd(m, n) = 1 is missing from the inertia classes.

    Raises:
        PreconditionError: the group is not a symmetric group of degree ≥ 3
    """
    group = cover.group
    if not group.is_permutation_group or not group.is_symmetric or group.degree < 3:
        raise PreconditionError("check_H2", f"{group.name} is not S_n with n ≥ 3")
    n = group.degree
    present = {o.inertia_class.cycle_type for o in cover.orbits}
    if (n,) not in present:
        return CorollaryVerdict(check="H2", holds=True, witness=format_cycle_type((n,)), detail="n-cycle class missing")
    for m in range(1, n // 2 + 1):
        if gcd(m, n) != 1:
            continue
        parts = tuple(sorted((m, n - m)))
        if parts not in present:
            return CorollaryVerdict(
                check="H2", holds=True, witness=format_cycle_type(parts), detail=f"class missing for m={m}"
            )
    return CorollaryVerdict(check="H2", holds=False, detail="all classes [n^1] and [m^1 (n−m)^1] occur")


def corollaries(cover: CoverData) -> List[CorollaryVerdict]:
    """Four-branch test, plus H2 when the group is symmetric."""
    verdicts = [check_four_branch_corollary(cover)]
    try:
        verdicts.append(check_H2(cover))
    except RamiforgeError as e:
        logger.info(f"H2 not applicable to {cover.name}: {e}")
    return verdicts

