"""
Ramiforge - Prescriber Service
Valuation-exact lifting, CRT assembly of specialization recipes, the inertia
predictor, ramification witnesses and Frobenius-sampling group certificates.
"""

from fractions import Fraction
from typing import Dict, List, Optional, Tuple
import logging

from sympy import primerange

from ramiforge.config import settings
from ramiforge.errors import (
    BadPrimeError,
    InputError,
    InternalConsistencyError,
    PreconditionError,
    SearchExhaustedError,
)
from ramiforge.models import (
    FrobeniusEntry,
    GroupCertificate,
    InertiaPrediction,
    PredictionResult,
    PrescriptionRequest,
    RamifiedEntry,
    Recipe,
    WitnessResult,
)
from ramiforge.services.cover import (
    CoverData,
    classify_prime,
    specialize_defining_poly,
)
from ramiforge.services.exact_arith import (
    PointP1,
    PolyQ,
    crt,
    degree_pattern,
    factor_mod_p,
    format_point,
    invert_point,
    require_prime,
    vp,
)
from ramiforge.services.groups import (
    ConjClass,
    format_cycle_type,
    is_g_complete,
    ramification_index,
)
from ramiforge.services.places import (
    intersection_multiplicity,
    meets_either_chart,
    rationalized_by,
    unitizes,
)

logger = logging.getLogger(__name__)

WITNESS_CANDIDATES = 3


# ============================================
# Local lifting
# ============================================

def lift_to_valuation(m: PolyQ, p: int, d: int, root: Optional[int] = None) -> Fraction:
    """
    A p-integral θ with v_p(m(θ)) = d exactly.

    Seeds at the smallest residue root of m (or ``root``), moves to valuation
    one by adding p if needed, then raises the valuation one step at a time
    with θ ← θ − m(θ)/m′(θ) + p^(d+1). The step from 1 to 2 adds p^3 instead
    when m″(θ)/2 is a p-unit.

    Args:
        m: monic p-integral polynomial with a simple root mod p
        p: prime
        d: target valuation, d ≥ 1
        root: residue root to start from

    Returns:
        θ as a Fraction

    Raises:
        PreconditionError: m not p-integral, no root mod p, or d < 1
        BadPrimeError: the residue root is multiple
    """
    require_prime(p, "lift_to_valuation")
    if d < 1:
        raise PreconditionError("lift_to_valuation", f"target valuation must be ≥ 1, got {d}")
    if not m.is_p_integral(p):
        raise PreconditionError("lift_to_valuation", f"{m} is not {p}-integral")

    reduced = m.reduce(p)
    if root is None:
        roots = reduced.roots()
        if not roots:
            raise PreconditionError("lift_to_valuation", f"{p} is not a prime divisor of {m}")
        root = roots[0]
    elif reduced(root % p) != 0:
        raise PreconditionError("lift_to_valuation", f"{root} is not a root of {m} mod {p}")

    derivative = m.derivative()
    if vp(derivative(root), p) > 0:
        raise BadPrimeError(
            "lift_to_valuation", f"{root} is a multiple root of {m} mod {p}; {p} is bad"
        )

    theta = Fraction(root)
    if vp(m(theta), p) != 1:
        theta += p

    for level in range(1, d):
        correction = -m(theta) / derivative(theta)
        if level == 1 and vp(m.taylor_coefficient(2, theta), p) == 0:
            theta = theta + correction + p ** 3
        else:
            theta = theta + correction + p ** (level + 1)

    if vp(m(theta), p) != d:
        raise InternalConsistencyError(
            f"lift_to_valuation({m}, {p}, {d}) produced θ={theta} with valuation {vp(m(theta), p)}"
        )
    return theta


def transition_candidates(p: int, root: int, count: int = WITNESS_CANDIDATES) -> List[int]:
    """root, root + p, root + 2p, ..."""
    return [root + k * p for k in range(count)]


# ============================================
# Recipes
# ============================================

def _frobenius_residue(
    cover: CoverData, entry: FrobeniusEntry, target: ConjClass, search_bound: int, seed: int
) -> int:
    """Smallest residue ρ with P(ρ, X) squarefree mod p and factor degrees equal to the target cycle type."""
    p = entry.p
    for rho in range(min(p, search_bound)):
        f = cover.defining_poly.specialize(Fraction(rho))
        if not f.is_p_integral(p):
            continue
        fp = f.reduce(p)
        if fp.degree != f.degree or not fp.is_squarefree():
            continue
        if tuple(degree_pattern(factor_mod_p(fp, seed))) == target.cycle_type:
            logger.debug(f"Frobenius {target.label} at {p} reached from residue {rho}")
            return rho
    raise SearchExhaustedError(
        f"class {target.label} is unreachable as a Frobenius at {p} within {min(p, search_bound)} residues"
    )


def _check_ramified_entry(cover: CoverData, entry: RamifiedEntry) -> None:
    if entry.orbit_index >= len(cover.orbits):
        raise InputError(f"Orbit index {entry.orbit_index} out of range for {cover.name}")
    point = cover.orbits[entry.orbit_index].point
    if not point.is_special and not unitizes(entry.p, point):
        raise PreconditionError("build_recipe", f"{entry.p} does not unitize {point.label()}")
    if not rationalized_by(entry.p, point):
        raise PreconditionError("build_recipe", f"{point.label()} is not rationalized by {entry.p}")


def _require_good(cover: CoverData, p: int, operation: str) -> None:
    classification = classify_prime(cover, p)
    if not classification.good:
        raise BadPrimeError(operation, f"{p} is bad for {cover.name}: {'; '.join(classification.reasons)}")


def build_recipe(
    cover: CoverData,
    request: PrescriptionRequest,
    search_bound: Optional[int] = None,
    seed: Optional[int] = None,
) -> Recipe:
    """
    Assemble t0 = θ + u·M with prescribed inertia at the ramified primes and
    prescribed Frobenius at the unramified ones.

    Finite orbits contribute a congruence modulo p^(a+1) from lift_to_valuation;
    the orbit ∞ at p contributes p^a to the denominator of θ; Frobenius
    entries contribute the residue found by search modulo p.

    Args:
        cover: the cover
        request: ramified and Frobenius entries at distinct primes
        search_bound: residues tried per Frobenius prime
        seed: equal-degree splitting seed

    Returns:
        Recipe with predictions, caveats and annotations

    Raises:
        BadPrimeError, PreconditionError, SearchExhaustedError, InputError
    """
    search_bound = search_bound or settings.frobenius_search_bound
    seed = settings.effective_seed(seed)
    group = cover.group
    caveats: List[str] = []
    annotations: List[str] = []

    for entry in request.ramified:
        _require_good(cover, entry.p, "build_recipe")
        _check_ramified_entry(cover, entry)
    if request.unramified_frobenius and cover.defining_poly is None:
        raise InputError(f"Frobenius prescription needs a defining polynomial; {cover.name} has none")
    for entry in request.unramified_frobenius:
        _require_good(cover, entry.p, "build_recipe")

    # Denominator from the orbit ∞
    denominator = 1
    for entry in request.ramified:
        if cover.orbits[entry.orbit_index].point.is_infinity:
            denominator *= entry.p ** entry.exponent

    congruences: List[Tuple[Fraction, int]] = []
    modulus = 1
    predictions: List[InertiaPrediction] = []
    witnessed: List[ConjClass] = []

    for entry in request.ramified:
        orbit = cover.orbits[entry.orbit_index]
        p, a = entry.p, entry.exponent
        if orbit.point.is_infinity:
            congruences.append((Fraction(denominator, p ** a), p))
        else:
            local = lift_to_valuation(orbit.point.minpoly, p, a)
            logger.debug(f"Local lift at {p} for orbit {entry.orbit_index}: θ={local}")
            congruences.append((denominator * local, p ** (a + 1)))
            modulus *= p ** (a + 1)

        power_class = group.class_power(orbit.inertia_class, a)
        e = ramification_index(orbit.inertia_class, a)
        predictions.append(InertiaPrediction(
            p=p,
            class_label=power_class.label,
            ram_index=e,
            verdict="Ramified" if e > 1 else "Unramified",
            cycle_type=format_cycle_type(power_class.cycle_type) if power_class.cycle_type else None,
            orbit_index=entry.orbit_index,
            exponent=a,
        ))
        witnessed.append(power_class)

    bound = cover.branch_point_count ** 2 * group.order ** 2
    for entry in request.unramified_frobenius:
        target = group.class_by_label(entry.class_label)
        if target.cycle_type is None:
            raise PreconditionError(
                "build_recipe", f"Frobenius search needs cycle types; {group.name} has none"
            )
        if len(group.classes_with_cycle_type(target.cycle_type)) > 1:
            caveats.append(
                f"Frobenius at {entry.p}: cycle type {format_cycle_type(target.cycle_type)} "
                f"is shared by several classes; only the cycle type is prescribed"
            )
        rho = _frobenius_residue(cover, entry, target, search_bound, seed)
        congruences.append((Fraction(denominator * rho), entry.p))
        modulus *= entry.p
        predictions.append(InertiaPrediction(
            p=entry.p,
            class_label=group.identity_class.label,
            ram_index=1,
            verdict="Unramified",
            cycle_type=format_cycle_type(group.identity_class.cycle_type)
            if group.identity_class.cycle_type else None,
            frobenius_class=target.label,
        ))
        witnessed.append(target)
        relation = "≥" if entry.p >= bound else "<"
        annotations.append(
            f"Frobenius prime {entry.p} {relation} r²|G|² = {bound}; residue found by search"
        )

    numerator = crt(congruences)
    theta = Fraction(numerator, denominator)

    forces_full_group = is_g_complete(group, witnessed)
    if forces_full_group:
        annotations.append(f"predicted classes are g-complete: every admissible specialization has group {group.name}")
    elif forces_full_group is None:
        caveats.append(
            f"g-completeness is undecided for {group.name}: "
            "its class list is not known to be complete or the group is too large"
        )

    excluded = [format_point(t) for t in cover.rational_branch_points]
    caveats.extend(cover.caveats())
    caveats.append("predictions at primes outside the request are not claimed")

    recipe = Recipe(
        cover=cover.name,
        theta=theta,
        modulus=modulus,
        u_constraints={p: 0 for p in request.primes},
        predictions=predictions,
        excluded_points=excluded,
        forces_full_group=forces_full_group,
        annotations=annotations,
        caveats=caveats,
    )
    logger.info(f"Recipe for {cover.name}: θ={theta}, M={modulus}, {len(predictions)} predictions")
    return recipe


def recipe_points(cover: CoverData, recipe: Recipe, count: int) -> List[Tuple[int, Fraction]]:
    """The first ``count`` pairs (u, θ + u·M), u = 0, 1, 2, ..., skipping branch points."""
    points = []
    u = 0
    while len(points) < count:
        t0 = recipe.point(u)
        if not cover.is_branch_point(t0):
            points.append((u, t0))
        u += 1
    return points


# ============================================
# Prediction
# ============================================

def predict_inertia(cover: CoverData, p: int, t0: PointP1) -> PredictionResult:
    """
    Predicted inertia at p of the specialization at t0.

    Args:
        cover: the cover
        p: prime
        t0: rational point or ∞, not a branch point

    Returns:
        PredictionResult with outcome prediction, no_meeting or undecidable

    Raises:
        PreconditionError: t0 is a branch point
        InternalConsistencyError: two orbits meet t0 at a good prime
    """
    require_prime(p, "predict_inertia")
    label = format_point(t0)
    if cover.is_branch_point(t0):
        raise PreconditionError("predict_inertia", f"{label} is a branch point of {cover.name}")

    classification = classify_prime(cover, p)
    if not classification.good:
        return PredictionResult(
            p=p, t0=label, outcome="undecidable",
            reason=f"{p} is bad: {'; '.join(classification.reasons)}",
        )

    meeting: List[Tuple[int, int]] = []
    for i, orbit in enumerate(cover.orbits):
        point = orbit.point
        if point.is_special or unitizes(p, point):
            multiplicity = intersection_multiplicity(p, t0, point)
            if multiplicity > 0:
                meeting.append((i, multiplicity))
            continue
        met = meets_either_chart(p, t0, point)
        if met is None or met:
            return PredictionResult(
                p=p, t0=label, outcome="undecidable", orbit_index=i,
                reason=f"{label} may meet orbit {i}, which {p} does not unitize",
            )

    if len(meeting) > 1:
        raise InternalConsistencyError(
            f"{label} meets orbits {[i for i, _ in meeting]} of {cover.name} at good prime {p}"
        )
    if not meeting:
        return PredictionResult(p=p, t0=label, outcome="no_meeting", reason="no branch point met")

    i, a = meeting[0]
    inertia = cover.orbits[i].inertia_class
    try:
        power_class = cover.group.class_power(inertia, a)
    except PreconditionError as e:
        return PredictionResult(
            p=p, t0=label, outcome="undecidable", orbit_index=i,
            intersection_multiplicity=a, reason=str(e),
        )
    e = ramification_index(inertia, a)
    prediction = InertiaPrediction(
        p=p,
        class_label=power_class.label,
        ram_index=e,
        verdict="Ramified" if e > 1 else "Unramified",
        cycle_type=format_cycle_type(power_class.cycle_type) if power_class.cycle_type else None,
        orbit_index=i,
        exponent=a,
    )
    return PredictionResult(
        p=p, t0=label, outcome="prediction", prediction=prediction,
        orbit_index=i, intersection_multiplicity=a,
    )


def unramified_cycle_type(cover: CoverData) -> Optional[str]:
    identity = cover.group.identity_class
    return format_cycle_type(identity.cycle_type) if identity.cycle_type else None


# ============================================
# Witnesses
# ============================================

def ramification_witness(cover: CoverData, p: int) -> WitnessResult:
    """
    A point whose specialization ramifies at p, or NeverRamifies when p is
    not a prime divisor of m_t·m_{1/t}.

    Candidates are ρ, ρ + p, ρ + 2p for a residue root ρ of a branch minimal
    polynomial, and 1/(ρ + kp) for roots of the reversed polynomials.
    """
    require_prime(p, "ramification_witness")
    classification = classify_prime(cover, p)
    if not classification.good:
        return WitnessResult(p=p, outcome="undecidable", reason=f"{p} is bad: {'; '.join(classification.reasons)}")
    for i, orbit in enumerate(cover.orbits):
        if not orbit.point.is_special and not unitizes(p, orbit.point):
            return WitnessResult(p=p, outcome="undecidable", reason=f"{p} does not unitize orbit {i}")

    divisor = False
    for orbit in cover.orbits:
        charts = [(orbit.point.minpoly, False), (orbit.reversed_point.minpoly, True)]
        for minpoly, reversed_chart in charts:
            if minpoly.degree < 1:
                continue
            for rho in minpoly.reduce(p).roots():
                divisor = True
                for candidate in transition_candidates(p, rho):
                    t0 = invert_point(Fraction(candidate)) if reversed_chart else Fraction(candidate)
                    if cover.is_branch_point(t0):
                        continue
                    result = predict_inertia(cover, p, t0)
                    if result.outcome == "prediction" and result.prediction.verdict == "Ramified":
                        return WitnessResult(
                            p=p, outcome="witness", t0=format_point(t0), prediction=result.prediction,
                        )

    if divisor:
        raise InternalConsistencyError(f"{p} divides the branch locus of {cover.name} but no candidate ramifies")
    return WitnessResult(
        p=p, outcome="never_ramifies",
        reason=f"{p} is not a prime divisor of the branch locus polynomials",
    )


# ============================================
# Group certification
# ============================================

def _irreducible_compatible(n: int, patterns: List[List[int]]) -> bool:
    candidates = set(range(1, n))
    for pattern in patterns:
        sums = {0}
        for d in pattern:
            sums |= {s + d for s in sums}
        candidates &= sums
        if not candidates:
            return True
    return not candidates


def certify_group(
    cover: CoverData, t0: Fraction, prime_budget: Optional[int] = None, seed: Optional[int] = None
) -> GroupCertificate:
    """
    Certify Gal(E_t0/Q) = G by Frobenius sampling.

    Cycle types are read off mod-q factorizations of P(t0, X) at good primes
    q ≤ budget where it is squarefree. Certified only when the witnessed
    classes are g-complete and the patterns rule out a proper factor.

    Raises:
        InputError: the cover has no defining polynomial
        PreconditionError: t0 is a branch point
    """
    prime_budget = prime_budget or settings.prime_budget
    seed = settings.effective_seed(seed)
    if cover.defining_poly is None:
        raise InputError(f"Cover {cover.name} has no defining polynomial")
    if cover.is_branch_point(t0):
        raise PreconditionError("certify_group", f"{format_point(t0)} is a branch point")
    group = cover.group
    label = format_point(t0)
    if not group.is_permutation_group:
        return GroupCertificate(
            t0=label, group=group.name, status="Inconclusive",
            reason="certification needs a permutation group",
        )

    f = specialize_defining_poly(cover, t0)
    witnessed: Dict[str, ConjClass] = {}
    patterns: Dict[str, List[int]] = {}
    foreign = []
    for q in primerange(2, prime_budget + 1):
        q = int(q)
        if not f.is_p_integral(q) or not classify_prime(cover, q).good:
            continue
        fq = f.reduce(q)
        if fq.degree != f.degree or not fq.is_squarefree():
            continue
        pattern = degree_pattern(factor_mod_p(fq, seed))
        patterns[str(q)] = pattern
        matches = group.classes_with_cycle_type(tuple(pattern))
        if not matches:
            foreign.append(q)
        elif len(matches) == 1:
            witnessed[matches[0].label] = matches[0]

    g_complete = is_g_complete(group, witnessed.values()) if witnessed else False
    irreducible = _irreducible_compatible(f.degree, list(patterns.values()))
    reason = None
    if foreign:
        status, reason = "Inconclusive", f"cycle types at {foreign} are not in {group.name}"
        logger.warning(f"{cover.name} at {label}: {reason}")
    elif g_complete and irreducible:
        status = "Certified"
    else:
        status = "Inconclusive"
        if g_complete is None:
            reason = f"g-completeness is undecided for {group.name}"
        elif not g_complete:
            reason = "witnessed classes are not g-complete"
        else:
            reason = "irreducibility not established"

    return GroupCertificate(
        t0=label,
        group=group.name,
        status=status,
        witnessed_classes=sorted(witnessed),
        patterns=patterns,
        primes_sampled=len(patterns),
        g_complete=g_complete,
        reason=reason,
    )


def parse_ramified(text: str) -> RamifiedEntry:
    """
    "p:i:a" into a RamifiedEntry.

    Raises:
        InputError: malformed entry
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"Ramified entry '{text}' must be p:orbit:exponent")
    try:
        return RamifiedEntry(p=int(parts[0]), orbit_index=int(parts[1]), exponent=int(parts[2]))
    except ValueError as e:
        raise InputError(f"Ramified entry '{text}' is malformed", str(e))


def parse_frobenius(text: str) -> FrobeniusEntry:
    """
    "p:class" into a FrobeniusEntry.

    Raises:
        InputError: malformed entry
    """
    p, sep, label = text.partition(":")
    if not sep or not label:
        raise InputError(f"Frobenius entry '{text}' must be p:class")
    try:
        return FrobeniusEntry(p=int(p), class_label=label)
    except ValueError as e:
        raise InputError(f"Frobenius entry '{text}' is malformed", str(e))
