"""
Ramiforge - Oracle Service
Independent ramification data of specialized polynomials: quadratic fields,
tame splitting types from first-order Newton polygons, Frobenius classes and
recipe verification tables.
"""

from fractions import Fraction
from math import gcd, lcm
from typing import List, Optional, Tuple
import logging

from sympy import legendre_symbol
from sympy.ntheory.factor_ import core
from sympy.ntheory.primetest import is_square

from ramiforge.config import settings
from ramiforge.errors import InternalConsistencyError, PreconditionError, SpecializationError
from ramiforge.models import RamReport, Recipe, Segment, VerificationRow, VerificationTable
from ramiforge.services.cover import CoverData, specialize_defining_poly
from ramiforge.services.exact_arith import (
    PolyFp,
    PolyQ,
    degree_pattern,
    discriminant,
    factor_mod_p,
    format_point,
    reduce_mod,
    require_prime,
    vp,
)
from ramiforge.services.groups import format_cycle_type
from ramiforge.services.prescriber import recipe_points

logger = logging.getLogger(__name__)

MAX_RECENTER_DEPTH = 32


class _Inconclusive(Exception):
    """Raised inside the Newton-polygon walk when first order does not decide."""


# ============================================
# Quadratic fields
# ============================================

def is_rational_square(d: Fraction) -> bool:
    d = Fraction(d)
    return d > 0 and is_square(d.numerator) and is_square(d.denominator)


def squarefree_kernel(d: Fraction) -> int:
    """The squarefree integer k with Q(√d) = Q(√k)."""
    d = Fraction(d)
    if d == 0:
        raise PreconditionError("squarefree_kernel", "zero has no kernel")
    sign = -1 if d < 0 else 1
    return sign * int(core(abs(d.numerator) * d.denominator))


def quadratic_ramifies(d: Fraction, p: int) -> bool:
    """
    Whether the odd prime p ramifies in Q(√d).

    Raises:
        PreconditionError: p = 2, d = 0 or d a rational square
    """
    require_prime(p, "quadratic_ramifies")
    if p == 2:
        raise PreconditionError("quadratic_ramifies", "p must be odd")
    d = Fraction(d)
    if d == 0 or is_rational_square(d):
        raise PreconditionError("quadratic_ramifies", f"{d} is a square; the field is Q")
    return vp(d, p) % 2 == 1


def quadratic_report(d: Fraction, p: int) -> RamReport:
    """Splitting data of Q(√d) at an odd prime p."""
    d = Fraction(d)
    if p == 2 or d == 0:
        return RamReport(p=p, degree=2, confidence="Inconclusive", note="quadratic oracle needs odd p and d ≠ 0")
    if is_rational_square(d):
        segments = [Segment(e=1, f=1), Segment(e=1, f=1)]
    elif quadratic_ramifies(d, p):
        segments = [Segment(e=2, f=1)]
    else:
        split = legendre_symbol(squarefree_kernel(d) % p, p) == 1
        segments = [Segment(e=1, f=1)] * 2 if split else [Segment(e=1, f=2)]
    return _report(p, 2, segments)


# ============================================
# Newton polygons
# ============================================

def lower_convex_hull(points: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
    """Lower convex hull by the monotone chain, points sorted by abscissa."""
    vertices: List[Tuple[int, int]] = []
    for point in points:
        while len(vertices) >= 2:
            (x1, y1), (x2, y2) = vertices[-2], vertices[-1]
            if Fraction(point[1] - y2, point[0] - x2) <= Fraction(y2 - y1, x2 - x1):
                vertices.pop()
            else:
                break
        vertices.append(point)
    return vertices


def _integral_monic_model(f: PolyQ, p: int) -> PolyQ:
    """p^(kn)·f(X/p^k) for the least k making it p-integral; same splitting at p."""
    n = f.degree
    k = 0
    for i in range(n):
        c = f.coeff(i)
        if c != 0 and vp(c, p) < 0:
            k = max(k, -((vp(c, p)) // (n - i)))
    if k == 0:
        return f
    return f.scale_variable(Fraction(1, p ** k)) * Fraction(p ** (k * n))


def _sides(h: PolyQ, p: int, k: int) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    points = [(i, int(vp(h.coeff(i), p))) for i in range(k + 1) if h.coeff(i) != 0]
    hull = lower_convex_hull(points)
    return [(hull[j], hull[j + 1]) for j in range(len(hull) - 1)]


def _cluster(g: PolyQ, p: int, center: Fraction, k: int, seed: int, depth: int) -> List[Segment]:
    """
    Segments of the k roots of g closest to ``center``: those x with
    v(x − center) larger than every other root's.
    """
    if depth > MAX_RECENTER_DEPTH:
        raise _Inconclusive("recentering did not separate the roots")
    h = g.shift(center)
    segments: List[Segment] = []
    # a root exactly at the center is an unramified linear factor
    if h.coeff(0) == 0:
        segments.append(Segment(e=1, f=1))
    for (x1, y1), (x2, y2) in _sides(h, p, k):
        length, height = x2 - x1, y1 - y2
        r = gcd(length, height)
        e, slope = length // r, height // r
        if e % p == 0:
            raise _Inconclusive(f"wild ramification (e = {e} divisible by {p})")
        residual = PolyFp(p, tuple(
            reduce_mod(h.coeff(x1 + j * e) / Fraction(p) ** (y1 - j * slope), p) for j in range(r + 1)
        ))
        if residual.is_squarefree():
            segments.extend(Segment(e=e, f=psi.degree) for psi, _ in factor_mod_p(residual, seed))
            continue
        if e != 1:
            raise _Inconclusive("residual polynomial is not squarefree on a ramified side")
        for psi, mult in factor_mod_p(residual, seed):
            if mult == 1:
                segments.append(Segment(e=1, f=psi.degree))
            elif psi.degree == 1:
                rho = (-psi.coeffs[0]) % p
                segments.extend(_cluster(g, p, center + rho * Fraction(p) ** slope, mult, seed, depth + 1))
            else:
                raise _Inconclusive("repeated residual factor of degree > 1 needs higher order")
    return segments


def _phi_adic_expansion(g: PolyQ, phi: PolyQ, count: int) -> List[PolyQ]:
    coeffs = []
    rest = g
    for _ in range(count):
        rest, remainder = rest.divmod(phi)
        coeffs.append(remainder)
    return coeffs


def _repeated_factor(g: PolyQ, phi: PolyFp, k: int, p: int) -> List[Segment]:
    """First-order φ-adic polygon for a repeated factor of degree > 1; only linear residuals decide."""
    lift = PolyQ(tuple(Fraction(c) for c in phi.coeffs))
    expansion = _phi_adic_expansion(g, lift, k + 1)
    points = [(i, int(a.min_valuation(p))) for i, a in enumerate(expansion) if not a.is_zero]
    hull = lower_convex_hull(points)
    segments = [Segment(e=1, f=phi.degree)] if expansion[0].is_zero else []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        length, height = x2 - x1, y1 - y2
        r = gcd(length, height)
        e = length // r
        if r != 1:
            raise _Inconclusive(f"residual of degree {r} over a factor of degree {phi.degree}")
        if e % p == 0:
            raise _Inconclusive(f"wild ramification (e = {e} divisible by {p})")
        segments.append(Segment(e=e, f=phi.degree))
    return segments


def _report(p: int, degree: int, segments: List[Segment], note: Optional[str] = None) -> RamReport:
    total = sum(s.e * s.f for s in segments)
    if total != degree:
        raise InternalConsistencyError(f"Σ e·f = {total} differs from the degree {degree} at p={p}")
    parts = [s.e for s in segments for _ in range(s.f)]
    e_total = lcm(*(s.e for s in segments))
    return RamReport(
        p=p,
        degree=degree,
        segments=sorted(segments, key=lambda s: (s.e, s.f), reverse=True),
        inertia_cycle_type=format_cycle_type(parts),
        e_total=e_total,
        verdict="Ramified" if e_total > 1 else "Unramified",
        note=note,
    )


def tame_splitting_type(f: PolyQ, p: int, seed: Optional[int] = None) -> RamReport:
    """
    Ramification indices and residue degrees of the p-adic factors of f.

    Unrepeated factors mod p are unramified. Repeated linear factors are
    resolved through the Newton polygon of the Taylor shift, recentering
    when a residual polynomial on a side of integral slope has a repeated
    root. Anything needing second-order data, or any e divisible by p,
    yields an Inconclusive report.

    Args:
        f: monic separable polynomial over Q
        p: prime

    Returns:
        RamReport; segments sum to deg f when Exact
    """
    require_prime(p, "tame_splitting_type")
    seed = settings.effective_seed(seed)
    n = f.degree
    if n > settings.oracle_max_degree:
        return RamReport(p=p, degree=n, confidence="Inconclusive", note=f"degree {n} above oracle capability")
    if not f.is_monic or n < 1:
        raise PreconditionError("tame_splitting_type", f"{f} must be monic of positive degree")
    if discriminant(f) == 0:
        return RamReport(p=p, degree=n, confidence="Inconclusive", note="polynomial is not separable")

    g = _integral_monic_model(f, p)
    segments: List[Segment] = []
    try:
        for phi, k in factor_mod_p(g.reduce(p), seed):
            if k == 1:
                segments.append(Segment(e=1, f=phi.degree))
            elif phi.degree == 1:
                segments.extend(_cluster(g, p, Fraction((-phi.coeffs[0]) % p), k, seed, 0))
            else:
                segments.extend(_repeated_factor(g, phi, k, p))
    except _Inconclusive as e:
        logger.debug(f"tame_splitting_type({f}, {p}) inconclusive: {e}")
        return RamReport(p=p, degree=n, confidence="Inconclusive", note=str(e))
    return _report(p, n, segments)


def frobenius_class(f: PolyQ, p: int, seed: Optional[int] = None) -> Optional[str]:
    """Cycle type of Frobenius at p, or None when f mod p is not squarefree."""
    require_prime(p, "frobenius_class")
    g = _integral_monic_model(f, p)
    reduced = g.reduce(p)
    if not reduced.is_squarefree():
        return None
    return format_cycle_type(degree_pattern(factor_mod_p(reduced, settings.effective_seed(seed))))


# ============================================
# Verification
# ============================================

def observe_inertia(cover: CoverData, t0: Fraction, p: int) -> RamReport:
    """Oracle report for the specialization at t0: quadratic formula in degree 2, tame Newton analysis above."""
    if cover.defining_poly.x_degree == 2:
        f = cover.defining_poly.specialize(t0)
        b, c = f.coeff(1), f.coeff(0)
        return quadratic_report(b * b - 4 * c, p)
    try:
        f = specialize_defining_poly(cover, t0)
    except SpecializationError as e:
        return RamReport(p=p, degree=cover.defining_poly.x_degree, confidence="Inconclusive", note=str(e))
    return tame_splitting_type(f, p)


def _observe_frobenius(cover: CoverData, t0: Fraction, p: int) -> Optional[str]:
    f = cover.defining_poly.specialize(t0)
    if not f.is_p_integral(p):
        return None
    return frobenius_class(f, p)


def verify_recipe(cover: CoverData, recipe: Recipe, u_samples: Optional[int] = None) -> VerificationTable:
    """
    Compare every prediction of a recipe with the oracle on its first admissible points.

    Inconclusive oracle rows are flagged and never counted as mismatches.

    Raises:
        PreconditionError: the cover has no defining polynomial
    """
    u_samples = u_samples or settings.recipe_samples
    if cover.defining_poly is None:
        raise PreconditionError("verify_recipe", f"{cover.name} has no defining polynomial")

    table = VerificationTable(cover=cover.name)
    for _, t0 in recipe_points(cover, recipe, u_samples):
        for prediction in recipe.predictions:
            p = prediction.p
            if prediction.frobenius_class:
                expected = cover.group.class_by_label(prediction.frobenius_class)
                predicted = f"Frobenius {format_cycle_type(expected.cycle_type)}"
                observed_type = _observe_frobenius(cover, t0, p)
                if observed_type is None:
                    row = VerificationRow(
                        t0=format_point(t0), p=p, predicted=predicted, observed="undefined",
                        match=False, note="not squarefree mod p",
                    )
                else:
                    row = VerificationRow(
                        t0=format_point(t0), p=p, predicted=predicted,
                        observed=f"Frobenius {observed_type}",
                        match=observed_type == format_cycle_type(expected.cycle_type),
                    )
            else:
                predicted = f"{prediction.verdict} e={prediction.ram_index} {prediction.cycle_type or ''}".strip()
                report = observe_inertia(cover, t0, p)
                if not report.exact:
                    row = VerificationRow(
                        t0=format_point(t0), p=p, predicted=predicted, observed="Inconclusive", note=report.note,
                    )
                else:
                    observed = f"{report.verdict} e={report.e_total} {report.inertia_cycle_type}"
                    match = report.verdict == prediction.verdict and report.e_total == prediction.ram_index
                    if prediction.cycle_type:
                        match = match and report.inertia_cycle_type == prediction.cycle_type
                    row = VerificationRow(
                        t0=format_point(t0), p=p, predicted=predicted, observed=observed, match=match,
                    )
            table.rows.append(row)
            if row.match is None:
                table.inconclusive += 1
                logger.warning(f"Inconclusive oracle row at t0={row.t0}, p={p}: {row.note}")
            elif row.match:
                table.matched += 1
            else:
                table.mismatched += 1

    logger.info(
        f"Verified {cover.name}: {table.matched} matched, {table.mismatched} mismatched, "
        f"{table.inconclusive} inconclusive"
    )
    return table
