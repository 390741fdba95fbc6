from fractions import Fraction
from random import Random

import pytest
from sympy.ntheory.primetest import is_square

from ramiforge.errors import PreconditionError
from ramiforge.models import PrescriptionRequest, RamifiedEntry
from ramiforge.services.exact_arith import PolyQ, discriminant, vp
from ramiforge.services.oracle import (
    frobenius_class,
    lower_convex_hull,
    observe_inertia,
    quadratic_ramifies,
    quadratic_report,
    squarefree_kernel,
    tame_splitting_type,
    verify_recipe,
)
from ramiforge.services.prescriber import build_recipe


def segments(report):
    return [(s.e, s.f) for s in report.segments]


# ============================================
# Quadratic fields
# ============================================

def test_squarefree_kernel():
    assert squarefree_kernel(Fraction(-8)) == -2
    assert squarefree_kernel(Fraction(9, 2)) == 2
    assert squarefree_kernel(Fraction(-4)) == -1
    with pytest.raises(PreconditionError):
        squarefree_kernel(Fraction(0))


def test_quadratic_ramification():
    assert quadratic_ramifies(Fraction(15), 5)
    assert not quadratic_ramifies(Fraction(50), 5)
    with pytest.raises(PreconditionError):
        quadratic_ramifies(Fraction(4), 5)
    with pytest.raises(PreconditionError):
        quadratic_ramifies(Fraction(3), 2)


def test_quadratic_reports():
    ramified = quadratic_report(Fraction(15), 5)
    assert segments(ramified) == [(2, 1)]
    assert ramified.inertia_cycle_type == "[2^1]" and ramified.verdict == "Ramified"
    # 50 = 2·5^2 and 2 is not a square mod 5
    assert segments(quadratic_report(Fraction(50), 5)) == [(1, 2)]
    assert segments(quadratic_report(Fraction(-1), 5)) == [(1, 1), (1, 1)]
    assert quadratic_report(Fraction(4), 5).verdict == "Unramified"
    assert not quadratic_report(Fraction(3), 2).exact


# ============================================
# Newton polygons
# ============================================

def test_lower_convex_hull():
    assert lower_convex_hull([(0, 3), (1, 1), (2, 2), (3, 0)]) == [(0, 3), (1, 1), (3, 0)]
    assert lower_convex_hull([(0, 2), (1, 1), (2, 0)]) == [(0, 2), (2, 0)]


def test_eisenstein_cubic():
    report = tame_splitting_type(PolyQ.from_desc([1, 0, -5, 5]), 5)
    assert segments(report) == [(3, 1)]
    assert report.inertia_cycle_type == "[3^1]" and report.e_total == 3


def test_cubic_with_double_root_mod_p():
    report = tame_splitting_type(PolyQ.from_desc([1, 0, -38, 1444]), 7)
    assert segments(report) == [(2, 1), (1, 1)]
    assert report.inertia_cycle_type == "[1^1 2^1]"


def test_quintic_with_two_sides():
    report = tame_splitting_type(PolyQ.from_desc([1, 0, 0, -7, 0, 49]), 7)
    assert sorted(segments(report)) == [(2, 1), (3, 1)]
    assert report.inertia_cycle_type == "[2^1 3^1]" and report.e_total == 6


def test_unramified_when_squarefree_mod_p():
    report = tame_splitting_type(PolyQ.from_desc([1, 0, -38, 1444]), 11)
    assert segments(report) == [(1, 3)]
    assert report.verdict == "Unramified"


def test_non_integral_polynomials_are_rescaled():
    report = tame_splitting_type(PolyQ.from_desc([1, 0, Fraction(-1, 5)]), 5)
    assert segments(report) == [(2, 1)]


def test_inconclusive_cases():
    assert not tame_splitting_type(PolyQ.from_desc([1, 0, -2]), 2).exact
    assert not tame_splitting_type(PolyQ.from_desc([1] + [0] * 8 + [-2]), 5).exact
    assert not tame_splitting_type(PolyQ.from_desc([1, -2, 1]), 5).exact


def test_frobenius_class():
    f = PolyQ.from_desc([1, 0, -38, 1444])
    assert frobenius_class(f, 11) == "[3^1]"
    assert frobenius_class(f, 7) is None


# ============================================
# Oracle consistency
# ============================================

def _different_exponent(report):
    return sum((s.e - 1) * s.f for s in report.segments)


def test_tame_oracle_agrees_with_quadratic_formula():
    rng = Random(41)
    exact = 0
    for _ in range(400):
        p = rng.choice([3, 5, 7, 11, 13])
        d = rng.choice([-1, 1]) * rng.randint(2, 60) * p ** rng.randint(0, 1)
        if is_square(abs(d)) and d > 0:
            continue
        report = tame_splitting_type(PolyQ.from_desc([1, 0, -d]), p)
        if not report.exact:
            continue
        exact += 1
        assert (report.e_total == 2) == quadratic_ramifies(Fraction(d), p)
        assert sorted(segments(report)) == sorted(segments(quadratic_report(Fraction(d), p)))
    assert exact >= 250


def test_eisenstein_different_exponent_is_discriminant_valuation():
    rng = Random(43)
    for _ in range(200):
        p = rng.choice([5, 7, 11, 13])
        n = rng.randint(2, 4)
        middle = [p * rng.randint(-3, 3) for _ in range(n - 1)]
        constant = p * rng.choice([u for u in range(-6, 7) if u % p])
        f = PolyQ.from_desc([1] + middle + [constant])
        report = tame_splitting_type(f, p)
        assert segments(report) == [(n, 1)]
        assert _different_exponent(report) == vp(discriminant(f), p) == n - 1


def test_different_exponent_bounds_discriminant_valuation():
    rng = Random(47)
    for _ in range(300):
        p = rng.choice([5, 7, 11])
        f = PolyQ.from_desc([1] + [rng.randint(-15, 15) for _ in range(rng.randint(2, 4))])
        if discriminant(f) == 0:
            continue
        report = tame_splitting_type(f, p)
        if not report.exact:
            continue
        v = int(vp(discriminant(f), p))
        total = _different_exponent(report)
        # disc(f) is the field discriminant times a square
        assert total <= v and (v - total) % 2 == 0
        if v <= 1:
            assert total == v


# ============================================
# Verification
# ============================================

def test_observe_inertia_quadratic_and_cubic(quad_t2p1, trinomial3):
    assert observe_inertia(quad_t2p1, Fraction(2), 5).e_total == 2
    assert observe_inertia(trinomial3, Fraction(1, 5), 5).inertia_cycle_type == "[3^1]"


def test_verify_quadratic_recipe(quad_t2p1):
    recipe = build_recipe(quad_t2p1, PrescriptionRequest(ramified=[
        RamifiedEntry(p=5, orbit_index=0, exponent=1),
        RamifiedEntry(p=13, orbit_index=0, exponent=1),
    ]))
    table = verify_recipe(quad_t2p1, recipe, 10)
    assert table.matched == 20 and table.all_match
    assert table.rows[0].predicted == "Ramified e=2 [2^1]"


def test_verify_detects_a_tampered_recipe(trinomial3):
    recipe = build_recipe(trinomial3, PrescriptionRequest(ramified=[RamifiedEntry(p=7, orbit_index=2, exponent=1)]))
    tampered = recipe.model_copy(update={"theta": Fraction(1)})
    table = verify_recipe(trinomial3, tampered, 5)
    assert table.mismatched > 0 and not table.all_match


def test_verify_needs_defining_polynomial(monster):
    recipe = build_recipe(monster, PrescriptionRequest(ramified=[RamifiedEntry(p=73, orbit_index=0, exponent=1)]))
    with pytest.raises(PreconditionError):
        verify_recipe(monster, recipe, 3)
