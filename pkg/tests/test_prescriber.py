from fractions import Fraction
from random import Random

import pytest
from pydantic import ValidationError

from ramiforge.errors import BadPrimeError, InputError, PreconditionError
from ramiforge.models import FrobeniusEntry, PrescriptionRequest, RamifiedEntry
from ramiforge.services.cover import specialize_defining_poly
from ramiforge.services.exact_arith import INFINITY, PolyQ, is_p_integral, vp
from ramiforge.services.oracle import frobenius_class
from ramiforge.services.prescriber import (
    build_recipe,
    certify_group,
    lift_to_valuation,
    parse_frobenius,
    parse_ramified,
    predict_inertia,
    ramification_witness,
    recipe_points,
    transition_candidates,
)

T2P1 = PolyQ.from_desc([1, 0, 1])


def request(*ramified, frobenius=()):
    return PrescriptionRequest(
        ramified=[RamifiedEntry(p=p, orbit_index=i, exponent=a) for p, i, a in ramified],
        unramified_frobenius=[FrobeniusEntry(p=p, class_label=c) for p, c in frobenius],
    )


# ============================================
# Lifting
# ============================================

def test_lift_to_valuation_examples():
    assert lift_to_valuation(T2P1, 5, 1) == 2
    assert lift_to_valuation(T2P1, 5, 2) == Fraction(503, 4)
    assert vp(T2P1(Fraction(503, 4)), 5) == 2
    assert lift_to_valuation(PolyQ.monomial(1), 7, 1) == 7
    assert lift_to_valuation(PolyQ.linear_root(Fraction(4, 27)), 7, 1) == 3


def test_lift_to_valuation_preconditions():
    with pytest.raises(PreconditionError):
        lift_to_valuation(T2P1, 7, 1)
    with pytest.raises(PreconditionError):
        lift_to_valuation(T2P1, 5, 0)
    with pytest.raises(PreconditionError):
        lift_to_valuation(PolyQ.from_desc([1, Fraction(1, 5)]), 5, 1)
    # T^2 + 1 = (T + 1)^2 mod 2
    with pytest.raises(BadPrimeError):
        lift_to_valuation(T2P1, 2, 1)


def test_lift_to_valuation_is_exact_on_random_instances():
    rng = Random(2024)
    for _ in range(1000):
        p = rng.choice([3, 5, 7, 11, 13])
        r = rng.randrange(p)
        while True:
            a, b = rng.randrange(-20, 21), rng.randrange(-20, 21)
            if (r * r + a * r + b) % p:
                break
        m = PolyQ.linear_root(Fraction(r)) * PolyQ.from_desc([1, a, b])
        d = rng.randint(1, 6)
        theta = lift_to_valuation(m, p, d, root=r)
        assert vp(m(theta), p) == d
        assert is_p_integral(theta, p)


def test_lift_to_valuation_on_quartics():
    rng = Random(4)
    for _ in range(500):
        p = rng.choice([5, 7, 11, 13, 17, 29])
        r = rng.randrange(p)
        while True:
            a, b, c = (rng.randrange(-20, 21) for _ in range(3))
            if (r ** 3 + a * r * r + b * r + c) % p:
                break
        m = PolyQ.linear_root(Fraction(r)) * PolyQ.from_desc([1, a, b, c])
        d = rng.randint(1, 6)
        theta = lift_to_valuation(m, p, d, root=r)
        assert vp(m(theta), p) == d
        assert is_p_integral(theta, p)

    # T^4 + 1 splits completely mod primes ≡ 1 mod 8
    quartic = PolyQ.from_desc([1, 0, 0, 0, 1])
    for p in (17, 41, 73):
        roots = quartic.reduce(p).roots()
        assert len(roots) == 4
        for root in roots:
            for d in range(1, 6):
                assert vp(quartic(lift_to_valuation(quartic, p, d, root=root)), p) == d


def test_transition_candidates():
    assert transition_candidates(5, 2) == [2, 7, 12]


# ============================================
# Recipes
# ============================================

def test_quadratic_recipe(quad_t2p1):
    recipe = build_recipe(quad_t2p1, request((5, 0, 1), (13, 0, 1)))
    assert recipe.theta == 2202 and recipe.modulus == 4225
    assert [(e.p, e.ram_index, e.cycle_type) for e in recipe.predictions] == [(5, 2, "[2^1]"), (13, 2, "[2^1]")]
    assert recipe.u_constraints == {5: 0, 13: 0}
    assert recipe.forces_full_group
    assert "predictions at primes outside the request are not claimed" in recipe.caveats


def test_even_multiplicity_prescribes_unramified(quad_t2p1):
    recipe = build_recipe(quad_t2p1, request((5, 0, 2)))
    assert recipe.modulus == 125
    # 503/4 ≡ 32 (mod 125)
    assert recipe.theta == 32
    assert vp(T2P1(recipe.theta), 5) == 2
    prediction = recipe.predictions[0]
    assert prediction.verdict == "Unramified" and prediction.ram_index == 1


def test_trinomial_recipes(trinomial3):
    finite = build_recipe(trinomial3, request((7, 2, 1)))
    assert finite.theta == 3 and finite.modulus == 49
    assert finite.predictions[0].cycle_type == "[1^1 2^1]"
    assert finite.predictions[0].ram_index == 2

    at_infinity = build_recipe(trinomial3, request((5, 1, 1)))
    assert at_infinity.theta == Fraction(1, 5) and at_infinity.modulus == 1
    assert at_infinity.predictions[0].cycle_type == "[3^1]"
    assert at_infinity.predictions[0].ram_index == 3

    cubed = build_recipe(trinomial3, request((5, 1, 3)))
    assert cubed.theta == Fraction(1, 125)
    assert cubed.predictions[0].verdict == "Unramified"
    assert cubed.predictions[0].cycle_type == "[1^3]"


def test_recipe_points_skip_branch_points(trinomial3):
    recipe = build_recipe(trinomial3, request((7, 0, 1)))
    points = recipe_points(trinomial3, recipe, 3)
    assert [t0 for _, t0 in points] == [recipe.point(u) for u, _ in points]
    assert all(not trinomial3.is_branch_point(t0) for _, t0 in points)


def test_frobenius_prescription(trinomial3):
    recipe = build_recipe(trinomial3, request((7, 2, 1), frobenius=[(11, "[3^1]")]))
    assert recipe.modulus == 49 * 11
    frob = recipe.predictions[1]
    assert frob.verdict == "Unramified" and frob.frobenius_class == "[3^1]"
    assert any("r²|G|²" in note for note in recipe.annotations)
    # a transposition and a 3-cycle generate S3
    assert recipe.forces_full_group
    for _, t0 in recipe_points(trinomial3, recipe, 5):
        assert frobenius_class(specialize_defining_poly(trinomial3, t0), 11) == "[3^1]"


def test_recipe_rejects_bad_or_unreachable_requests(trinomial3, quad_t2p1):
    with pytest.raises(BadPrimeError):
        build_recipe(trinomial3, request((3, 0, 1)))
    with pytest.raises(InputError):
        build_recipe(trinomial3, request((7, 5, 1)))
    with pytest.raises(PreconditionError):
        build_recipe(quad_t2p1, request((7, 0, 1)))


def test_request_validation():
    with pytest.raises(ValidationError):
        request((5, 0, 1), (5, 0, 2))
    with pytest.raises(ValidationError):
        request((6, 0, 1))
    with pytest.raises(ValidationError):
        PrescriptionRequest()


def test_entry_parsing():
    assert parse_ramified("5:0:1") == RamifiedEntry(p=5, orbit_index=0, exponent=1)
    assert parse_frobenius("11:[3^1]") == FrobeniusEntry(p=11, class_label="[3^1]")
    with pytest.raises(InputError):
        parse_ramified("5:0")
    with pytest.raises(InputError):
        parse_ramified("five:0:1")
    with pytest.raises(InputError):
        parse_frobenius("11")


# ============================================
# Prediction
# ============================================

def test_predict_inertia_at_infinity_orbit(trinomial3):
    result = predict_inertia(trinomial3, 5, Fraction(1, 5))
    assert result.outcome == "prediction"
    assert result.verdict == "Ramified"
    assert result.prediction.cycle_type == "[3^1]"
    assert result.prediction.ram_index == 3


def test_predict_inertia_outcomes(quad_t2p1, trinomial3):
    assert predict_inertia(quad_t2p1, 5, Fraction(2)).prediction.ram_index == 2
    assert predict_inertia(quad_t2p1, 5, Fraction(7)).prediction.verdict == "Unramified"
    unmet = predict_inertia(quad_t2p1, 5, Fraction(1))
    assert unmet.outcome == "no_meeting" and unmet.verdict == "Unramified"
    bad = predict_inertia(trinomial3, 3, Fraction(5))
    assert bad.outcome == "undecidable" and bad.verdict is None
    with pytest.raises(PreconditionError):
        predict_inertia(trinomial3, 5, INFINITY)


def test_undecided_g_completeness_is_a_caveat(monster):
    recipe = build_recipe(monster, request((73, 0, 1)))
    assert recipe.forces_full_group is None
    assert any("g-completeness is undecided for M" in c for c in recipe.caveats)


def test_predict_inertia_on_class_data_only(monster):
    result = predict_inertia(monster, 73, Fraction(73))
    assert result.prediction.class_label == "2A"
    assert predict_inertia(monster, 73, Fraction(1, 73 ** 29)).prediction.class_label == "1A"
    assert predict_inertia(monster, 73, Fraction(1, 73 ** 2)).outcome == "undecidable"


# ============================================
# Witnesses
# ============================================

def test_ramification_witness(quad_t2p1):
    found = ramification_witness(quad_t2p1, 5)
    assert found.outcome == "witness" and found.t0 == "2"
    assert ramification_witness(quad_t2p1, 7).outcome == "never_ramifies"
    assert ramification_witness(quad_t2p1, 2).outcome == "undecidable"


# ============================================
# Group certification
# ============================================

def test_certify_full_group(trinomial3, quad_t2p1):
    certificate = certify_group(trinomial3, Fraction(38), prime_budget=200)
    assert certificate.status == "Certified"
    assert set(certificate.witnessed_classes) >= {"[3^1]", "[1^1 2^1]"}
    assert certify_group(quad_t2p1, Fraction(2), prime_budget=50).status == "Certified"


@pytest.mark.parametrize("t0", [Fraction(2), Fraction(-4), Fraction(12), Fraction(1, 7)])
def test_certify_never_certifies_proper_subgroups(trinomial3, t0):
    assert certify_group(trinomial3, t0, prime_budget=200).status == "Inconclusive"


def test_certify_needs_permutation_group(monster):
    with pytest.raises(InputError):
        certify_group(monster, Fraction(2))
