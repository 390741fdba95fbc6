"""
End-to-end checks on the bundled covers: recipes confirmed by the oracles,
bad-prime sets, and parametricity verdicts.
"""

from fractions import Fraction
from random import Random

import pytest
from sympy import primerange

from ramiforge.errors import PreconditionError
from ramiforge.models import FrobeniusEntry, PrescriptionRequest, RamifiedEntry
from ramiforge.services.cover import classify_prime, specialize_defining_poly
from ramiforge.services.exact_arith import PolyQ, discriminant, is_p_integral, parse_point, vp
from ramiforge.services.groups import format_cycle_type, power_closure
from ramiforge.services.oracle import frobenius_class, observe_inertia, verify_recipe
from ramiforge.services.parametricity import (
    check_branch_point_hypothesis,
    check_inertia_hypothesis,
    realize_inertia_witness,
)
from ramiforge.services.places import intersection_multiplicity
from ramiforge.services.prescriber import (
    build_recipe,
    certify_group,
    lift_to_valuation,
    predict_inertia,
    ramification_witness,
    recipe_points,
)


def recipe_for(cover, *entries):
    return build_recipe(cover, PrescriptionRequest(
        ramified=[RamifiedEntry(p=p, orbit_index=i, exponent=a) for p, i, a in entries]
    ))


def test_quadratic_recipe_ramifies_at_both_primes(quad_t2p1):
    recipe = recipe_for(quad_t2p1, (5, 0, 1), (13, 0, 1))
    assert recipe.theta % 4225 == 2202
    table = verify_recipe(quad_t2p1, recipe, 25)
    assert len(table.rows) == 50
    assert table.matched == 50
    assert all(row.observed.startswith("Ramified e=2") for row in table.rows)


def test_square_multiplicity_keeps_five_unramified(quad_t2p1):
    recipe = recipe_for(quad_t2p1, (5, 0, 2))
    table = verify_recipe(quad_t2p1, recipe, 25)
    assert table.matched == 25
    assert all(row.observed.startswith("Unramified") for row in table.rows)


def test_gaussian_field_is_never_a_specialization(quad_t2p1):
    rng = Random(7)
    for _ in range(200):
        t0 = Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 4))
        assert discriminant(specialize_defining_poly(quad_t2p1, t0)) > 0


def test_trinomial_recipes_match_the_cubic_oracle(trinomial3):
    finite = recipe_for(trinomial3, (7, 2, 1))
    for _, t0 in recipe_points(trinomial3, finite, 25):
        report = observe_inertia(trinomial3, t0, 7)
        assert [(s.e, s.f) for s in report.segments] == [(2, 1), (1, 1)]
        assert report.inertia_cycle_type == "[1^1 2^1]"

    at_infinity = recipe_for(trinomial3, (5, 1, 1))
    for _, t0 in recipe_points(trinomial3, at_infinity, 25):
        report = observe_inertia(trinomial3, t0, 5)
        assert [(s.e, s.f) for s in report.segments] == [(3, 1)]
        assert report.inertia_cycle_type == "[3^1]"


def test_full_group_is_certified_on_most_recipe_points(trinomial3):
    recipe = recipe_for(trinomial3, (7, 2, 1))
    certificates = [certify_group(trinomial3, t0, prime_budget=200) for _, t0 in recipe_points(trinomial3, recipe, 25)]
    assert sum(c.status == "Certified" for c in certificates) >= 20


def test_no_false_certification_on_control_points(trinomial3):
    # t0 = 2, 12, −4: X^3 − tX + t^2 has a rational root; t0 = 1/7: square discriminant
    for t0 in (Fraction(2), Fraction(12), Fraction(-4), Fraction(1, 7)):
        assert certify_group(trinomial3, t0, prime_budget=200).status == "Inconclusive"


def test_trinomial_bad_primes(trinomial3):
    bad = [p for p in primerange(2, 201) if not classify_prime(trinomial3, p).good]
    assert bad == [2, 3]


def test_monster_good_primes(monster):
    good = {p for p in primerange(2, 201) if classify_prime(monster, p).good}
    assert good == set(primerange(73, 201)) | {37, 43, 53, 61, 67}


def test_lift_property_suite():
    rng = Random(11)
    for _ in range(1000):
        p = int(rng.choice(list(primerange(3, 40))))
        r = rng.randrange(p)
        a = rng.randrange(-30, 31)
        while (r * r + a) % p == 0:
            a += 1
        # (T − r)(T² + a) has the simple root r mod p
        m = PolyQ.linear_root(Fraction(r)) * PolyQ.from_desc([1, 0, a])
        d = rng.randint(1, 8)
        theta = lift_to_valuation(m, p, d, root=r)
        assert vp(m(theta), p) == d
        assert is_p_integral(theta, p)


def test_inertia_hypothesis_end_to_end(trinomial5, trinomial5_alt):
    closure = {c.label for c in power_closure(trinomial5_alt.group, trinomial5_alt.classes)}
    assert "[2^1 3^1]" not in closure
    verdict = check_inertia_hypothesis(trinomial5, trinomial5_alt)
    assert verdict.holds and "[2^1 3^1]" in verdict.witnesses

    realization = realize_inertia_witness(trinomial5, trinomial5_alt, "[2^1 3^1]")
    closure_types = {format_cycle_type(c.cycle_type) for c in power_closure(trinomial5_alt.group, trinomial5_alt.classes)}
    assert realization["observed_cycle_type"] not in closure_types


def test_branch_point_hypothesis_matches_congruence(quad_sqrt_t, quad_t2p1_t2m2):
    verdict = check_branch_point_hypothesis(quad_sqrt_t, quad_t2p1_t2m2, 500)
    assert verdict.exact and verdict.witnesses == ["p ≡ 3 mod 8"]
    assert verdict.evidence["exceptions"] == []
    expected = [
        p for p in primerange(2, 501)
        if p not in verdict.evidence["flagged"] and p % 8 == 3
    ]
    assert verdict.evidence["empirical_witnesses"] == expected


def test_ramification_witness_follows_p_mod_4(quad_t2p1):
    for p in primerange(3, 101):
        result = ramification_witness(quad_t2p1, p)
        if p % 4 == 3:
            assert result.outcome == "never_ramifies"
        else:
            assert result.outcome == "witness"
            assert observe_inertia(quad_t2p1, parse_point(result.t0), p).e_total == 2


def _corpus_recipes(cover):
    for p in primerange(5, 100):
        if not classify_prime(cover, p).good:
            continue
        for index in range(len(cover.orbits)):
            for a in (1, 2):
                try:
                    yield recipe_for(cover, (int(p), index, a))
                except PreconditionError:
                    continue


@pytest.mark.parametrize("name", ["quad_t2p1", "quad_sqrt_t", "quad_t2p1_t2m2", "trinomial_3_1_2_1"])
def test_predictions_agree_with_oracle_on_corpus(load, name):
    cover = load(name)
    compared = 0
    for recipe in _corpus_recipes(cover):
        table = verify_recipe(cover, recipe, 10)
        assert table.mismatched == 0, [row for row in table.rows if row.match is False]
        compared += table.matched
    assert compared >= {"quad_t2p1": 200, "quad_sqrt_t": 800, "quad_t2p1_t2m2": 200, "trinomial_3_1_2_1": 800}[name]


def _mixed_request():
    # finite orbit 4/27 at 7, the orbit ∞ cubed at 5, Frobenius a 3-cycle at 11
    return PrescriptionRequest(
        ramified=[RamifiedEntry(p=7, orbit_index=2, exponent=1), RamifiedEntry(p=5, orbit_index=1, exponent=3)],
        unramified_frobenius=[FrobeniusEntry(p=11, class_label="[3^1]")],
    )


def test_recipe_points_keep_their_intersection_multiplicities(trinomial3):
    recipe = build_recipe(trinomial3, _mixed_request())
    assert recipe.modulus == 49 * 11
    for u in range(25):
        t0 = recipe.point(u)
        assert not trinomial3.is_branch_point(t0)
        for entry in _mixed_request().ramified:
            orbit = trinomial3.orbits[entry.orbit_index]
            assert intersection_multiplicity(entry.p, t0, orbit.point) == entry.exponent


def test_mixed_recipe_matches_the_oracles(trinomial3):
    recipe = build_recipe(trinomial3, _mixed_request())
    for _, t0 in recipe_points(trinomial3, recipe, 25):
        at_seven = observe_inertia(trinomial3, t0, 7)
        assert at_seven.inertia_cycle_type == "[1^1 2^1]"
        # [3^1] cubed is trivial
        at_five = observe_inertia(trinomial3, t0, 5)
        assert at_five.verdict == "Unramified"
        assert predict_inertia(trinomial3, 5, t0).prediction.class_label == "[1^3]"
        assert frobenius_class(specialize_defining_poly(trinomial3, t0), 11) == "[3^1]"
    table = verify_recipe(trinomial3, recipe, 10)
    assert table.mismatched == 0


def _nearby_point(rng, cover, p):
    """A rational point that often meets a branch orbit of the cover modulo p."""
    noise = Fraction(rng.choice([-1, 1]) * rng.randint(1, 40), rng.randint(1, 40))
    orbit = rng.choice(list(cover.orbits) + [None])
    if orbit is None:
        return noise
    point, j = orbit.point, rng.randint(0, 3)
    if point.is_infinity:
        return 1 / (p ** j * noise)
    if point.is_rational:
        return point.value + p ** j * noise
    roots = point.minpoly.reduce(p).roots() if point.minpoly.is_p_integral(p) else []
    if not roots:
        return noise
    return rng.choice(roots) + p ** j * noise


@pytest.mark.parametrize("name", ["quad_t2p1", "quad_sqrt_t", "trinomial_3_1_2_1", "trinomial_5_2_2_1"])
def test_predictions_agree_with_oracle_on_arbitrary_points(load, name):
    cover = load(name)
    rng = Random(53)
    primes = [int(p) for p in primerange(5, 60) if classify_prime(cover, p).good]
    outcomes = {"prediction": 0, "no_meeting": 0}
    for _ in range(400):
        p = rng.choice(primes)
        t0 = _nearby_point(rng, cover, p)
        if cover.is_branch_point(t0):
            continue
        result = predict_inertia(cover, p, t0)
        if result.outcome == "undecidable":
            continue
        report = observe_inertia(cover, t0, p)
        if not report.exact:
            continue
        outcomes[result.outcome] += 1
        degree = cover.defining_poly.x_degree
        if result.outcome == "no_meeting":
            assert report.e_total == 1
            assert report.inertia_cycle_type == f"[1^{degree}]"
        else:
            assert report.e_total == result.prediction.ram_index
            assert report.inertia_cycle_type == result.prediction.cycle_type
    assert outcomes["prediction"] >= 30 and outcomes["no_meeting"] >= 30
