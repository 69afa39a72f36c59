"""Exact iteration on P^1(Q): heights, periodic points, preimage trees."""

import math
import random
from fractions import Fraction

import pytest

from oracles import (
    exhaustive_periodic_points,
    height_limit_estimate,
    INF,
    sylvester_resultant,
)
from towerlab import (
    DomainError,
    PrecisionBudgetError,
    ProjectivePoint,
    RationalMap,
    apply_map,
    canonical_height,
    classify_orbit,
    monomial_map,
    naive_height,
    parse_rational_map,
    periodic_points,
    preimage_chain,
)

X_SQUARED = parse_rational_map("x^2")
X_SQUARED_MINUS_ONE = parse_rational_map("x^2-1")


def _as_point(value):
    if value == INF:
        return ProjectivePoint((1, 0))
    return ProjectivePoint.over_q((value, 1))


def test_parse_and_echo():
    assert str(X_SQUARED_MINUS_ONE) == "(X^2 - Y^2)/(Y^2)"
    assert parse_rational_map("(X^2 - Y^2)/(Y^2)") == X_SQUARED_MINUS_ONE
    assert X_SQUARED_MINUS_ONE.degree == 2
    assert monomial_map(3).degree == 3
    with pytest.raises(DomainError):
        parse_rational_map("x+1")


def test_resultant_nonzero_and_matches_sylvester():
    for f in (X_SQUARED, X_SQUARED_MINUS_ONE, monomial_map(3),
              parse_rational_map("(X^3 - 2*Y^3)/(X*Y^2 + Y^3)")):
        r = f.resultant()
        assert r != 0
        assert r == sylvester_resultant(f.numerator, f.denominator)
    with pytest.raises(DomainError):
        RationalMap((0, 0, 1), (0, 1, 0))  # X^2 and X*Y share a root


def test_apply_examples():
    assert apply_map(X_SQUARED, ProjectivePoint((2, 1))) == \
        ProjectivePoint((4, 1))
    assert apply_map(X_SQUARED, ProjectivePoint((0, 1))) == \
        ProjectivePoint((0, 1))
    # affine -1 normalizes with the sign on the second coordinate
    assert apply_map(X_SQUARED_MINUS_ONE, ProjectivePoint((0, 1))) == \
        ProjectivePoint((1, -1))


def test_apply_is_scale_invariant():
    rng = random.Random(3)
    for _ in range(30):
        a = rng.randrange(-20, 21)
        b = rng.randrange(1, 21)
        pt = ProjectivePoint.over_q((a, b))
        scaled = ProjectivePoint.over_q((Fraction(a * 3, 7), Fraction(b * 3, 7)))
        assert apply_map(X_SQUARED_MINUS_ONE, pt) == \
            apply_map(X_SQUARED_MINUS_ONE, scaled)


def test_naive_height():
    assert naive_height(ProjectivePoint((3, 2))) == pytest.approx(math.log(3))
    assert naive_height(ProjectivePoint((0, 1))) == 0.0
    assert naive_height(ProjectivePoint((1, 1))) == 0.0
    assert naive_height(ProjectivePoint((1, 0))) == 0.0


def test_canonical_height_monomial_is_exact():
    assert canonical_height(X_SQUARED, ProjectivePoint((2, 1))) == \
        pytest.approx(math.log(2), abs=1e-9)
    assert canonical_height(X_SQUARED, ProjectivePoint((1, 1))) == 0.0
    assert canonical_height(X_SQUARED, ProjectivePoint((3, 2))) == \
        pytest.approx(math.log(3), abs=1e-9)


def test_canonical_height_golden():
    # frozen from height_limit_estimate(x^2 - 1, [2:1], 8 steps)
    golden = 0.5178760897905436
    assert height_limit_estimate((-1, 0, 1), (1, 0, 0), 2, 1, 8) == \
        pytest.approx(golden, abs=1e-12)
    assert canonical_height(X_SQUARED_MINUS_ONE, ProjectivePoint((2, 1))) == \
        pytest.approx(golden, abs=1e-9)


def test_height_telescoping_residual():
    rng = random.Random(17)
    for f, coeffs in ((X_SQUARED, ((0, 0, 1), (1, 0, 0))),
                      (X_SQUARED_MINUS_ONE, ((-1, 0, 1), (1, 0, 0)))):
        points = []
        while len(points) < 200:
            a = rng.randrange(-40, 41)
            b = rng.randrange(1, 15)
            if math.gcd(a, b) == 1:
                points.append((a, b))
        residual = max(
            abs(naive_height(apply_map(f, ProjectivePoint.over_q((a, b))))
                - 2 * naive_height(ProjectivePoint.over_q((a, b))))
            for a, b in points)
        for a, b in points[:25]:
            estimate = height_limit_estimate(coeffs[0], coeffs[1], a, b, 8)
            hhat = canonical_height(f, ProjectivePoint.over_q((a, b)))
            assert abs(hhat - estimate) <= residual / (2**8 * (1 - 0.5)) + 1e-12


def test_periodic_points_x_squared():
    expected = {ProjectivePoint((0, 1)), ProjectivePoint((1, 1)),
                ProjectivePoint((1, 0))}
    assert periodic_points(X_SQUARED, 6) == expected
    # all rational periodic points of the squaring map are already fixed
    assert periodic_points(X_SQUARED, 1) == expected
    oracle = exhaustive_periodic_points((0, 0, 1), (1, 0, 0))
    assert {_as_point(v) for v in oracle} == expected


def test_periodic_points_x_squared_minus_one():
    found = periodic_points(X_SQUARED_MINUS_ONE, 6)
    cycle = {ProjectivePoint((0, 1)), ProjectivePoint((1, -1)),
             ProjectivePoint((1, 0))}
    assert cycle <= found
    oracle = exhaustive_periodic_points((-1, 0, 1), (1, 0, 0))
    assert found == {_as_point(v) for v in oracle}


def test_periodic_points_cubing():
    found = periodic_points(monomial_map(3), 2)
    oracle = exhaustive_periodic_points((0, 0, 0, 1), (1, 0, 0, 0))
    assert found == {_as_point(v) for v in oracle}
    assert ProjectivePoint((1, -1)) in found


@pytest.mark.parametrize("f", [X_SQUARED, X_SQUARED_MINUS_ONE])
def test_periodic_set_is_f_stable(f):
    pts = periodic_points(f, 6)
    assert {apply_map(f, pt) for pt in pts} == pts


def test_classify_orbit_examples():
    tail = classify_orbit(X_SQUARED, ProjectivePoint((1, -1)))
    assert tail.tag == "preperiodic" and tail.tail == 1 and tail.period == 1
    away = classify_orbit(X_SQUARED, ProjectivePoint((2, 1)))
    assert away.tag == "escaping"
    assert away.height_at_cutoff > 0
    two_cycle = classify_orbit(X_SQUARED_MINUS_ONE, ProjectivePoint((0, 1)))
    assert two_cycle.tag == "periodic" and two_cycle.period == 2
    assert two_cycle.orbit_prefix[:2] == (ProjectivePoint((0, 1)),
                                          ProjectivePoint((1, -1)))
    fixed = classify_orbit(X_SQUARED, ProjectivePoint((1, 0)))
    assert fixed.tag == "periodic" and fixed.period == 1


def test_height_zero_iff_not_escaping():
    corpus = [ProjectivePoint((1, 0))]
    for a in range(-12, 13):
        for b in (1, 2, 3):
            if math.gcd(a, b) == 1:
                corpus.append(ProjectivePoint.over_q((a, b)))
    assert len(corpus) >= 50
    for f in (X_SQUARED, X_SQUARED_MINUS_ONE):
        for pt in corpus:
            finite_orbit = classify_orbit(f, pt).tag != "escaping"
            hhat = canonical_height(f, pt)
            assert (hhat == 0.0) == finite_orbit


def test_precision_budget_carries_partial_estimate():
    with pytest.raises(PrecisionBudgetError) as err:
        canonical_height(X_SQUARED_MINUS_ONE, ProjectivePoint((3, 1)),
                         bit_cap=16)
    assert err.value.partial is not None
    assert err.value.partial > 0


def test_periodic_points_precision_cap():
    with pytest.raises(PrecisionBudgetError):
        periodic_points(X_SQUARED_MINUS_ONE, 6, bit_cap=8)


def test_preimage_chain_path_of_ones():
    maps = [monomial_map(k) for k in range(2, 7)]
    tree = preimage_chain(maps, ProjectivePoint((1, 1)), 5)
    assert tree.certified
    assert tree.certified_depth == 5
    node = tree.root
    for _ in range(5):
        assert any(child.point == ProjectivePoint((1, 1))
                   for child in node.children)
        node = next(c for c in node.children
                    if c.point == ProjectivePoint((1, 1)))


def test_preimage_chain_dead_end():
    maps = [monomial_map(2), monomial_map(3)]
    tree = preimage_chain(maps, ProjectivePoint((2, 1)), 2)
    assert not tree.certified
    assert not tree.root.children


def test_preimage_chain_zero_is_totally_invariant():
    tree = preimage_chain([monomial_map(2)] * 4, ProjectivePoint((0, 1)), 4)
    assert tree.certified
    depth = 0
    node = tree.root
    while node.children:
        assert [c.point for c in node.children] == [ProjectivePoint((0, 1))]
        node = node.children[0]
        depth += 1
    assert depth == 4


def test_preimage_chain_needs_enough_maps():
    with pytest.raises(DomainError):
        preimage_chain([monomial_map(2)], ProjectivePoint((1, 1)), 3)


def test_preimage_chain_negative_branch():
    # under x^2 the point 1 pulls back to both square roots
    tree = preimage_chain([monomial_map(2)], ProjectivePoint((1, 1)), 1)
    got = sorted(c.point.coords for c in tree.root.children)
    assert got == [(1, -1), (1, 1)]


def test_good_reduction_flags():
    # resultant 1 means good reduction at every prime
    assert X_SQUARED_MINUS_ONE.good_reduction(2)
    assert X_SQUARED_MINUS_ONE.good_reduction(3)
    halved = parse_rational_map("(X^2 - Y^2)/(2*Y^2)")
    assert not halved.good_reduction(2)
    assert halved.good_reduction(3)
