"""Finite-field point counts, image chains, and the finite lifting criterion."""

import math

import pytest

from oracles import brute_projective_count
from towerlab import (
    DomainError,
    EnumerationCapError,
    ProjectivePoint,
    check_omega_criterion,
    count_points,
    fermat_tower,
    fibonacci_tower,
    image_chain,
    level_equations,
    level_map,
    merge_counts,
    reduce_point,
    resolve_tower,
)

FIB = fibonacci_tower()
FERMAT2 = fermat_tower(2)


def _oracle_count(tower, n, p):
    lvl = level_equations(tower, n)
    terms = [f.terms for f in lvl.equations]
    return brute_projective_count(terms, p, lvl.ambient_dim + 1)


@pytest.mark.parametrize("n,p", [
    (0, 3), (0, 5), (0, 7), (1, 3), (1, 5), (1, 7), (2, 3), (2, 5),
])
def test_fibonacci_counts_match_cone_sweep(n, p):
    assert count_points(FIB, n, p).count == _oracle_count(FIB, n, p)


@pytest.mark.parametrize("tower,n,p", [
    (FERMAT2, 1, 3), (FERMAT2, 1, 5),
    (resolve_tower("fermat:3"), 0, 7),
])
def test_planar_counts_match_cone_sweep(tower, n, p):
    assert count_points(tower, n, p).count == _oracle_count(tower, n, p)


def test_frozen_counts():
    # conic level: p + 1 points at every good prime
    assert count_points(FIB, 0, 3).count == 4
    assert count_points(FIB, 0, 5).count == 6
    assert count_points(FIB, 0, 7).count == 8
    assert count_points(FIB, 1, 5).count == 8
    assert count_points(FIB, 1, 13).count == 8
    assert count_points(FIB, 2, 7).count == 8
    assert count_points(FIB, 3, 7).count == 0
    assert count_points(FERMAT2, 1, 5).count == 8


def test_retained_points_lie_on_curve_and_are_sorted():
    result = count_points(FIB, 0, 3)
    assert [pt.coords for pt in result.points] == \
        [(0, 1, 1), (0, 1, 2), (1, 0, 1), (1, 0, 2)]
    f = level_equations(FIB, 0).equations[0].reduce_mod(3)
    assert all(f.evaluate(pt) == 0 for pt in result.points)


def test_retain_cap_drops_points_keeps_count():
    result = count_points(FIB, 1, 7, retain_cap=2)
    assert result.count == 8
    assert result.points is None


def test_hasse_window_on_genus_one_level():
    for p in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        count = count_points(FIB, 1, p).count
        assert abs(count - (p + 1)) <= 2 * math.sqrt(p)


def test_enumeration_cap_trips():
    with pytest.raises(EnumerationCapError):
        count_points(FIB, 3, 13, enum_cap=1000)


def test_to_json_dict_shape():
    data = count_points(FIB, 0, 3).to_json_dict()
    assert data["level"] == 0 and data["prime"] == 3 and data["count"] == 4
    assert data["points"] == [[0, 1, 1], [0, 1, 2], [1, 0, 1], [1, 0, 2]]


def test_partitioned_count_merges_to_full():
    full = count_points(FIB, 1, 7)
    parts = [count_points(FIB, 1, 7, first_nonzero=k) for k in range(4)]
    assert sum(part.count for part in parts) == full.count
    merged = merge_counts(parts)
    assert merged.count == full.count
    assert merged.points == full.points


def test_merge_rejects_overlap_and_mixed_keys():
    a = count_points(FIB, 0, 3)
    with pytest.raises(DomainError):
        merge_counts([a, a])
    b = count_points(FIB, 0, 5)
    with pytest.raises(DomainError):
        merge_counts([a, b])
    with pytest.raises(DomainError):
        merge_counts([])


def test_reduce_point_examples():
    assert reduce_point(ProjectivePoint((5, 10, 3)), 5) == \
        ProjectivePoint((0, 0, 1), 5)
    assert reduce_point(ProjectivePoint((1, 0, -1)), 7) == \
        ProjectivePoint((1, 0, 6), 7)
    # non-coprime integer tuples are not projective points at all
    with pytest.raises(ValueError):
        ProjectivePoint((5, 10, 15))


def test_image_chain_fibonacci_p7():
    chain = image_chain(FIB, 0, 7, 3)
    assert [len(s) for s in chain.sets] == [8, 4, 2, 0]
    # an empty image set is stable forever, so stabilization is certified
    # at the level that first produced it
    assert chain.stabilized_at == 3
    for earlier, later in zip(chain.sets, chain.sets[1:]):
        assert later <= earlier


def test_image_chain_fibonacci_p11():
    chain = image_chain(FIB, 0, 11, 3)
    assert [len(s) for s in chain.sets] == [12, 6, 4, 4]
    assert chain.stabilized_at is None


def test_image_chain_fermat2_p5():
    chain = image_chain(FERMAT2, 0, 5, 2)
    assert [len(s) for s in chain.sets] == [6, 4, 2]
    data = chain.to_json_dict()
    assert [len(s) for s in data["sets"]] == [6, 4, 2]
    assert data["stabilized_at"] is None


def test_image_chain_sets_are_images():
    chain = image_chain(FIB, 0, 7, 2)
    # D_m is exactly the image of the level-m points under the composed map
    full = count_points(FIB, 2, 7)
    images = {level_map(FIB, 1, level_map(FIB, 2, pt)) for pt in full.points}
    assert chain.sets[2] == images


def test_omega_empty_set_certified_when_level_is_empty():
    result = check_omega_criterion(FIB, 0, [], 7, 3)
    assert result.holds
    assert result.witnesses == ()


def test_omega_empty_set_fails_at_level_zero():
    result = check_omega_criterion(FIB, 0, [], 7, 0)
    assert not result.holds
    assert len(result.witnesses) == 8


def test_omega_fermat_rational_solutions():
    # the four sign choices on the known rational solutions survive one level
    omega4 = [ProjectivePoint.over_q(c)
              for c in ((1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1))]
    assert check_omega_criterion(FERMAT2, 0, omega4, 5, 1).holds
    # squaring kills the signs, so only two points survive every level
    omega2 = [ProjectivePoint((1, 0, 1)), ProjectivePoint((0, 1, 1))]
    narrow = check_omega_criterion(FERMAT2, 0, omega2, 5, 1)
    assert not narrow.holds
    # witnesses are the level-1 points whose images escape the reduced set
    assert len(narrow.witnesses) == 4
    red = {pt.reduce_mod(5) for pt in omega2}
    for witness in narrow.witnesses:
        assert level_map(FERMAT2, 1, witness) not in red
    assert check_omega_criterion(FERMAT2, 0, omega2, 5, 2).holds


def test_reduction_commutes_with_level_map():
    points = [
        ProjectivePoint((1, 0, 1, 1)),
        ProjectivePoint((1, 0, 1, -1)),
        ProjectivePoint((1, 0, -1, 1)),
        ProjectivePoint((1, 0, -1, -1)),
    ]
    for p in (7, 11):
        for pt in points:
            left = reduce_point(level_map(FIB, 1, pt), p)
            right = level_map(FIB, 1, reduce_point(pt, p))
            assert left == right
