from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from todalax.rootsystem import (Root, build_root_system, diagram_involutions,
                                validate_type)

ALL_TYPES = ([("A", n) for n in range(1, 9)] +
             [("B", n) for n in range(2, 9)] +
             [("C", n) for n in range(3, 9)] +
             [("D", n) for n in range(4, 9)] +
             [("E", 6), ("E", 7), ("E", 8), ("F", 4), ("G", 2)])


@pytest.mark.parametrize("series,rank", ALL_TYPES)
def test_two_generation_algorithms_agree(series, rank):
    rs = build_root_system(series, rank)
    closure = sorted(r.coeffs for r in rs.roots)
    weyl = sorted(r.coeffs for r in rs.generate_by_weyl_orbits())
    assert closure == weyl


@pytest.mark.parametrize("series,rank,count", [
    ("A", 2, 6), ("A", 5, 30), ("G", 2, 12), ("F", 4, 48),
    ("E", 8, 240), ("B", 3, 18), ("C", 4, 32), ("D", 5, 40),
])
def test_root_counts(series, rank, count):
    assert len(build_root_system(series, rank).roots) == count


@pytest.mark.parametrize("series,rank,k", [
    ("A", 2, 3), ("G", 2, 6), ("E", 8, 30), ("F", 4, 12),
    ("B", 4, 8), ("D", 5, 8),
])
def test_coxeter_number(series, rank, k):
    rs = build_root_system(series, rank)
    assert rs.coxeter_number == k
    assert rs.coxeter_number == max(r.height for r in rs.roots) + 1


def test_marks_and_lowest_root():
    rs = build_root_system("G", 2)
    assert tuple(rs.marks) == (2, 3) or tuple(rs.marks) == (3, 2)
    assert rs.lowest_root == -rs.highest_root
    # the marks are the highest-root coefficients
    assert rs.highest_root.coeffs == tuple(rs.marks)


def test_invalid_types_rejected():
    for series, rank in [("A", 0), ("B", 1), ("C", 2), ("D", 3),
                         ("E", 5), ("E", 9), ("F", 3), ("G", 3), ("X", 2)]:
        with pytest.raises(ValueError):
            validate_type(series, rank)


def test_cartan_pairing_matches_cartan_matrix():
    rs = build_root_system("B", 3)
    for i, a in enumerate(rs.simple_roots):
        for j in range(rs.rank):
            assert rs.cartan_pairing(a, j) == rs.cartan_matrix[i][j]


def test_killing_dual_and_coroot():
    rs = build_root_system("G", 2)
    for a in rs.roots:
        sharp = rs.killing_dual(a)
        # defining property: kappa(a#, H) = a(H) on the coroot basis
        from todalax.rootsystem import CartanVector
        for i in range(rs.rank):
            unit = CartanVector(tuple(int(j == i) for j in range(rs.rank)))
            assert rs.killing_cartan(sharp, unit) == rs.root_eval(a, unit)
        # normalization of the coroot: alpha(H_alpha) = 2
        assert rs.root_eval(a, rs.coroot(a)) == 2


def test_dual_basis_is_dual():
    rs = build_root_system("A", 3)
    duals = rs.dual_basis()
    for i in range(rs.rank):
        for j in range(rs.rank):
            assert rs.root_eval(rs.simple_roots[j], duals[i]) == (i == j)


def test_extended_diagram_involutions_counts():
    # no nontrivial ones for extended E8, F4, G2
    for series, rank in [("E", 8), ("F", 4), ("G", 2)]:
        rs = build_root_system(series, rank)
        assert diagram_involutions(rs.extended_diagram()) == [
            tuple(range(rank + 1))]
    # extended A2 triangle: identity + three transpositions
    rs = build_root_system("A", 2)
    assert len(diagram_involutions(rs.extended_diagram())) == 4


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([("A", 3), ("B", 3), ("C", 3), ("D", 4), ("G", 2)]),
       st.integers(0, 10 ** 6))
def test_root_negation_closure(tp, pick):
    rs = build_root_system(*tp)
    roots = rs.roots
    r = roots[pick % len(roots)]
    assert rs.is_root(-r)
    assert (-r).height == -r.height


def test_a_series_count_formula():
    for n in range(1, 9):
        rs = build_root_system("A", n)
        assert len(rs.roots) == n * (n + 1)
