from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kautz_census.errors import CapExceeded, DomainError, NotApplicable
from kautz_census.necklace import (
    divisors,
    enumerate_primitive_colorings,
    mobius,
    mobius_sum,
    necklace_count,
    primitive_count_formula,
    primitive_cycle_edges,
    rho_top_closed_form,
    wrap_correction,
)
from kautz_census.oracle import rho_census
from kautz_census.words import GraphParams, edge_cycle_index, edge_from_image, enumerate_vertices


def naive_classes(n: int, q: int) -> int:
    """Rotation classes of proper aperiodic cyclic words, from itertools only."""
    seen = set()
    for w in itertools.product(range(q), repeat=n):
        if any(w[i] == w[(i + 1) % n] for i in range(n)):
            continue
        rots = {w[i:] + w[:i] for i in range(n)}
        if len(rots) == n:
            seen.add(min(rots))
    return len(seen)


@pytest.mark.parametrize("j, mu", [(1, 1), (2, -1), (6, 1), (12, 0), (30, -1), (49, 0)])
def test_mobius_examples(j, mu):
    assert mobius(j) == mu


def test_mobius_domain():
    with pytest.raises(DomainError):
        mobius(0)


@given(st.integers(2, 500))
def test_mobius_sums_to_zero_over_divisors(n):
    assert sum(mobius(j) for j in divisors(n)) == 0


@pytest.mark.parametrize("n, q, count", [(4, 3, 3), (3, 3, 2), (6, 3, 9), (5, 3, 6)])
def test_formula_examples(n, q, count):
    assert primitive_count_formula(n, q) == count


@pytest.mark.parametrize("n, q, count", [(2, 3, 3), (4, 3, 3), (5, 3, 6), (3, 3, 2)])
def test_enumeration_examples(n, q, count):
    assert enumerate_primitive_colorings(n, q) == count
    assert naive_classes(n, q) == count


def test_four_letter_proper_aperiodic_words_over_three_colours():
    words = [
        w for w in itertools.product(range(3), repeat=4)
        if all(w[i] != w[(i + 1) % 4] for i in range(4)) and len({w[i:] + w[:i] for i in range(4)}) == 4
    ]
    assert len(words) == 12


@pytest.mark.parametrize("n", [1, 2])
def test_formula_not_applicable_below_three(n):
    with pytest.raises(NotApplicable):
        primitive_count_formula(n, 3)


def test_n2_divergence_is_preserved():
    # The divisor sum over n = 2 gives 1 class; there are 3.
    assert mobius_sum(2, 3) // 2 == 1
    assert enumerate_primitive_colorings(2, 3) == 3
    assert necklace_count(2, 3, "enumerate").oriented_edge_count == 6


def test_formula_domain():
    with pytest.raises(DomainError):
        primitive_count_formula(5, 2)
    with pytest.raises(DomainError):
        necklace_count(5, 3, "guess")


@pytest.mark.parametrize("n, q", [(n, q) for n in range(3, 10) for q in (3, 4, 5)])
def test_formula_equals_enumeration(n, q):
    assert primitive_count_formula(n, q) == enumerate_primitive_colorings(n, q)


@pytest.mark.parametrize("n, q", [(n, q) for n in range(3, 8) for q in (3, 4)])
def test_enumeration_equals_naive(n, q):
    assert enumerate_primitive_colorings(n, q) == naive_classes(n, q)


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        enumerate_primitive_colorings(12, 5)
    with pytest.raises(CapExceeded):
        enumerate_primitive_colorings(8, 3, cap=10)


@pytest.mark.parametrize("n", range(3, 40))
@pytest.mark.parametrize("q", [3, 4, 5, 7])
def test_divisor_sum_divisible_by_n(n, q):
    assert mobius_sum(n, q) % n == 0


@pytest.mark.parametrize("n", range(3, 25))
def test_wrap_correction_vanishes(n):
    for q in range(3, 8):
        assert wrap_correction(n, q) == 0


@pytest.mark.parametrize("q", [3, 4, 5])
def test_wrap_correction_accounts_for_n2_gap(q):
    assert (mobius_sum(2, q) + wrap_correction(2, q)) // 2 == enumerate_primitive_colorings(2, q)


@given(st.integers(3, 30), st.integers(3, 9))
def test_oriented_edges_divisible_by_n(n, q):
    c = necklace_count(n, q)
    assert c.primitive_count >= 0
    assert c.oriented_edge_count % n == 0
    assert c.oriented_edge_count == mobius_sum(n, q)


@pytest.mark.parametrize("d, D, value", [(2, 3, 12), (2, 4, 30), (2, 10, 2046)])
def test_rho_top_closed_form_values(d, D, value):
    assert rho_top_closed_form(d, D) == value


def test_rho_top_closed_form_domain():
    with pytest.raises(NotApplicable):
        rho_top_closed_form(2, 1)


@pytest.mark.parametrize("d, D", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_closed_form_matches_census_on_short_rows(d, D):
    assert rho_top_closed_form(d, D) == rho_census(GraphParams(d, D))[D]


@pytest.mark.parametrize("D", range(2, 9))
def test_primitive_cycles_contain_every_top_edge(D):
    p = GraphParams(2, D)
    cycles = primitive_cycle_edges(p)
    assert all(len(walk) == D + 1 for walk in cycles.values())
    union = {img for walk in cycles.values() for img in walk}
    # Each primitive cycle contributes D + 1 distinct oriented edges.
    assert len(union) == (D + 1) * len(cycles) == rho_top_closed_form(2, D)
    top = {img for img in enumerate_vertices(GraphParams(2, D + 1)) if edge_cycle_index(edge_from_image(img)) == D}
    assert len(top) == rho_census(p)[D]
    assert top <= union
    # Edges of a primitive (D+1)-cycle can also lie on a shorter cycle once D >= 4.
    assert (top == union) == (D <= 3)
