import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nalin.errors import GroupAxiomError, ParseError, UnknownGroup
from nalin.group import (abelian_decomposition, catalog_group, commutator_subgroup,
                         conjugacy_classes, direct_product, is_normal, load_group,
                         make_group, parse_group_file, quotient, serialize_group,
                         subgroup_closure)

SMALL = ["Z2", "Z3", "Z4", "Z6", "S3", "D4", "Q8", "A4", "S3×Z2"]


def closure_oracle(g, gens):
    """Naive subgroup closure: keep multiplying until nothing new appears."""
    members = {0} | set(gens)
    while True:
        new = {g.mul(a, b) for a in members for b in members} - members
        if not new:
            return members
        members |= new


def commutator_oracle(g):
    n = g.order
    comms = {g.mul(g.mul(g.inv(a), g.inv(b)), g.mul(a, b)) for a in range(n) for b in range(n)}
    return closure_oracle(g, comms)


@pytest.mark.parametrize("name", SMALL)
def test_axioms_by_triple_loop(name):
    g = catalog_group(name)
    n = g.order
    for a, b, c in itertools.product(range(n), repeat=3):
        assert g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c))
    for a in range(n):
        assert g.mul(a, 0) == a == g.mul(0, a)
        assert g.mul(a, g.inv(a)) == 0


@pytest.mark.parametrize("name,size", [("Z5", 1), ("S3", 3), ("D4", 2), ("Q8", 2),
                                       ("A4", 4), ("S4", 12), ("S3×Z2", 3)])
def test_commutator_matches_closure_oracle(name, size):
    g = catalog_group(name)
    comm = commutator_subgroup(g)
    assert set(comm.members) == commutator_oracle(g)
    assert len(comm) == size
    assert is_normal(g, comm.members)


@pytest.mark.parametrize("name", SMALL)
def test_quotient_is_abelian_and_projection_is_homomorphism(name):
    g = catalog_group(name)
    q = quotient(g, commutator_subgroup(g))
    assert q.table.is_abelian()
    for a in range(g.order):
        for b in range(g.order):
            assert q.projection[g.mul(a, b)] == q.table.mul(q.projection[a], q.projection[b])


def test_conjugacy_classes_match_direct_orbits():
    g = catalog_group("S4")
    oracle = {frozenset(g.mul(g.mul(h, x), g.inv(h)) for h in range(g.order)) for x in range(g.order)}
    assert {frozenset(c) for c in conjugacy_classes(g)} == oracle
    assert sorted(len(c) for c in conjugacy_classes(g)) == [1, 3, 6, 6, 8]


@pytest.mark.parametrize("name,factors", [("Z4", [4]), ("Z6", [6]), ("Z2×Z4", [2, 4]),
                                          ("Z2×Z2×Z3", [2, 6])])
def test_abelian_decomposition_invariant_factors(name, factors):
    h = catalog_group(name)
    dec = abelian_decomposition(h)
    assert list(dec.factors) == factors
    # coordinates are a bijection compatible with the group law
    seen = {dec.element(dec.coords[x]) for x in range(h.order)}
    assert seen == set(range(h.order))
    for a in range(h.order):
        for b in range(h.order):
            s = (np.asarray(dec.coords[a]) + dec.coords[b]) % np.asarray(dec.factors)
            assert dec.element(s) == h.mul(a, b)


def test_rejects_non_associative_latin_square():
    # a Latin square with identity 0 that is not associative (order 5 loop)
    t = [[0, 1, 2, 3, 4],
         [1, 0, 3, 4, 2],
         [2, 4, 0, 1, 3],
         [3, 2, 4, 0, 1],
         [4, 3, 1, 2, 0]]
    with pytest.raises(GroupAxiomError):
        make_group("loop", t)


def test_rejects_non_latin_table():
    with pytest.raises(GroupAxiomError):
        make_group("bad", [[0, 1], [1, 1]])


def test_unknown_group_name():
    with pytest.raises(UnknownGroup):
        catalog_group("Foo7")


@pytest.mark.parametrize("name", ["S3", "Q8", "Z4"])
def test_group_file_round_trip(name):
    g = catalog_group(name)
    text = serialize_group(g)
    h = parse_group_file(text)
    assert np.array_equal(h.cayley, g.cayley)
    assert serialize_group(h) == text
    assert np.array_equal(load_group(text).cayley, g.cayley)


def test_group_file_errors_carry_line_numbers():
    with pytest.raises(ParseError) as e:
        parse_group_file("group v1\norder 2\n0 1\n1 x\n")
    assert e.value.line == 4
    with pytest.raises(ParseError):
        parse_group_file("grp v1\n")


def test_direct_product_order_and_commutator():
    g = direct_product(catalog_group("S3"), catalog_group("Z2"))
    assert g.order == 12
    assert len(commutator_subgroup(g)) == 3


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL), st.lists(st.integers(0, 23), max_size=3))
def test_subgroup_closure_property(name, gens):
    g = catalog_group(name)
    gens = [x % g.order for x in gens]
    sub = subgroup_closure(g, gens)
    assert set(sub.members) == closure_oracle(g, gens)
    assert g.order % len(sub) == 0  # Lagrange
