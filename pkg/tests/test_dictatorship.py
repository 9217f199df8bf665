import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nalin.dictatorship import (DictTestConfig, dim1_total, make_constant, make_dictator,
                                make_random_folded, make_tightness_witness,
                                pass_prob_irrep_decomposition, product_distribution,
                                soundness_probe, test_pass_probability as pass_probability)
from nalin.errors import BudgetExceeded
from nalin.fourier import index_of, is_folded
from nalin.group import catalog_group, commutator_subgroup
from nalin.reps import irreps_of


def pass_oracle(f, eps):
    """Sum over all coordinate triples with the mixture weights, in plain Python."""
    g = f.group
    n, order = f.n, g.order
    single = {}
    for a, b, c in itertools.product(range(order), repeat=3):
        w = eps / order ** 3
        if g.product(a, b, c) == 0:
            w += (1 - eps) / order ** 2
        single[(a, b, c)] = w
    total = 0.0
    for coords in itertools.product(single, repeat=n):
        w = np.prod([single[t] for t in coords])
        if w == 0:
            continue
        a, b, c = ([t[k] for t in coords] for k in range(3))
        fa, fb, fc = (int(f.values[index_of(order, x)]) for x in (a, b, c))
        if g.product(fa, fb, fc) == 0:
            total += w
    return total


@pytest.mark.parametrize("eps", [0.0, 0.25])
@pytest.mark.parametrize("kind", ["dictator", "random", "witness"])
def test_exact_matches_oracle(kind, eps):
    g = catalog_group("S3")
    f = {"dictator": lambda: make_dictator(1, 2, g),
         "random": lambda: make_random_folded(2, g, 3),
         "witness": lambda: make_tightness_witness(2, g, 3)}[kind]()
    p = pass_probability(f, DictTestConfig(2, eps)).p
    assert p == pytest.approx(pass_oracle(f, eps), abs=1e-12)


@pytest.mark.parametrize("name", ["S3", "Q8", "A4"])
@pytest.mark.parametrize("eps", [0.0, 0.1, 0.3])
def test_dictator_formula(name, eps):
    g = catalog_group(name)
    p = pass_probability(make_dictator(0, 2, g), DictTestConfig(2, eps)).p
    assert p == pytest.approx(1 - eps * (1 - 1 / g.order), abs=1e-12)


def test_constant_identity_always_passes():
    g = catalog_group("Q8")
    assert pass_probability(make_constant(2, g), DictTestConfig(2, 0.4)).p == pytest.approx(1.0)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["S3", "Q8", "D4"]), st.integers(1, 3), st.integers(0, 2**31),
       st.sampled_from([0.0, 0.2]))
def test_decomposition_sums_to_p(name, n, seed, eps):
    if eps > 0 and n == 3:
        n = 2  # keep the noisy enumeration under the exact budget
    g = catalog_group(name)
    s = irreps_of(g)
    f = make_random_folded(n, g, seed)
    cfg = DictTestConfig(n, eps)
    terms = pass_prob_irrep_decomposition(f, cfg, s)
    assert abs(terms.sum() - pass_probability(f, cfg).p) <= 1e-9
    dist = product_distribution(f, cfg)
    comm = list(commutator_subgroup(g).members)
    # the one-dimensional part only sees whether the product lands in [G,G]
    assert abs(dim1_total(terms, s) - dist[comm].sum() / len(comm)) <= 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_witness_is_folded_and_lands_in_commutator(n):
    g = catalog_group("S3")
    f = make_tightness_witness(n, g, 0)
    assert is_folded(g, n, f.values)
    dist = product_distribution(f, DictTestConfig(n))
    comm = list(commutator_subgroup(g).members)
    assert dist[comm].sum() == pytest.approx(1.0)


def test_monte_carlo_agrees_and_is_reproducible():
    g = catalog_group("S3")
    f = make_random_folded(2, g, 1)
    exact = pass_probability(f, DictTestConfig(2, 0.2)).p
    cfg = DictTestConfig(2, 0.2, "mc", 50_000, seed=9)
    r1, r2 = pass_probability(f, cfg), pass_probability(f, cfg)
    assert r1 == r2
    assert abs(r1.p - exact) <= r1.ci_halfwidth + 0.005


def test_config_validation_and_budget():
    with pytest.raises(ValueError):
        DictTestConfig(2, 1.5)
    with pytest.raises(ValueError):
        DictTestConfig(2, mode="fast")
    g = catalog_group("S3")
    with pytest.raises(BudgetExceeded):
        pass_probability(make_dictator(0, 4, g), DictTestConfig(4, 0.1))


def test_soundness_probe_reports_a_high_dimensional_alpha():
    g = catalog_group("S3")
    s = irreps_of(g)
    probe = soundness_probe(make_dictator(0, 2, g), s, delta=0.5)
    assert probe.p == pytest.approx(1.0)
    assert probe.alpha.dim >= 2 and probe.alpha.w2 < probe.w2_limit
    assert probe.norm > 0
