import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nalin.errors import BudgetExceeded, ParseError
from nalin.fourier import index_of, random_folded
from nalin.group import catalog_group
from nalin.reduction import (LabelCover, Labeling, assignment_from_tables, decode_distribution,
                             expected_num_vars, fourier_decode, generate_toy_lc, lc_value,
                             longcode_assignment, longcode_tables, parse_labeling, parse_lc,
                             reduce, reduced_value, serialize_labeling, serialize_lc,
                             smoothness_stat, soundness_params)
from nalin.reps import irreps_of

S3 = catalog_group("S3")


def direct_test_value(lc, tables, g):
    """Pass rate of f_v(a) f_u(b) f_v(c) = 1 over every edge and every (a, b), read straight
    from the full node tables."""
    good = total = 0
    for u, v, pi in lc.edges:
        fu, fv = tables[("u", u)], tables[("v", v)]
        for a in itertools.product(range(g.order), repeat=lc.R):
            for b in itertools.product(range(g.order), repeat=lc.L):
                c = [g.inv(g.mul(a[i], b[pi[i]])) for i in range(lc.R)]
                x = g.product(int(fv.values[index_of(g.order, a)]),
                              int(fu.values[index_of(g.order, b)]),
                              int(fv.values[index_of(g.order, c)]))
                good += x == 0
                total += 1
    return good / total


@pytest.mark.parametrize("seed", range(4))
def test_longcode_completeness(seed):
    lc, lab = generate_toy_lc("planted", 2, 2, 2, 3, seed)
    assert lc_value(lc, lab) == 1.0
    red = reduce(lc, S3)
    assert red.num_vars == expected_num_vars(lc, 6) == 2 * 6 + 2 * 36
    assert reduced_value(red, longcode_assignment(lc, lab, red)) == 1.0


def test_one_violated_edge():
    lc = LabelCover(1, 2, 2, 2, ((0, 0, (0, 1)), (0, 1, (0, 1))))
    lab = Labeling((0,), (0, 1))
    assert lc_value(lc, lab) == 0.5
    red = reduce(lc, S3)
    val = reduced_value(red, longcode_assignment(lc, lab, red))
    assert val == pytest.approx(1 - (1 / 2) * (1 - 1 / 6), abs=1e-12)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**31))
def test_folded_assignment_matches_direct_test(seed):
    lc, _ = generate_toy_lc("random", 1, 2, 1, 2, seed)
    rng = np.random.default_rng(seed)
    tables = {("u", 0): random_folded(S3, 1, rng)}
    for v in range(2):
        tables[("v", v)] = random_folded(S3, 2, rng)
    red = reduce(lc, S3)
    got = reduced_value(red, assignment_from_tables(red, tables))
    assert got == pytest.approx(direct_test_value(lc, tables, S3), abs=1e-12)


def test_var_map_covers_every_variable():
    lc, _ = generate_toy_lc("planted", 1, 1, 1, 2, 0)
    red = reduce(lc, S3)
    vm = red.var_map()
    assert sorted(vm.values()) == list(range(red.num_vars))
    assert all(key[2][0] == 0 for key in vm)


def test_sampled_mode_and_budget():
    lc, lab = generate_toy_lc("planted", 1, 2, 2, 3, 1)
    red = reduce(lc, S3, mode="sampled", seed=3, samples=500)
    assert red.instance.m == 500
    assert reduced_value(red, longcode_assignment(lc, lab, red)) == 1.0
    with pytest.raises(BudgetExceeded):
        reduce(lc, S3, cap=100)
    with pytest.raises(ValueError):
        reduce(lc, S3, mode="partial")


def test_decode_longcode_tables():
    lc, lab = generate_toy_lc("planted", 2, 3, 2, 3, 7)
    s = irreps_of(S3)
    rho = next(r for r in s if r.dim == 2)
    tables = longcode_tables(lc, lab, S3)
    nd = decode_distribution(tables[("v", 0)], rho, 0, 1, s)
    assert nd.probs.argmax() == lab.v_labels[0]
    assert nd.probs.sum() == pytest.approx(1 / rho.dim, abs=1e-12)
    red = reduce(lc, S3)
    rep = fourier_decode(red, tables, rho, (0, 1, 0), s, seed=1, trials=100)
    assert rep.lc_value == 1.0 and rep.mean_value == 1.0
    assert abs((1 - rep.bottom_rate) - 0.5) <= 0.1


def test_smoothness_by_hand():
    lc = LabelCover(2, 1, 2, 3, ((0, 0, (0, 0, 1)), (1, 0, (0, 1, 1))))
    st_ = smoothness_stat(lc, 0, {0, 1}, d0=0.25)
    # images of {0, 1}: {0} and {0, 1}
    assert st_["stat"] == pytest.approx((1 + 0.5) / 2)
    assert st_["bound"] == pytest.approx(2 ** -0.5)
    assert st_["ok"] is False
    assert smoothness_stat(lc, 0, {2})["stat"] == 1.0


def test_soundness_params_relations():
    p = soundness_params(0.1, 6, 0.2)
    assert p["C"] ** (-0.1) <= 0.01 / (12 * 6 ** 6) * (1 + 1e-9)
    assert p["eta"] == pytest.approx(p["C"] ** -0.2)
    assert p["eps0"] == pytest.approx(math.sqrt(p["eta"]))
    with pytest.raises(ValueError):
        soundness_params(2.0, 6, 0.2)


def test_label_cover_validation():
    with pytest.raises(ValueError):
        LabelCover(1, 1, 2, 2, ((0, 0, (0, 0)),))  # not surjective
    with pytest.raises(ValueError):
        LabelCover(1, 1, 2, 2, ())


@pytest.mark.parametrize("seed", range(3))
def test_lc_and_labeling_round_trip(seed):
    lc, lab = generate_toy_lc("planted", 2, 3, 2, 3, seed)
    text = serialize_lc(lc)
    back = parse_lc(text)
    assert back.edges == lc.edges and serialize_lc(back) == text
    assert parse_labeling(serialize_labeling(lab)) == lab


def test_lc_parse_errors():
    with pytest.raises(ParseError) as e:
        parse_lc("lc v1\nsides 1 1\nalphabets 1 2\nedge 0 0 : 0\n")
    assert e.value.line == 4
    with pytest.raises(ParseError):
        parse_labeling("w 1 2\n")
