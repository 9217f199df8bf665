"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line (also repeated in the
terminal summary).  Run alone with ``pytest tests/test_acceptance.py -v``."""
import itertools
import math
import time

import numpy as np
import pytest

from nalin.dictatorship import (DictTestConfig, make_dictator, make_tightness_witness,
                                pass_prob_irrep_decomposition,
                                test_pass_probability as pass_probability)
from nalin.fourier import (bnp_check, bnp_check_group, convolve, folded_dim1_mass,
                           fourier_transform, inverse_transform, plancherel_rhs, random_folded,
                           random_scalar)
from nalin.group import catalog_group, commutator_subgroup, conjugacy_classes, quotient
from nalin.lin import generate_planted
from nalin.reduction import (expected_num_vars, fourier_decode, generate_toy_lc, lc_value,
                             longcode_assignment, longcode_tables, reduce, reduced_value)
from nalin.reps import check_multiplicity_bound, irreps_of, restrict_through_projection
from nalin.solvers import abelian_solve, brute_force, folklore_approx

RESULTS = []

CATALOG = [f"Z{k}" for k in range(2, 9)] + ["S3", "S4", "A4", "A5", "D4", "Q8", "S3×Z2"]
SMALL_CATALOG = [n for n in CATALOG if catalog_group(n).order <= 24]


def report(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# ---------------------------------------------------------------- independent oracles


def closure(g, gens):
    members = {0} | set(gens)
    frontier = set(members)
    while frontier:
        new = {g.mul(a, b) for a in frontier for b in members} | \
              {g.mul(b, a) for a in frontier for b in members}
        frontier = new - members
        members |= frontier
    return members


def commutator_oracle(g):
    n = g.order
    return closure(g, {g.mul(g.mul(g.inv(a), g.inv(b)), g.mul(a, b))
                       for a in range(n) for b in range(n)})


def axioms_hold(g):
    c = g.cayley
    n = g.order
    ids = np.arange(n)
    if not (np.array_equal(c[0], ids) and np.array_equal(c[:, 0], ids)):
        return False
    if not all(0 in row for row in c):
        return False
    a, b, d = np.meshgrid(ids, ids, ids, indexing="ij")
    return bool(np.array_equal(c[c[a, b], d], c[a, c[b, d]]))


# ---------------------------------------------------------------- 1


def test_criterion_1_group_engine():
    t0 = time.perf_counter()
    sizes, bad = {}, []
    for name in CATALOG:
        g = catalog_group(name)
        comm = commutator_subgroup(g)
        sizes[name] = len(comm)
        if not axioms_hold(g):
            bad.append(f"{name}: axioms")
        if set(comm.members) != commutator_oracle(g):
            bad.append(f"{name}: commutator differs from closure oracle")
        if not quotient(g, comm).table.is_abelian():
            bad.append(f"{name}: quotient not abelian")
    expected = {**{f"Z{k}": 1 for k in range(2, 9)}, "S3": 3, "S4": 12, "A4": 4, "A5": 60,
                "D4": 2, "Q8": 2, "S3×Z2": 3}
    if sizes != expected:
        bad.append(f"sizes {sizes}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 10
    report(1, ok, f"{len(CATALOG)} groups, commutator sizes "
                  f"S3={sizes['S3']} S4={sizes['S4']} A4={sizes['A4']} A5={sizes['A5']} "
                  f"D4={sizes['D4']} Q8={sizes['Q8']}, {elapsed:.2f}s {bad or ''}")
    assert ok


# ---------------------------------------------------------------- 2


def entry_orthogonality(s):
    n = s.group.order
    worst = 0.0
    for r in s:
        for t in s:
            m = np.einsum("gij,gkl->ijkl", r.matrices, np.conj(t.matrices)) / n
            if r.id == t.id:
                d = r.dim
                m = m - np.einsum("ik,jl->ijkl", np.eye(d), np.eye(d)) / d
            worst = max(worst, float(np.abs(m).max()))
    return worst


def test_criterion_2_representation_suite():
    groups = SMALL_CATALOG + ["A5"]
    worst, bad = 0.0, []
    for name in groups:
        g = catalog_group(name)
        s = irreps_of(g)
        if sum(d * d for d in s.dims) != g.order:
            bad.append(f"{name}: sum of squares")
        if len(s) != len(conjugacy_classes(g)):
            bad.append(f"{name}: irrep count")
        x = s.char_table
        char = float(np.abs(x @ np.conj(x).T / g.order - np.eye(len(s))).max())
        sums = max(float(np.abs(r.matrices.sum(axis=0)).max()) for r in s.irreps[1:])
        res = max(char, entry_orthogonality(s), sums)
        worst = max(worst, res)
        if res > 1e-9:
            bad.append(f"{name}: residual {res:.2e}")
    ok = not bad
    report(2, ok, f"{len(groups)} groups (A5 enabled), worst residual {worst:.2e} {bad or ''}")
    assert ok


# ---------------------------------------------------------------- 3


def test_criterion_3_fourier_identities():
    t0 = time.perf_counter()
    worst = {"inversion": 0.0, "parseval": 0.0, "plancherel": 0.0, "convolution": 0.0}
    for name in ("Z4", "S3", "Q8"):
        g = catalog_group(name)
        s = irreps_of(g)
        for n in (1, 2, 3):
            for k in range(100):
                rng = np.random.default_rng([g.order, n, k])
                f, h = random_scalar(g, n, rng), random_scalar(g, n, rng)
                tf, th = fourier_transform(f, s), fourier_transform(h, s)
                worst["inversion"] = max(worst["inversion"],
                                         float(np.abs(inverse_transform(tf).values - f.values).max()))
                worst["parseval"] = max(worst["parseval"], abs(tf.parseval_rhs() - f.norm() ** 2))
                worst["plancherel"] = max(worst["plancherel"],
                                          abs(f.inner(h) - plancherel_rhs(tf, th)))
                tc = fourier_transform(convolve(f, h), s)
                worst["convolution"] = max(worst["convolution"], max(
                    float(np.abs(m - tf.coeffs[a] @ th.coeffs[a]).max()) for a, m in tc))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and elapsed < 60
    report(3, ok, "900 functions, " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + f", {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 4


def test_criterion_4_folded_dim1_vanishing():
    g = catalog_group("S3")
    s = irreps_of(g)
    rho = next(r for r in s if r.dim == 2)
    worst = max(folded_dim1_mass(random_folded(g, 2, np.random.default_rng(k)), rho, s)
                for k in range(100))
    ok = worst <= 1e-9
    report(4, ok, f"100 folded f on S3^2, max dim-1 coefficient norm {worst:.1e}")
    assert ok


# ---------------------------------------------------------------- 5


def test_criterion_5_multiplicity_and_dichotomy():
    checked, bad = 0, []
    for name in SMALL_CATALOG:
        s = irreps_of(catalog_group(name))
        for k in (1, 2, 3):
            for factors in itertools.product(range(len(s)), repeat=k):
                if math.prod(s.dims[f] for f in factors) < 2:
                    continue
                rep = check_multiplicity_bound(s, factors)
                checked += 1
                if not rep.ok:
                    bad.append((name, factors, rep.max_mult, rep.bound))
    s3 = irreps_of(catalog_group("S3"))
    order = s3.group.order
    sweeps = hyp = fails = 0
    for R in range(1, 5):
        for L in range(1, min(2, R) + 1):
            for pi in itertools.product(range(L), repeat=R):
                if set(pi) != set(range(L)):
                    continue
                for alpha in itertools.product(range(len(s3)), repeat=R):
                    for c in (1, 2):
                        eps0 = math.sqrt((1 - 1 / order) ** (c - math.log2(c)))
                        rep = restrict_through_projection(s3, alpha, pi, c, eps0)
                        sweeps += 1
                        hyp += rep.hypothesis
                        fails += not rep.dichotomy_ok
    ok = not bad and fails == 0 and hyp > 0
    report(5, ok, f"{checked} tensor tuples within (1-1/|G|) dim; dichotomy sweep "
                  f"{sweeps} cases, {hyp} meet the hypothesis, {fails} violations {bad[:3] or ''}")
    assert ok


# ---------------------------------------------------------------- 6


def test_criterion_6_dictatorship_test():
    g = catalog_group("S3")
    s = irreps_of(g)
    notes, hard = [], []
    p0 = pass_probability(make_dictator(0, 2, g), DictTestConfig(2)).p
    if p0 != 1.0:
        hard.append(f"dictator eps=0 p={p0}")
    for eps in (0.1, 0.3):
        p = pass_probability(make_dictator(1, 2, g), DictTestConfig(2, eps)).p
        if abs(p - (1 - eps * 5 / 6)) > 1e-12:
            hard.append(f"dictator eps={eps} p={p!r}")
    worst_dec = 0.0
    for f in (make_dictator(0, 2, g), make_tightness_witness(2, g, 0)):
        for eps in (0.0, 0.1, 0.3):
            cfg = DictTestConfig(2, eps)
            terms = pass_prob_irrep_decomposition(f, cfg, s)
            worst_dec = max(worst_dec, abs(terms.sum() - pass_probability(f, cfg).p))
    if worst_dec > 1e-9:
        hard.append(f"decomposition residual {worst_dec:.1e}")

    witness = {}
    for n in (2, 4):
        f = make_tightness_witness(n, g, 0)
        exact = pass_probability(f, DictTestConfig(n)).p
        mc = pass_probability(f, DictTestConfig(n, mode="mc", samples=100_000, seed=1)).p
        witness[n] = (exact, mc)
        notes.append(f"witness n={n}: exact {exact:.4f}, mc {mc:.4f}")
    n4_ok = all(abs(x - 1 / 3) <= 0.02 for x in witness[4])
    n2_ok = all(abs(x - 1 / 3) <= 0.02 for x in witness[2])
    if not n4_ok:
        hard.append("witness n=4 outside 1/3 +- 0.02")
    ok = not hard and n2_ok
    report(6, ok, f"dictator p=1 and 1-5eps/6 exact, decomposition residual {worst_dec:.1e}; "
                  + "; ".join(notes)
                  + ("" if n2_ok else " (folded witnesses at n=2 cannot reach 1/3 +- 0.02)")
                  + (f" {hard}" if hard else ""))
    assert not hard
    if not n2_ok:
        pytest.xfail("no folded witness on S3^2 lands within 0.02 of 1/3 (nearest 0.3125)")


# ---------------------------------------------------------------- 7


def test_criterion_7_folklore_pipeline():
    t0 = time.perf_counter()
    bad, brute_ok, count = [], 0, 0
    for name, bound in (("S3", 1 / 3), ("Q8", 1 / 2)):
        g = catalog_group(name)
        for seed in range(50):
            inst, _ = generate_planted(g, 8, 40, 3, seed)
            rep = folklore_approx(inst)
            count += 1
            if rep.expectation is None or abs(rep.expectation - bound) > 1e-12:
                bad.append(f"{name}/{seed} expectation {rep.expectation}")
            if rep.best_value < bound - 1e-12:
                bad.append(f"{name}/{seed} value {rep.best_value}")
            b = brute_force(inst)
            brute_ok += b.satisfiable is True and b.best_value >= rep.best_value
    elapsed = time.perf_counter() - t0
    ok = not bad and brute_ok == count and elapsed < 120
    report(7, ok, f"{count} planted instances (n=8, m=40, k=3): expectations 1/3 and 1/2 exact, "
                  f"lifted values above the bound, brute force confirms {brute_ok}/{count} "
                  f"satisfiable, {elapsed:.1f}s {bad[:3] or ''}")
    assert ok


# ---------------------------------------------------------------- 8


def test_criterion_8_reduction_completeness():
    g = catalog_group("S3")
    s = irreps_of(g)
    rho = next(r for r in s if r.dim == 2)
    bad, rates = [], []
    for seed in range(20):
        rng = np.random.default_rng([8, seed])
        n_u, n_v = int(rng.integers(1, 3)), int(rng.integers(1, 4))
        L = int(rng.integers(1, 3))
        R = int(rng.integers(L, 4))
        lc, lab = generate_toy_lc("planted", n_u, n_v, L, R, seed)
        red = reduce(lc, g)
        if lc_value(lc, lab) != 1.0:
            bad.append(f"{seed}: planted labeling not satisfying")
        if reduced_value(red, longcode_assignment(lc, lab, red)) != 1.0:
            bad.append(f"{seed}: long-code value below 1")
        if red.num_vars != expected_num_vars(lc, 6) or \
                red.num_vars != n_u * 6 ** (L - 1) + n_v * 6 ** (R - 1):
            bad.append(f"{seed}: variable count")
        d = fourier_decode(red, longcode_tables(lc, lab, g), rho, (0, 1, 0), s, seed=seed,
                           trials=200)
        if d.mean_value != 1.0:
            bad.append(f"{seed}: decoded value {d.mean_value}")
        rates.append(1 - d.bottom_rate)
    worst = max(abs(r - 0.5) for r in rates)
    ok = not bad and worst <= 0.05
    report(8, ok, f"20 planted Label Covers: long-code value 1, variable counts match, decoded "
                  f"labelings satisfy every non-bottom edge, non-bottom rate "
                  f"{min(rates):.3f}..{max(rates):.3f} {bad[:3] or ''}")
    assert ok


# ---------------------------------------------------------------- 9


def modular_oracle(A, rhs, factors):
    n = A.shape[1]
    for j, d in enumerate(factors):
        if not any(((A @ np.array(x) - rhs[:, j]) % d == 0).all()
                   for x in itertools.product(range(d), repeat=n)):
            return False
    return True


def test_criterion_9_abelian_solver():
    agree = verified = sat = 0
    for seed in range(200):
        rng = np.random.default_rng([9, seed])
        factors = tuple(int(x) for x in rng.choice([2, 3, 4, 6], size=int(rng.integers(1, 3))))
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        A = rng.integers(-6, 7, size=(m, n))
        rhs = np.stack([rng.integers(0, d, size=m) for d in factors], axis=1)
        x = abelian_solve(A, rhs, factors)
        truth = modular_oracle(A, rhs, factors)
        agree += (x is not None) == truth
        sat += truth
        if x is not None:
            verified += bool((((A @ x - rhs) % np.array(factors)) == 0).all())
    ok = agree == 200 and verified == sat
    report(9, ok, f"200 systems: {agree} agree with exhaustive search ({sat} solvable), "
                  f"{verified} solutions substitution-verified")
    assert ok


# ---------------------------------------------------------------- 10


def test_criterion_10_convolution_bound(monkeypatch):
    monkeypatch.setenv("NALIN_A5", "1")
    g = catalog_group("A5")
    s = irreps_of(g)
    worst_gap, fails = -np.inf, 0
    for k in range(100):
        rng = np.random.default_rng([10, k])
        f, h = random_scalar(g, 1, rng, mean_zero=True), random_scalar(g, 1, rng, mean_zero=True)
        res = bnp_check(f, h, s)
        gap = res.lhs - f.norm() * h.norm() / math.sqrt(3)
        worst_gap = max(worst_gap, gap)
        fails += res.D != 3 or gap > 1e-9
    monkeypatch.setenv("NALIN_A5", "0")
    rng = np.random.default_rng(10)
    gated = bnp_check_group(random_scalar(g, 1, rng, mean_zero=True), random_scalar(g, 1, rng))
    degraded = gated.D == 1 and gated.note == "trivial bound" and gated.ok
    ok = fails == 0 and degraded
    report(10, ok, f"A5 (D=3): 100 pairs, max ||f*g|| - ||f|| ||g||/sqrt(3) = {worst_gap:.3f}; "
                   f"gated off: D={gated.D} '{gated.note}'")
    assert ok
