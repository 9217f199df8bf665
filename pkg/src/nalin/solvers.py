"""Exact and approximate solvers for Max-k-LIN over a finite group.

The approximation pipeline: project to G/[G,G], solve the abelian system exactly,
then lift each variable inside its coset.  A uniform lift satisfies each
distinct-variable constraint with probability 1/|[G,G]|; the derandomized lift fixes
variables one at a time by conditional expectation and never does worse.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, InvariantFailure, TooManyDistinctVars
from .group import abelian_decomposition, commutator_subgroup, quotient, QuotientGroup
from .lin import LinConstraint, LinInstance, abelianize, evaluate

BRUTE_CAP = 10**8
MAX_LIFT_VARS = 6
TSV_HEADER = ("method", "value", "expectation", "guarantee", "satisfiable", "elapsed_ms")


@dataclass
class SolveReport:
    method: str
    best_value: float
    best_assignment: np.ndarray
    satisfiable: bool | None
    elapsed_ms: float
    expectation: float | None = None
    guarantee: float | None = None
    trace: dict = field(default_factory=dict)

    def tsv_row(self, timing=False) -> str:
        def num(x):
            return "-" if x is None else f"{x:.12g}"

        sat = {True: "yes", False: "no", None: "unknown"}[self.satisfiable]
        ms = f"{self.elapsed_ms:.3f}" if timing else "-"
        return "\t".join([self.method, num(self.best_value), num(self.expectation),
                          num(self.guarantee), sat, ms])


# ---------------------------------------------------------------- brute force


def brute_force(inst: LinInstance, cap=BRUTE_CAP, stop_at_one=True) -> SolveReport:
    """Global optimum over all |G|^n assignments (stops early at value 1).

    The numba path prunes partial assignments that cannot win; the numpy path scans.
    """
    g = inst.group
    total = g.order ** inst.num_vars
    if total > cap:
        raise BudgetExceeded(f"{g.order}^{inst.num_vars} = {total} assignments exceeds cap {cap}")
    t0 = time.perf_counter()
    p = inst.packed
    target = 1.0 - 1e-12 if stop_at_one else 2.0
    _, idx = K.search_assignments(g.cayley, g.inverse, p.consts, p.tvars, p.texps, p.ks, p.rhs,
                                  p.weights, inst.num_vars, g.order, target)
    best = K.digits(g.order, inst.num_vars, [idx])[0]
    value = evaluate(inst, best)
    return SolveReport("brute", value, best, value >= 1.0 - 1e-12,
                       (time.perf_counter() - t0) * 1e3)


# ---------------------------------------------------------------- linear algebra mod d


def _factorize(d):
    out, p = {}, 2
    while p * p <= d:
        while d % p == 0:
            out[p] = out.get(p, 0) + 1
            d //= p
        p += 1
    if d > 1:
        out[d] = out.get(d, 0) + 1
    return out


def _valuation(a, p):
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def _solve_prime_power(A, b, p, e):
    """Solve A x = b (mod p^e) by diagonalizing with minimal-valuation pivots.

    Row operations act on (A, b); column operations are recorded in Q so that x = Q y.
    Returns a list of residues or None.
    """
    mod = p ** e
    m = len(A)
    n = len(A[0]) if m else 0
    A = [[a % mod for a in row] for row in A]
    b = [x % mod for x in b]
    Q = [[int(i == j) for j in range(n)] for i in range(n)]
    r = 0
    while r < min(m, n):
        best = None
        for i in range(r, m):
            for j in range(r, n):
                if A[i][j]:
                    v = _valuation(A[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            break
        v, pi, pj = best
        A[r], A[pi] = A[pi], A[r]
        b[r], b[pi] = b[pi], b[r]
        for row in A:
            row[r], row[pj] = row[pj], row[r]
        for row in Q:
            row[r], row[pj] = row[pj], row[r]
        pv = p ** v
        uinv = pow(A[r][r] // pv, -1, mod)
        for i in range(m):
            if i != r and A[i][r]:
                f = (A[i][r] // pv) * uinv % mod
                A[i] = [(x - f * y) % mod for x, y in zip(A[i], A[r])]
                b[i] = (b[i] - f * b[r]) % mod
        for j in range(r + 1, n):
            if A[r][j]:
                f = (A[r][j] // pv) * uinv % mod
                for row in A:
                    row[j] = (row[j] - f * row[r]) % mod
                for row in Q:
                    row[j] = (row[j] - f * row[r]) % mod
        r += 1
    y = [0] * n
    for i in range(m):
        if i < r:
            v = _valuation(A[i][i], p)
            pv = p ** v
            if b[i] % pv:
                return None
            y[i] = (b[i] // pv) * pow(A[i][i] // pv, -1, mod) % mod
        elif b[i]:
            return None
    return [sum(Q[i][j] * y[j] for j in range(n)) % mod for i in range(n)]


def _crt(residues, moduli):
    x, mod = 0, 1
    for r, m in zip(residues, moduli):
        # x + mod * t = r (mod m), moduli pairwise coprime
        t = ((r - x) * pow(mod, -1, m)) % m
        x, mod = x + mod * t, mod * m
    return x % mod


def solve_mod(A, b, d):
    """One solution of A x = b (mod d), or None when the system has none."""
    A = [[int(a) for a in row] for row in np.asarray(A, dtype=np.int64)]
    b = [int(x) for x in b]
    n = len(A[0]) if A else 0
    if d == 1:
        return [0] * n
    parts, mods = [], []
    for p, e in _factorize(d).items():
        sol = _solve_prime_power(A, b, p, e)
        if sol is None:
            return None
        parts.append(sol)
        mods.append(p ** e)
    x = [_crt([s[i] for s in parts], mods) for i in range(n)]
    for row, bi in zip(A, b):
        if (sum(a * xi for a, xi in zip(row, x)) - bi) % d:
            raise InvariantFailure("modular solution failed substitution")
    return x


def abelian_solve(A, rhs, factors):
    """Coordinates x[v, j] with A x[:, j] = rhs[:, j] (mod factors[j]) for every j, or None."""
    A = np.asarray(A, dtype=np.int64)
    rhs = np.asarray(rhs, dtype=np.int64).reshape(A.shape[0], len(factors))
    n = A.shape[1]
    x = np.zeros((n, len(factors)), dtype=np.int64)
    for j, d in enumerate(factors):
        sol = solve_mod(A, rhs[:, j], int(d))
        if sol is None:
            return None
        x[:, j] = sol
    if len(factors):
        if (((A @ x - rhs) % np.asarray(factors)) != 0).any():
            raise InvariantFailure("abelian solution failed substitution")
    return x


# ---------------------------------------------------------------- lifts


def _constraint_prob(g, c: LinConstraint, domains) -> Fraction:
    """Exact probability that the word hits rhs when each variable is uniform on its domain."""
    vs = c.variables
    if len(vs) > MAX_LIFT_VARS:
        raise TooManyDistinctVars(f"{len(vs)} distinct variables > {MAX_LIFT_VARS}")
    col = {v: i for i, v in enumerate(vs)}
    doms = [np.asarray(domains[v], dtype=np.int64) for v in vs]
    grids = np.meshgrid(*doms, indexing="ij")
    combos = np.stack([gr.reshape(-1) for gr in grids], axis=1)
    acc = np.full(len(combos), c.consts[0], dtype=np.int64)
    for t, cc in zip(c.terms, c.consts[1:]):
        x = combos[:, col[t.var]]
        if t.exp < 0:
            x = g.inverse[x]
        acc = g.cayley[g.cayley[acc, x], cc]
    return Fraction(int(np.count_nonzero(acc == c.rhs)), len(combos))


def _coset_domains(q: QuotientGroup, cosets):
    return [np.asarray(q.cosets[int(c)], dtype=np.int64) for c in cosets]


def lift_expectation(inst: LinInstance, q: QuotientGroup, cosets) -> float:
    """Exact E[value] when every variable is drawn uniformly from its assigned coset."""
    doms = _coset_domains(q, cosets)
    return math.fsum(c.weight * float(_constraint_prob(inst.group, c, doms))
                     for c in inst.constraints)


def random_lift(q: QuotientGroup, cosets, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty(len(cosets), dtype=np.int64)
    for v, c in enumerate(cosets):
        members = q.cosets[int(c)]
        out[v] = members[rng.integers(len(members))]
    return out


def derandomized_lift(inst: LinInstance, q: QuotientGroup, cosets, trace=None) -> np.ndarray:
    """Fix variables in index order, each to the coset element maximizing the conditional
    expectation of the remaining uniform lift.  ``trace`` (a list) receives the expectation
    before any variable is fixed and after each step."""
    g = inst.group
    for c in inst.constraints:
        if len(c.variables) > MAX_LIFT_VARS:
            raise TooManyDistinctVars(f"{len(c.variables)} distinct variables > {MAX_LIFT_VARS}")
    doms = _coset_domains(q, cosets)
    touching = [[] for _ in range(inst.num_vars)]
    for i, c in enumerate(inst.constraints):
        for v in c.variables:
            touching[v].append(i)
    probs = [_constraint_prob(g, c, doms) for c in inst.constraints]
    weights = [c.weight for c in inst.constraints]

    def total():
        return math.fsum(w * float(p) for w, p in zip(weights, probs))

    current = total()
    if trace is not None:
        trace.append(current)
    out = np.empty(inst.num_vars, dtype=np.int64)
    for v in range(inst.num_vars):
        best = None
        for x in doms[v]:
            trial = list(doms)
            trial[v] = np.array([x])
            gain = [(i, _constraint_prob(g, inst.constraints[i], trial)) for i in touching[v]]
            score = math.fsum(weights[i] * float(p) for i, p in gain)
            if best is None or score > best[0] + 1e-15:
                best = (score, int(x), gain)
        _, x, gain = best
        out[v] = x
        doms[v] = np.array([x])
        for i, p in gain:
            probs[i] = p
        new = total()
        if new < current - 1e-12:
            raise InvariantFailure(f"conditional expectation fell from {current} to {new}")
        current = new
        if trace is not None:
            trace.append(current)
    return out


# ---------------------------------------------------------------- pipeline


def best_constant_assignment(inst: LinInstance) -> tuple[np.ndarray, float]:
    best = None
    for c in range(inst.group.order):
        a = np.full(inst.num_vars, c, dtype=np.int64)
        v = evaluate(inst, a)
        if best is None or v > best[1]:
            best = (a, v)
    return best


def folklore_approx(inst: LinInstance) -> SolveReport:
    """Abelianize, solve exactly over G/[G,G], then lift by conditional expectation."""
    t0 = time.perf_counter()
    g = inst.group
    comm = commutator_subgroup(g)
    q = quotient(g, comm)
    dec = abelian_decomposition(q.table)
    system = abelianize(inst, q, dec)
    sol = abelian_solve(system.A, system.rhs, dec.factors)
    trace = {"commutator_order": len(comm), "quotient_order": q.order,
             "factors": dec.factors}
    if sol is None:
        # no solution over the quotient, hence none over G; best constant as a fallback
        a, v = best_constant_assignment(inst)
        trace["abelian"] = "unsat"
        return SolveReport("folklore", v, a, False, (time.perf_counter() - t0) * 1e3,
                           None, None, trace)
    cosets = np.array([dec.element(row) for row in sol], dtype=np.int64)
    expectation = lift_expectation(inst, q, cosets)
    steps = []
    a = derandomized_lift(inst, q, cosets, trace=steps)
    value = evaluate(inst, a)
    if value < expectation - 1e-12:
        raise InvariantFailure(f"derandomized value {value} below expectation {expectation}")
    trace.update(abelian="sat", cosets=cosets, expectation_trace=steps)
    return SolveReport("folklore", value, a, None, (time.perf_counter() - t0) * 1e3,
                       expectation, 1.0 / len(comm), trace)

