"""The three-query dictatorship test f(a) f(b) f(c) = 1 with c_i = (a_i b_i)^-1.

With noise eps every coordinate triple (a_i, b_i, c_i) is drawn from
mu_eps = (1 - eps) * uniform{a b c = 1} + eps * uniform(G^3).  Pass probabilities
are computed exactly by weighted enumeration or estimated by Monte Carlo; the
exact mode also splits p into per-irrep terms
T_rho = (dim rho / |G|) E[chi_rho(f(a) f(b) f(c))], which sum to p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, Unsupported
from .fourier import (GroupFunctionTable, IrrepIndex, dictator, entry_function,
                      folded_from_representatives, fourier_transform, hs_norm)
from .group import FiniteGroup, commutator_subgroup
from .reps import IrrepSet

EXACT_CAP = 10**8
MC_BLOCK = 4096
CI_LEVEL = 0.99


@dataclass(frozen=True)
class DictTestConfig:
    n: int
    epsilon: float = 0.0
    mode: str = "exact"
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.mode not in ("exact", "mc"):
            raise ValueError(f"mode must be 'exact' or 'mc', got {self.mode!r}")
        if self.n < 1 or self.samples < 1:
            raise ValueError("n and samples must be positive")

    def exact_cost(self, order) -> int:
        return order ** ((3 if self.epsilon > 0 else 2) * self.n)


@dataclass(frozen=True)
class PassResult:
    p: float
    ci_halfwidth: float
    mode: str


# ---------------------------------------------------------------- test functions


def make_dictator(i, n, g: FiniteGroup) -> GroupFunctionTable:
    if not 0 <= i < n:
        raise IndexError(f"coordinate {i} outside 0..{n - 1}")
    return dictator(g, n, i)


def make_random_folded(n, g: FiniteGroup, seed) -> GroupFunctionTable:
    """Uniform value on each orbit representative, extended by folding."""
    rng = np.random.default_rng(seed)
    return folded_from_representatives(g, n, rng.integers(0, g.order, size=g.order ** (n - 1)))


def make_tightness_witness(n, g: FiniteGroup, seed) -> GroupFunctionTable:
    """f(x) = x_1 r(x_1^-1 . x) with r uniform on [G,G] per orbit representative.

    The quotient part of f is the first coordinate, so the test constraint always
    holds modulo [G,G], while the commutator part is random and passes about
    1/|[G,G]| of the time.  The construction is folded for every n.
    """
    members = np.asarray(commutator_subgroup(g).members, dtype=np.int64)
    rng = np.random.default_rng(seed)
    reps = members[rng.integers(0, len(members), size=g.order ** (n - 1))]
    return folded_from_representatives(g, n, reps)


def make_constant(n, g: FiniteGroup, value=0) -> GroupFunctionTable:
    return GroupFunctionTable.detect(g, n, np.full(g.order ** n, value, dtype=np.int64))


# ---------------------------------------------------------------- pass probability


def noise_weights(g: FiniteGroup, epsilon) -> tuple[np.ndarray, float, float]:
    """Per-coordinate law of (a_i, b_i, c_i): mask of triples with a b c = 1, and the weight
    of a masked triple, (1 - eps)/|G|^2 + eps/|G|^3, and of any other, eps/|G|^3."""
    order = g.order
    on = np.zeros((order,) * 3, dtype=np.int64)
    a, b = np.meshgrid(np.arange(order), np.arange(order), indexing="ij")
    on[a, b, g.inverse[g.cayley[a, b]]] = 1
    lo = epsilon / order ** 3
    return on, (1.0 - epsilon) / order ** 2 + lo, lo


def product_distribution(f: GroupFunctionTable, cfg: DictTestConfig) -> np.ndarray:
    """Exact law of f(a) f(b) f(c) as a probability vector over G.

    With noise the enumeration counts triples by how many coordinates satisfy a b c = 1,
    in integers, and applies the two weights only at the end.
    """
    g = f.group
    if cfg.n != f.n:
        raise ValueError(f"config n = {cfg.n} but the table has n = {f.n}")
    cost = cfg.exact_cost(g.order)
    if cost > EXACT_CAP:
        raise BudgetExceeded(f"exact enumeration needs {cost} terms (cap {EXACT_CAP})")
    if cfg.epsilon == 0:
        hist = K.dict_hist_pairs(g.cayley, g.inverse, f.values, f.n, g.order)
        return hist / float(g.order ** (2 * f.n))
    on, hi, lo = noise_weights(g, cfg.epsilon)
    counts = K.dict_hist_noisy(g.cayley, f.values, f.n, g.order, on)
    w = [hi ** k * lo ** (f.n - k) for k in range(f.n + 1)]
    return np.array([math.fsum(int(counts[k, x]) * w[k] for k in range(f.n + 1))
                     for x in range(g.order)])


def _mc_block(f, cfg, block, size):
    g = f.group
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, block]))
    a = rng.integers(0, g.order, size=(size, f.n))
    b = rng.integers(0, g.order, size=(size, f.n))
    c = g.inverse[g.cayley[a, b]]
    if cfg.epsilon > 0:
        resample = rng.random((size, f.n)) < cfg.epsilon
        c = np.where(resample, rng.integers(0, g.order, size=(size, f.n)), c)
    rad = K.radix(g.order, f.n)
    fa, fb, fc = f.values[a @ rad], f.values[b @ rad], f.values[c @ rad]
    return int(np.count_nonzero(g.cayley[g.cayley[fa, fb], fc] == 0))


def test_pass_probability(f: GroupFunctionTable, cfg: DictTestConfig) -> PassResult:
    """Pass probability; exact (ci 0) or Monte Carlo with a 99% normal-approximation CI.

    In MC mode sample block j is drawn from SeedSequence([seed, j]), so the estimate
    does not depend on how blocks are scheduled.  Resampling a uniform triple on a
    coordinate is the eps-part of the mixture (a, b uniform, c uniform independently).
    """
    if cfg.mode == "exact":
        return PassResult(float(product_distribution(f, cfg)[0]), 0.0, "exact")
    hits, done, block = 0, 0, 0
    while done < cfg.samples:
        size = min(MC_BLOCK, cfg.samples - done)
        hits += _mc_block(f, cfg, block, size)
        done += size
        block += 1
    p = hits / cfg.samples
    z = NormalDist().inv_cdf(0.5 + CI_LEVEL / 2)
    return PassResult(p, float(z * np.sqrt(max(p * (1 - p), 0.0) / cfg.samples)), "mc")


test_pass_probability.__test__ = False  # not a pytest test despite the name


def pass_prob_irrep_decomposition(f: GroupFunctionTable, cfg: DictTestConfig,
                                  s: IrrepSet) -> np.ndarray:
    """T_rho = (dim rho / |G|) E[chi_rho(product)] per irrep (complex; the sum is p)."""
    dist = product_distribution(f, cfg)
    dims = np.array(s.dims, dtype=float)
    return dims / f.group.order * (s.char_table @ dist)


def dim1_total(terms, s: IrrepSet) -> complex:
    return complex(sum(t for t, d in zip(terms, s.dims) if d == 1))


# ---------------------------------------------------------------- soundness diagnostic


@dataclass(frozen=True)
class SoundnessProbe:
    p: float
    excess: float
    delta: float
    w2_limit: float
    bound: float
    rho: int
    entry: tuple
    alpha: IrrepIndex | None
    norm: float


def soundness_probe(f: GroupFunctionTable, s: IrrepSet, delta, p=None) -> SoundnessProbe:
    """Largest ||h^(alpha)|| over alpha with dim >= 2 and w2 < 1/(2 delta^2), with
    h = rho(f)_ij maximized over rho of dimension >= 2 and entries (i, j).

    Reports it next to excess/|G| - delta, where excess = p - 1/|[G,G]|.  Exploratory:
    nothing is asserted about the comparison.
    """
    g = f.group
    if p is None:
        p = test_pass_probability(f, DictTestConfig(f.n)).p
    excess = p - 1.0 / len(commutator_subgroup(g))
    limit = 1.0 / (2 * delta ** 2)
    best = (-1.0, -1, (0, 0), None)
    for rho in s:
        if rho.dim < 2:
            continue
        for i in range(rho.dim):
            for j in range(rho.dim):
                t = fourier_transform(entry_function(f, rho, i, j), s)
                for a, m in t:
                    if a.dim >= 2 and a.w2 < limit:
                        nrm = hs_norm(m)
                        if nrm > best[0] + 1e-15:
                            best = (nrm, rho.id, (i, j), a)
    if best[3] is None:
        raise Unsupported(f"{g.name} has no irrep of dimension >= 2")
    return SoundnessProbe(float(p), float(excess), float(delta), limit,
                          float(excess / g.order - delta), best[1], best[2], best[3], best[0])
