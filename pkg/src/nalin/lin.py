"""Weighted Max-k-LIN instances over a finite group.

A constraint reads c_0 x_{v_1}^{e_1} c_1 ... x_{v_k}^{e_k} c_k = b with e_t = +1 or -1.
Weights are normalized to sum to 1 when an instance is built; the original total
is kept as ``scale``.

File format (``lin v1``)::

    lin v1
    group S3
    vars 4
    # scale 3.0          (only when the weights were rescaled)
    c 0.5 g1 : g0 x0 g2 x3' g0

Constants are ``g<id>``, variables ``x<idx>`` with a trailing apostrophe for the
inverse, everything 0-indexed; ``#`` starts a comment.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as K
from .errors import ParseError, ShapeMismatch
from .group import AbelianDecomposition, FiniteGroup, QuotientGroup, load_group

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Term:
    var: int
    exp: int = 1

    def __post_init__(self):
        if self.exp not in (1, -1):
            raise ValueError(f"exponent must be +1 or -1, got {self.exp}")


@dataclass(frozen=True)
class LinConstraint:
    weight: float
    rhs: int
    consts: tuple
    terms: tuple

    def __post_init__(self):
        if len(self.terms) < 1:
            raise ValueError("a constraint needs at least one variable occurrence")
        if len(self.consts) != len(self.terms) + 1:
            raise ValueError("need exactly one more constant than terms")
        if self.weight < 0:
            raise ValueError("weights must be nonnegative")

    @property
    def k(self) -> int:
        return len(self.terms)

    @property
    def variables(self) -> tuple:
        """Distinct variables in order of first occurrence."""
        return tuple(dict.fromkeys(t.var for t in self.terms))

    def word(self, group: FiniteGroup, assignment) -> int:
        acc = self.consts[0]
        for t, c in zip(self.terms, self.consts[1:]):
            x = assignment[t.var]
            if t.exp < 0:
                x = group.inverse[x]
            acc = group.cayley[group.cayley[acc, x], c]
        return int(acc)


@dataclass(frozen=True)
class Packed:
    """Constraint arrays in the layout the kernels expect (padded to the largest k)."""
    consts: np.ndarray
    tvars: np.ndarray
    texps: np.ndarray
    ks: np.ndarray
    rhs: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class LinInstance:
    group: FiniteGroup
    num_vars: int
    constraints: tuple
    scale: float = 1.0

    def __post_init__(self):
        cons = tuple(self.constraints)
        if not cons:
            raise ValueError("an instance needs at least one constraint")
        g = self.group
        for c in cons:
            for t in c.terms:
                if not 0 <= t.var < self.num_vars:
                    raise ValueError(f"variable x{t.var} out of range (vars {self.num_vars})")
            for e in (c.rhs, *c.consts):
                if not 0 <= e < g.order:
                    raise ValueError(f"element id {e} not in {g.name}")
        total = float(sum(c.weight for c in cons))
        if total <= 0:
            raise ValueError("total weight must be positive")
        scale = self.scale
        if abs(total - 1.0) > WEIGHT_TOL:
            cons = tuple(LinConstraint(c.weight / total, c.rhs, c.consts, c.terms) for c in cons)
            scale = scale * total
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "scale", scale)

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def mixed_arity(self) -> bool:
        return len({c.k for c in self.constraints}) > 1

    @cached_property
    def packed(self) -> Packed:
        m = self.m
        kmax = max(c.k for c in self.constraints)
        consts = np.zeros((m, kmax + 1), dtype=np.int64)
        tvars = np.zeros((m, kmax), dtype=np.int64)
        texps = np.ones((m, kmax), dtype=np.int64)
        ks = np.zeros(m, dtype=np.int64)
        for i, c in enumerate(self.constraints):
            ks[i] = c.k
            consts[i, :c.k + 1] = c.consts
            tvars[i, :c.k] = [t.var for t in c.terms]
            texps[i, :c.k] = [t.exp for t in c.terms]
        rhs = np.array([c.rhs for c in self.constraints], dtype=np.int64)
        w = np.array([c.weight for c in self.constraints], dtype=np.float64)
        return Packed(consts, tvars, texps, ks, rhs, w)


def word_values(inst: LinInstance, assignments) -> np.ndarray:
    """Word value of every constraint under every assignment row: shape (B, m)."""
    a = np.atleast_2d(np.asarray(assignments, dtype=np.int64))
    if a.shape[1] != inst.num_vars:
        raise ShapeMismatch(f"assignment has {a.shape[1]} entries, instance has {inst.num_vars} vars")
    p = inst.packed
    g = inst.group
    return K.word_values(g.cayley, g.inverse, p.consts, p.tvars, p.texps, p.ks,
                         np.ascontiguousarray(a))


def satisfied(inst: LinInstance, assignment) -> np.ndarray:
    return word_values(inst, assignment)[0] == inst.packed.rhs


def evaluate(inst: LinInstance, assignment) -> float:
    """Weighted fraction of satisfied constraints."""
    a = np.asarray(assignment)
    if a.ndim != 1:
        raise ShapeMismatch("evaluate takes a single assignment")
    w = inst.packed.weights
    # dividing by the stored total makes "everything satisfied" exactly 1.0
    return math.fsum(w[satisfied(inst, a)]) / math.fsum(w)


def evaluate_many(inst: LinInstance, assignments) -> np.ndarray:
    return (word_values(inst, assignments) == inst.packed.rhs[None, :]) @ inst.packed.weights


def generate_planted(g: FiniteGroup, n, m, k, seed) -> tuple[LinInstance, np.ndarray]:
    """Random instance with uniform constants and weights, satisfied by a hidden assignment."""
    if k > n:
        raise ValueError(f"k = {k} distinct variables need n >= k (n = {n})")
    rng = np.random.default_rng(seed)
    planted = rng.integers(0, g.order, size=n)
    cons = []
    for _ in range(m):
        vs = rng.choice(n, size=k, replace=False)
        consts = tuple(int(c) for c in rng.integers(0, g.order, size=k + 1))
        terms = tuple(Term(int(v)) for v in vs)
        tmp = LinConstraint(1.0, 0, consts, terms)
        cons.append(LinConstraint(1.0 / m, tmp.word(g, planted), consts, terms))
    return LinInstance(g, n, tuple(cons)), planted.astype(np.int64)


# ---------------------------------------------------------------- abelianization


@dataclass(frozen=True)
class AbelianSystem:
    """Rows A x = rhs[:, j] (mod factors[j]) for every invariant factor j."""
    A: np.ndarray
    rhs: np.ndarray
    factors: tuple

    def satisfied_rows(self, x) -> np.ndarray:
        """x: (num_vars, len(factors)) coordinates; True where every factor agrees."""
        x = np.asarray(x, dtype=np.int64)
        if not self.factors:
            return np.ones(self.A.shape[0], dtype=bool)
        d = np.asarray(self.factors)
        return (((self.A @ x - self.rhs) % d) == 0).all(axis=1)


def abelianize(inst: LinInstance, q: QuotientGroup, dec: AbelianDecomposition) -> AbelianSystem:
    """Project every constant and variable to the abelian quotient and collect coefficients."""
    m, n = inst.m, inst.num_vars
    r = len(dec.factors)
    A = np.zeros((m, n), dtype=np.int64)
    rhs = np.zeros((m, r), dtype=np.int64)
    coords = dec.coords
    proj = q.projection
    for i, c in enumerate(inst.constraints):
        for t in c.terms:
            A[i, t.var] += t.exp
        v = coords[proj[c.rhs]].copy()
        for cc in c.consts:
            v -= coords[proj[cc]]
        rhs[i] = v
    if r:
        rhs %= np.asarray(dec.factors)
    return AbelianSystem(A, rhs, dec.factors)


# ---------------------------------------------------------------- files

_TERM = re.compile(r"^x(\d+)('?)$")
_CONST = re.compile(r"^g(\d+)$")


def _fmt_weight(w):
    return repr(float(w))


def serialize_instance(inst: LinInstance) -> str:
    lines = ["lin v1", f"group {inst.group.name}", f"vars {inst.num_vars}"]
    if abs(inst.scale - 1.0) > WEIGHT_TOL:
        lines.append(f"# scale {inst.scale!r}")
    if inst.mixed_arity:
        lines.append("# mixed-arity")
    for c in inst.constraints:
        toks = [f"g{c.consts[0]}"]
        for t, cc in zip(c.terms, c.consts[1:]):
            toks.append(f"x{t.var}" + ("'" if t.exp < 0 else ""))
            toks.append(f"g{cc}")
        lines.append(f"c {_fmt_weight(c.weight)} g{c.rhs} : " + " ".join(toks))
    return "\n".join(lines) + "\n"


def _parse_const(tok, line, order):
    mt = _CONST.match(tok)
    if not mt:
        raise ParseError(f"expected a constant g<id>, got {tok!r}", line)
    v = int(mt.group(1))
    if v >= order:
        raise ParseError(f"element g{v} not in the group (order {order})", line)
    return v


def parse_instance(text, group: FiniteGroup | None = None) -> LinInstance:
    raw = text.splitlines()
    body = []
    scale = 1.0
    for k, ln in enumerate(raw, start=1):
        content, _, comment = ln.partition("#")
        parts = comment.split()
        if len(parts) == 2 and parts[0] == "scale":
            try:
                scale = float(parts[1])
            except ValueError:
                raise ParseError(f"bad scale {parts[1]!r}", k) from None
        if content.strip():
            body.append((k, content.strip()))
    if not body or body[0][1] != "lin v1":
        raise ParseError("expected header 'lin v1'", body[0][0] if body else 1)
    if len(body) < 3:
        raise ParseError("missing 'group' or 'vars' line", body[-1][0])
    k, ln = body[1]
    if not ln.startswith("group "):
        raise ParseError("expected 'group <name>'", k)
    if group is None:
        group = load_group(ln.split(None, 1)[1].strip())
    k, ln = body[2]
    parts = ln.split()
    if len(parts) != 2 or parts[0] != "vars" or not parts[1].isdigit():
        raise ParseError("expected 'vars <n>'", k)
    n = int(parts[1])
    cons = []
    for k, ln in body[3:]:
        head, sep, tail = ln.partition(":")
        hp = head.split()
        if not sep or len(hp) != 3 or hp[0] != "c":
            raise ParseError("expected 'c <weight> <rhs> : <word>'", k)
        try:
            w = float(hp[1])
        except ValueError:
            raise ParseError(f"bad weight {hp[1]!r}", k) from None
        if not w >= 0:
            raise ParseError("weights must be nonnegative", k)
        rhs = _parse_const(hp[2], k, group.order)
        toks = tail.split()
        if len(toks) < 3 or len(toks) % 2 == 0:
            raise ParseError("word must alternate constants and terms, starting and ending "
                             "with a constant", k)
        consts = [_parse_const(t, k, group.order) for t in toks[0::2]]
        terms = []
        for tok in toks[1::2]:
            mt = _TERM.match(tok)
            if not mt:
                raise ParseError(f"malformed term {tok!r}", k)
            v = int(mt.group(1))
            if v >= n:
                raise ParseError(f"variable x{v} out of range (vars {n})", k)
            terms.append(Term(v, -1 if mt.group(2) else 1))
        cons.append(LinConstraint(w, rhs, tuple(consts), tuple(terms)))
    if not cons:
        raise ParseError("no constraints", body[-1][0])
    return LinInstance(group, n, tuple(cons), scale=scale)
