"""Finite groups as explicit multiplication tables.

Elements are integers ``0..order-1`` with ``0`` the identity. ``cayley[a, b]``
is the product ``a * b``. Catalog groups are built from permutations or small
presentations and then run through the same validator as external tables.
"""
from __future__ import annotations

import functools
import itertools
import math
import re
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import GroupAxiomError, NonAbelian, NotNormal, ParseError, UnknownGroup

ASSOC_EXHAUSTIVE_MAX = 200
ASSOC_SAMPLES = 10**6
MAX_CATALOG_ORDER = 1000


def _frozen(a, dtype=np.int64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    name: str
    cayley: np.ndarray
    inverse: np.ndarray
    labels: tuple
    perms: tuple | None = None  # underlying permutations, for S_n / A_n

    @property
    def order(self) -> int:
        return int(self.cayley.shape[0])

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def mul(self, a, b) -> int:
        return int(self.cayley[a, b])

    def inv(self, a) -> int:
        return int(self.inverse[a])

    def product(self, *elems) -> int:
        acc = 0
        for e in elems:
            acc = int(self.cayley[acc, e])
        return acc

    def power(self, a, k) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        acc, base = 0, int(a)
        while k:
            if k & 1:
                acc = int(self.cayley[acc, base])
            base = int(self.cayley[base, base])
            k >>= 1
        return acc

    def element_order(self, a) -> int:
        k, x = 1, int(a)
        while x != 0:
            x = int(self.cayley[x, a])
            k += 1
        return k

    def commutator(self, a, b) -> int:
        """g^-1 h^-1 g h."""
        left = self.cayley[self.inverse[a], self.inverse[b]]
        return int(self.cayley[left, self.cayley[a, b]])

    def conjugate(self, g, x) -> int:
        """g x g^-1."""
        return int(self.cayley[self.cayley[g, x], self.inverse[g]])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.cayley, self.cayley.T))

    def center(self) -> list[int]:
        return [a for a in range(self.order) if np.array_equal(self.cayley[a], self.cayley[:, a])]

    def exponent(self) -> int:
        return math.lcm(*(self.element_order(a) for a in range(self.order)))

    def label(self, a) -> str:
        return self.labels[a]


def validate_table(cayley, seed=0):
    """Check the group axioms on a raw table; raise GroupAxiomError on the first violation."""
    c = np.asarray(cayley)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
        raise GroupAxiomError("table must be a non-empty square array")
    n = c.shape[0]
    if c.min() < 0 or c.max() >= n:
        raise GroupAxiomError("table entries out of range")
    ids = np.arange(n)
    if not np.array_equal(c[0], ids) or not np.array_equal(c[:, 0], ids):
        raise GroupAxiomError("element 0 does not act as the identity")
    srt = np.sort(c, axis=1)
    bad = np.flatnonzero((srt != ids).any(axis=1))
    if bad.size:
        raise GroupAxiomError(f"row {bad[0]} is not a permutation (not a Latin square)")
    srt = np.sort(c, axis=0)
    bad = np.flatnonzero((srt != ids[:, None]).any(axis=0))
    if bad.size:
        raise GroupAxiomError(f"column {bad[0]} is not a permutation (not a Latin square)")
    if n <= ASSOC_EXHAUSTIVE_MAX:
        for a in range(n):
            # (a b) c  versus  a (b c), for all b, c at once
            if not np.array_equal(c[c[a]], c[a][c]):
                b, cc = np.argwhere(c[c[a]] != c[a][c])[0]
                raise GroupAxiomError(f"associativity fails at ({a}, {b}, {cc})")
    else:
        rng = np.random.default_rng(seed)
        t = rng.integers(0, n, size=(ASSOC_SAMPLES, 3))
        a, b, cc = t[:, 0], t[:, 1], t[:, 2]
        bad = np.flatnonzero(c[c[a, b], cc] != c[a, c[b, cc]])
        if bad.size:
            i = bad[0]
            raise GroupAxiomError(f"associativity fails at ({a[i]}, {b[i]}, {cc[i]})")


def make_group(name, cayley, labels=None, perms=None, validate=True) -> FiniteGroup:
    c = np.asarray(cayley, dtype=np.int64)
    if validate:
        validate_table(c)
    n = c.shape[0]
    inverse = np.argmax(c == 0, axis=1)
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise GroupAxiomError(f"expected {n} labels, got {len(labels)}")
    if any(not s or any(ch.isspace() for ch in s) for s in labels):
        raise GroupAxiomError("labels must be non-empty tokens without whitespace")
    return FiniteGroup(name, _frozen(c), _frozen(inverse), labels, perms)


# ---------------------------------------------------------------- catalog


def _compose(p, q):
    # (p*q)(i) = p(q(i)): apply q first
    return tuple(p[i] for i in q)


def perm_sign(p) -> int:
    seen, sign = set(), 1
    for s in range(len(p)):
        if s in seen:
            continue
        length, j = 0, s
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def cycle_label(p) -> str:
    seen, parts = set(), []
    for s in range(len(p)):
        if s in seen or p[s] == s:
            seen.add(s)
            continue
        cyc, j = [], s
        while j not in seen:
            seen.add(j)
            cyc.append(str(j))
            j = p[j]
        parts.append("(" + "".join(cyc) + ")")
    return "".join(parts) or "e"


def permutation_group(name, perms) -> FiniteGroup:
    perms = sorted(set(tuple(p) for p in perms))
    index = {p: i for i, p in enumerate(perms)}
    if perms[0] != tuple(range(len(perms[0]))):
        raise GroupAxiomError("identity permutation missing")
    try:
        table = [[index[_compose(p, q)] for q in perms] for p in perms]
    except KeyError:
        raise GroupAxiomError("permutation set is not closed under composition") from None
    return make_group(name, table, [cycle_label(p) for p in perms], perms=tuple(perms))


def cyclic(n) -> FiniteGroup:
    r = np.arange(n)
    return make_group(f"Z{n}", (r[:, None] + r[None, :]) % n)


def symmetric(n) -> FiniteGroup:
    return permutation_group(f"S{n}", itertools.permutations(range(n)))


def alternating(n) -> FiniteGroup:
    return permutation_group(f"A{n}", (p for p in itertools.permutations(range(n)) if perm_sign(p) == 1))


def dihedral(n) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n; element r^k s^e has id k + n*e."""
    def mul(x, y):
        (a, e), (b, f) = divmod(x, n)[::-1], divmod(y, n)[::-1]
        k = (a + (b if e == 0 else -b)) % n
        return k + n * ((e + f) % 2)

    table = [[mul(x, y) for y in range(2 * n)] for x in range(2 * n)]
    labels = []
    for x in range(2 * n):
        k, e = x % n, x // n
        rot = "" if k == 0 else ("r" if k == 1 else f"r{k}")
        labels.append((rot + ("s" if e else "")) or "e")
    return make_group(f"D{n}", table, labels)


_QUAT_UNITS = [(1, 0, 0, 0), (-1, 0, 0, 0), (0, 1, 0, 0), (0, -1, 0, 0),
               (0, 0, 1, 0), (0, 0, -1, 0), (0, 0, 0, 1), (0, 0, 0, -1)]
_QUAT_LABELS = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]


def _hamilton(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2)


def quaternion() -> FiniteGroup:
    index = {u: i for i, u in enumerate(_QUAT_UNITS)}
    table = [[index[_hamilton(p, q)] for q in _QUAT_UNITS] for p in _QUAT_UNITS]
    return make_group("Q8", table, _QUAT_LABELS)


def direct_product(g1: FiniteGroup, g2: FiniteGroup) -> FiniteGroup:
    """Componentwise product; the pair (a, b) gets id a*|g2| + b."""
    n1, n2 = g1.order, g2.order
    c = g1.cayley[:, None, :, None] * n2 + g2.cayley[None, :, None, :]
    labels = [f"({x},{y})" for x in g1.labels for y in g2.labels]
    return make_group(f"{g1.name}×{g2.name}", c.reshape(n1 * n2, n1 * n2), labels)


_CATALOG = [
    (re.compile(r"Z(\d+)"), lambda n: cyclic(n), lambda n: n >= 1),
    (re.compile(r"S(\d+)"), lambda n: symmetric(n), lambda n: 1 <= n <= 6),
    (re.compile(r"A(\d+)"), lambda n: alternating(n), lambda n: 1 <= n <= 6),
    (re.compile(r"D(\d+)"), lambda n: dihedral(n), lambda n: n >= 3),
]

_cache: dict[str, FiniteGroup] = {}


def split_product_name(name) -> list[str]:
    return [p.strip() for p in re.split(r"[×*]|(?<=\d)x(?=[A-Z])", name) if p.strip()]


def catalog_group(name) -> FiniteGroup:
    name = name.strip()
    if name in _cache:
        return _cache[name]
    parts = split_product_name(name)
    if len(parts) > 1:
        g = catalog_group(parts[0])
        for p in parts[1:]:
            g = direct_product(g, catalog_group(p))
    elif name == "Q8":
        g = quaternion()
    else:
        for pat, build, ok in _CATALOG:
            m = pat.fullmatch(name)
            if m and ok(int(m.group(1))):
                g = build(int(m.group(1)))
                break
        else:
            raise UnknownGroup(f"unknown group name {name!r}")
    if g.order > MAX_CATALOG_ORDER:
        raise UnknownGroup(f"{name}: order {g.order} exceeds catalog limit {MAX_CATALOG_ORDER}")
    _cache[name] = g
    _cache[g.name] = g
    return g


def load_group(source) -> FiniteGroup:
    """Catalog name (``Z4``, ``S3``, ``S3×Z2`` ...) or group-file text."""
    if "\n" in source or source.lstrip().startswith("group"):
        return parse_group_file(source)
    return catalog_group(source)


# ---------------------------------------------------------------- group files


def parse_group_file(text, name="custom") -> FiniteGroup:
    lines = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((no, line))
    if not lines or lines[0][1] != "group v1":
        raise ParseError("expected header 'group v1'", lines[0][0] if lines else 1)
    if len(lines) < 2 or not lines[1][1].startswith("order"):
        raise ParseError("expected 'order <n>'", lines[1][0] if len(lines) > 1 else None)
    no, line = lines[1]
    try:
        n = int(line.split()[1])
    except (IndexError, ValueError):
        raise ParseError("bad order line", no) from None
    rest = lines[2:]
    labels = None
    if rest and rest[0][1].startswith("labels"):
        no, line = rest[0]
        labels = line.split()[1:]
        if len(labels) != n:
            raise ParseError(f"expected {n} labels", no)
        rest = rest[1:]
    if len(rest) != n:
        raise ParseError(f"expected {n} table rows, got {len(rest)}", rest[-1][0] if rest else None)
    table = []
    for no, line in rest:
        try:
            row = [int(t) for t in line.split()]
        except ValueError:
            raise ParseError("non-integer table entry", no) from None
        if len(row) != n:
            raise ParseError(f"row has {len(row)} entries, expected {n}", no)
        table.append(row)
    return make_group(name, table, labels)


def serialize_group(g: FiniteGroup) -> str:
    out = ["group v1", f"order {g.order}", "labels " + " ".join(g.labels)]
    out += [" ".join(str(int(x)) for x in row) for row in g.cayley]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- subgroups


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: FiniteGroup
    members: tuple
    normal: bool

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return x in self._set

    @property
    def _set(self):
        return frozenset(self.members)


def is_normal(g: FiniteGroup, members) -> bool:
    mem = np.asarray(sorted(members))
    for x in range(g.order):
        conj = g.cayley[g.cayley[x, mem], g.inverse[x]]
        if not np.array_equal(np.sort(conj), mem):
            return False
    return True


def subgroup_closure(g: FiniteGroup, gens) -> Subgroup:
    gens = [int(s) for s in gens]
    seen = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = int(g.cayley[x, s])
            if y not in seen:
                seen.add(y)
                queue.append(y)
    members = tuple(sorted(seen))
    return Subgroup(g, members, is_normal(g, members))


def commutator_subgroup(g: FiniteGroup) -> Subgroup:
    comms = {g.commutator(a, b) for a in range(g.order) for b in range(g.order)}
    sub = subgroup_closure(g, sorted(comms))
    assert sub.normal, "commutator subgroup must be normal"
    return sub


def conjugacy_classes(g: FiniteGroup) -> list[list[int]]:
    assigned = np.full(g.order, -1)
    classes = []
    for x in range(g.order):
        if assigned[x] >= 0:
            continue
        orbit = sorted({g.conjugate(h, x) for h in range(g.order)})
        assigned[orbit] = len(classes)
        classes.append(orbit)
    return classes


# ---------------------------------------------------------------- quotients


@dataclass(frozen=True, eq=False)
class QuotientGroup:
    base: FiniteGroup
    normal: Subgroup
    cosets: tuple
    reps: np.ndarray
    projection: np.ndarray
    table: FiniteGroup

    @property
    def order(self):
        return self.table.order

    def coset_of(self, x) -> int:
        return int(self.projection[x])


def quotient(g: FiniteGroup, n: Subgroup) -> QuotientGroup:
    members = np.asarray(n.members)
    if not is_normal(g, members):
        raise NotNormal(f"subgroup of size {len(members)} is not normal in {g.name}")
    proj = np.full(g.order, -1, dtype=np.int64)
    cosets = []
    for a in range(g.order):
        if proj[a] >= 0:
            continue
        coset = np.sort(g.cayley[a, members])
        proj[coset] = len(cosets)
        cosets.append(tuple(int(x) for x in coset))
    reps = np.array([c[0] for c in cosets])
    table = proj[g.cayley[reps[:, None], reps[None, :]]]
    # product of cosets must not depend on the representatives
    if not np.array_equal(proj[g.cayley], table[proj[:, None], proj[None, :]]):
        raise NotNormal("coset product depends on representatives")
    if len(cosets) * len(members) != g.order:
        raise GroupAxiomError("coset partition inconsistent with Lagrange")
    labels = [f"[{g.labels[r]}]" for r in reps]
    qname = f"{g.name}/N{len(members)}"
    return QuotientGroup(g, n, tuple(cosets), _frozen(reps), _frozen(proj),
                         make_group(qname, table, labels))


# ---------------------------------------------------------------- abelian structure


@dataclass(frozen=True, eq=False)
class AbelianDecomposition:
    """Invariant factors d1 | d2 | ... with an explicit coordinate isomorphism."""
    group: FiniteGroup
    factors: tuple
    generators: tuple
    coords: np.ndarray  # (order, len(factors))

    def element(self, vec) -> int:
        return int(self._lookup[tuple(int(v) % d for v, d in zip(vec, self.factors))])

    @functools.cached_property
    def _lookup(self):
        return {tuple(int(v) for v in row): i for i, row in enumerate(self.coords)}


def _abelian_basis(h: FiniteGroup):
    if h.order == 1:
        return [], []
    orders = [h.element_order(a) for a in range(h.order)]
    d = max(orders)
    g = orders.index(d)
    cyc = subgroup_closure(h, [g])
    if len(cyc) == h.order:
        return [g], [d]
    q = quotient(h, cyc)
    qgens, qfactors = _abelian_basis(q.table)
    log = {h.power(g, k): k for k in range(d)}
    lifted = []
    for qg, e in zip(qgens, qfactors):
        x = int(q.reps[qg])
        t = log[h.power(x, e)]
        if t % e:
            raise GroupAxiomError("lifting failed: maximal-order element assumption violated")
        lifted.append(h.mul(x, h.power(g, -(t // e))))
    return [g] + lifted, [d] + qfactors


def abelian_decomposition(h: FiniteGroup) -> AbelianDecomposition:
    if not h.is_abelian():
        raise NonAbelian(f"{h.name} is not abelian")
    gens, factors = _abelian_basis(h)
    gens, factors = gens[::-1], factors[::-1]
    coords = np.full((h.order, len(factors)), -1, dtype=np.int64)
    for vec in itertools.product(*(range(d) for d in factors)):
        x = 0
        for s, v in zip(gens, vec):
            x = h.mul(x, h.power(s, v))
        if factors and coords[x, 0] >= 0:
            raise GroupAxiomError("coordinate map is not injective")
        coords[x] = vec
    if factors and (coords < 0).any():
        raise GroupAxiomError("coordinate map is not surjective")
    if math.prod(factors) != h.order:
        raise GroupAxiomError("invariant factors do not multiply to the order")
    f = np.asarray(factors, dtype=np.int64)
    if factors:
        lhs = coords[h.cayley]
        rhs = (coords[:, None, :] + coords[None, :, :]) % f
        if not np.array_equal(lhs, rhs):
            raise GroupAxiomError("coordinates are not additive")
    return AbelianDecomposition(h, tuple(int(d) for d in factors), tuple(gens), _frozen(coords))
