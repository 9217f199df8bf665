"""Unitary irreducible representations of catalog groups.

Irreps are built from explicit generator images and extended along the
Cayley graph; every IrrepSet is then checked against the orthogonality
relations, so a wrong generator matrix fails loudly instead of silently.
"""
from __future__ import annotations

import itertools
import math
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (HypothesisViolated, InvariantFailure, NoPartner, NonIntegerMultiplicity,
                     Unsupported)
from .group import (FiniteGroup, abelian_decomposition, catalog_group, conjugacy_classes,
                    perm_sign, split_product_name)

TOL = 1e-9
INT_TOL = 1e-6


def a5_enabled() -> bool:
    """A5's irreps sit behind the ``NALIN_A5`` switch (on unless set to 0)."""
    return os.environ.get("NALIN_A5", "1").strip().lower() not in ("0", "false", "no", "off")


@dataclass(frozen=True, eq=False)
class Irrep:
    id: int
    name: str
    matrices: np.ndarray  # (order, dim, dim) complex

    @property
    def dim(self) -> int:
        return int(self.matrices.shape[1])

    @property
    def is_trivial(self) -> bool:
        return self.dim == 1 and bool(np.allclose(self.matrices, 1.0))

    def __call__(self, g):
        return self.matrices[g]

    def __repr__(self):
        return f"Irrep({self.id}, {self.name!r}, dim={self.dim})"


@dataclass(frozen=True)
class Character:
    values: np.ndarray

    def __call__(self, g):
        return self.values[g]

    def inner(self, other: "Character") -> complex:
        return complex(np.mean(self.values * np.conj(other.values)))


def character_of(r: Irrep) -> Character:
    return Character(np.trace(r.matrices, axis1=1, axis2=2))


@dataclass(frozen=True, eq=False)
class IrrepSet:
    group: FiniteGroup
    irreps: tuple
    char_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "char_table",
                           np.array([np.trace(r.matrices, axis1=1, axis2=2) for r in self.irreps]))

    def __len__(self):
        return len(self.irreps)

    def __getitem__(self, i) -> Irrep:
        return self.irreps[i]

    def __iter__(self):
        return iter(self.irreps)

    @property
    def dims(self) -> list[int]:
        return [r.dim for r in self.irreps]

    @property
    def min_nontrivial_dim(self) -> int:
        """D: smallest dimension of a non-trivial irrep (1 for the trivial group by convention)."""
        rest = [r.dim for r in self.irreps[1:]]
        return min(rest) if rest else 1

    def by_name(self, name) -> Irrep:
        for r in self.irreps:
            if r.name == name:
                return r
        raise KeyError(name)

    def validate(self, strict=True) -> dict:
        """Residuals of every structural identity; raise InvariantFailure if strict and any fails."""
        g = self.group
        n = g.order
        res = {}
        worst_unit = worst_hom = worst_id = worst_sum = 0.0
        for r in self.irreps:
            m = r.matrices
            d = r.dim
            eye = np.eye(d)
            worst_id = max(worst_id, float(np.abs(m[0] - eye).max()))
            uu = np.einsum("gij,gkj->gik", m, np.conj(m))
            worst_unit = max(worst_unit, float(np.abs(uu - eye).max()))
            prod = np.einsum("aij,bjk->abik", m, m)
            worst_hom = max(worst_hom, float(np.abs(prod - m[g.cayley]).max()))
            if r.id != 0:
                worst_sum = max(worst_sum, float(np.abs(m.sum(axis=0)).max()))
        res["identity"] = worst_id
        res["unitarity"] = worst_unit
        res["homomorphism"] = worst_hom
        res["sum_zero"] = worst_sum
        x = self.char_table
        gram = x @ np.conj(x).T / n
        res["character_orthogonality"] = float(np.abs(gram - np.eye(len(self))).max())
        res["irreducibility"] = float(np.abs(np.diag(gram) - 1).max())
        worst_bil = 0.0
        for r in self.irreps:
            for t in self.irreps:
                # <r_ij | t_kl>_G = E_g r(g)_ij t(g^-1)_kl
                form = np.einsum("gij,gkl->ijkl", r.matrices, t.matrices[g.inverse]) / n
                if r.id == t.id:
                    d = r.dim
                    want = np.einsum("il,jk->ijkl", np.eye(d), np.eye(d)) / d
                else:
                    want = 0.0
                worst_bil = max(worst_bil, float(np.abs(form - want).max()))
        res["bilinear_orthogonality"] = worst_bil
        classes = conjugacy_classes(g)
        res["class_function"] = max(float(np.abs(x[:, c] - x[:, c[:1]]).max()) for c in classes)
        res["sum_dim_squares"] = sum(d * d for d in self.dims)
        res["num_classes"] = len(classes)
        res["num_irreps"] = len(self)
        if strict:
            problems = [k for k in ("identity", "unitarity", "homomorphism", "sum_zero",
                                    "character_orthogonality", "bilinear_orthogonality",
                                    "class_function") if res[k] > TOL]
            if res["irreducibility"] > INT_TOL:
                problems.append("irreducibility")
            if res["sum_dim_squares"] != n:
                problems.append("sum_dim_squares")
            if res["num_classes"] != res["num_irreps"]:
                problems.append("irrep count != class count")
            if not self.irreps[0].is_trivial:
                problems.append("irrep 0 is not trivial")
            if problems:
                raise InvariantFailure(f"{g.name}: irrep invariants failed: {', '.join(problems)}")
        return res


# ---------------------------------------------------------------- construction helpers


def extend_generator_images(g: FiniteGroup, gens, images) -> np.ndarray:
    """BFS over the Cayley graph: rho(x s) = rho(x) rho(s)."""
    images = [np.asarray(m, dtype=complex) for m in images]
    d = images[0].shape[0]
    mats = np.zeros((g.order, d, d), dtype=complex)
    known = np.zeros(g.order, dtype=bool)
    mats[0] = np.eye(d)
    known[0] = True
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for s, img in zip(gens, images):
            y = int(g.cayley[x, s])
            if not known[y]:
                mats[y] = mats[x] @ img
                known[y] = True
                queue.append(y)
    if not known.all():
        raise InvariantFailure(f"{g.name}: generators {list(gens)} do not generate the group")
    return mats


def _sum_zero_basis(k):
    # orthonormal basis of {v in R^k : sum v = 0}, as columns
    proj = np.eye(k) - np.full((k, k), 1.0 / k)
    q, _ = np.linalg.qr(proj[:, : k - 1])
    return q


def perm_matrix(p) -> np.ndarray:
    k = len(p)
    m = np.zeros((k, k))
    m[list(p), list(range(k))] = 1.0
    return m


def standard_image(p) -> np.ndarray:
    """Permutation p acting on the sum-zero subspace (the standard rep of S_k)."""
    q = _sum_zero_basis(len(p))
    return q.T @ perm_matrix(p) @ q


_PAIRINGS = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]


def _pairing_action(p):
    """Permutation of the three pairings of {0,1,2,3} induced by p (the map S4 -> S3)."""
    def canon(pr):
        return tuple(sorted(tuple(sorted(x)) for x in pr))

    index = {canon(pr): i for i, pr in enumerate(_PAIRINGS)}
    return tuple(index[canon(((p[a], p[b]), (p[c], p[d])))] for (a, b), (c, d) in _PAIRINGS)


def _icosahedral_images(root5_sign):
    """Generator images for a=(01)(23), b=(124) in a 3-dim irrep of A5.

    a is the half-turn about the axis (1, phi^2, phi), b cycles coordinates;
    phi -> its Galois conjugate gives the other 3-dim irrep.
    """
    phi = (1 + root5_sign * math.sqrt(5)) / 2
    v = np.array([1.0, phi * phi, phi])
    a = 2 * np.outer(v, v) / (v @ v) - np.eye(3)
    b = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    return a, b


def _elem(g: FiniteGroup, perm) -> int:
    return g.perms.index(tuple(perm))


def _build_s3(g):
    gens = [_elem(g, (1, 0, 2)), _elem(g, (1, 2, 0))]
    ps = [g.perms[s] for s in gens]
    return gens, [
        ("trivial", [np.eye(1)] * 2),
        ("sign", [np.eye(1) * perm_sign(p) for p in ps]),
        ("std", [standard_image(p) for p in ps]),
    ]


def _build_s4(g):
    gens = [_elem(g, (1, 0, 2, 3)), _elem(g, (1, 2, 3, 0))]
    ps = [g.perms[s] for s in gens]
    return gens, [
        ("trivial", [np.eye(1)] * 2),
        ("sign", [np.eye(1) * perm_sign(p) for p in ps]),
        ("2d", [standard_image(_pairing_action(p)) for p in ps]),
        ("std", [standard_image(p) for p in ps]),
        ("std⊗sign", [standard_image(p) * perm_sign(p) for p in ps]),
    ]


def _build_a4(g):
    gens = [_elem(g, (1, 2, 0, 3)), _elem(g, (1, 0, 3, 2))]
    ps = [g.perms[s] for s in gens]
    w = np.exp(2j * np.pi / 3)
    z3 = {(0, 1, 2): 1.0, (1, 2, 0): w, (2, 0, 1): w * w}
    return gens, [
        ("trivial", [np.eye(1)] * 2),
        ("omega", [np.eye(1) * z3[_pairing_action(p)] for p in ps]),
        ("omega2", [np.eye(1) * np.conj(z3[_pairing_action(p)]) for p in ps]),
        ("std", [standard_image(p) for p in ps]),
    ]


def _sylow5_action(g, s):
    fives = [x for x in range(g.order) if g.element_order(x) == 5]
    subs = []
    for x in fives:
        sub = frozenset(g.power(x, k) for k in range(5))
        if sub not in subs:
            subs.append(sub)
    subs.sort(key=lambda h: sorted(h))
    index = {h: i for i, h in enumerate(subs)}
    return tuple(index[frozenset(g.conjugate(s, x) for x in h)] for h in subs)


def _build_a5(g):
    if not a5_enabled():
        raise Unsupported("A5 irreps are gated off (set NALIN_A5=1 to enable)")
    gens = [_elem(g, (1, 0, 3, 2, 4)), _elem(g, (0, 2, 4, 3, 1))]
    ps = [g.perms[s] for s in gens]
    return gens, [
        ("trivial", [np.eye(1)] * 2),
        ("ico+", list(_icosahedral_images(+1))),
        ("ico-", list(_icosahedral_images(-1))),
        ("std", [standard_image(p) for p in ps]),
        ("sylow5", [standard_image(_sylow5_action(g, s)) for s in gens]),
    ]


def _build_dihedral(g, n):
    gens = [1, n]  # r, s
    out = [("trivial", [np.eye(1)] * 2), ("s-sign", [np.eye(1), -np.eye(1)])]
    if n % 2 == 0:
        out += [("r-sign", [-np.eye(1), np.eye(1)]), ("rs-sign", [-np.eye(1), -np.eye(1)])]
    refl = np.diag([1.0, -1.0])
    for h in range(1, (n - 1) // 2 + 1):
        t = 2 * np.pi * h / n
        rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        out.append((f"rot{h}", [rot, refl]))
    return gens, out


def _build_q8(g):
    gens = [2, 4]  # i, j
    out = [("trivial", [np.eye(1)] * 2)]
    for a, b in [(1, -1), (-1, 1), (-1, -1)]:
        out.append((f"chi{a:+d}{b:+d}", [np.eye(1) * a, np.eye(1) * b]))
    out.append(("quat", [np.diag([1j, -1j]), np.array([[0, 1], [-1, 0]], dtype=complex)]))
    return gens, out


def _builder_for(name):
    if name == "S3":
        return _build_s3
    if name == "S4":
        return _build_s4
    if name == "A4":
        return _build_a4
    if name == "A5":
        return _build_a5
    if name == "Q8":
        return _build_q8
    if name.startswith("D") and name[1:].isdigit() and int(name[1:]) >= 3:
        n = int(name[1:])
        return lambda g: _build_dihedral(g, n)
    return None


def abelian_irreps(g: FiniteGroup) -> list[Irrep]:
    dec = abelian_decomposition(g)
    f = np.asarray(dec.factors, dtype=float)
    out = []
    for i, k in enumerate(itertools.product(*(range(d) for d in dec.factors))):
        if f.size:
            phase = (dec.coords * np.asarray(k)[None, :] / f[None, :]).sum(axis=1)
        else:
            phase = np.zeros(g.order)
        chi = np.exp(2j * np.pi * phase)
        out.append(Irrep(i, "chi" + "".join(map(str, k)), chi.reshape(-1, 1, 1)))
    return out


def _kron_irreps(s1: IrrepSet, s2: IrrepSet) -> list[Irrep]:
    n2 = s2.group.order
    out = []
    for r in s1.irreps:
        for t in s2.irreps:
            m = np.einsum("aij,bkl->abikjl", r.matrices, t.matrices)
            d = r.dim * t.dim
            m = m.reshape(s1.group.order * n2, d, d)
            out.append(Irrep(len(out), f"{r.name}⊗{t.name}", m))
    return out


_irrep_cache: dict = {}


def _same_table(g, h):
    return g.order == h.order and np.array_equal(g.cayley, h.cayley)


def irreps_of(g: FiniteGroup, generators=None, images=None, names=None, validate=True) -> IrrepSet:
    """Complete unitary irreps of ``g``.

    ``generators``/``images`` let the caller supply a non-catalog group: a list of
    generator element ids and, per irrep, a list of matching generator matrices.
    """
    if generators is not None:
        if images is None:
            raise ValueError("images are required with generators")
        irreps = []
        for i, imgs in enumerate(images):
            nm = names[i] if names else f"rho{i}"
            irreps.append(Irrep(i, nm, extend_generator_images(g, generators, imgs)))
        s = IrrepSet(g, tuple(irreps))
        if validate:
            s.validate()
        return s

    gate = g.name == "A5" or "A5" in split_product_name(g.name)
    if gate and not a5_enabled():
        raise Unsupported("A5 irreps are gated off (set NALIN_A5=1 to enable)")
    key = (g.name, g.order, g.cayley.tobytes())
    if key in _irrep_cache:
        return _irrep_cache[key]

    if g.is_abelian():
        irreps = abelian_irreps(g)
    else:
        parts = split_product_name(g.name)
        try:
            reference = catalog_group(g.name)
        except Exception:
            reference = None
        if reference is None or not _same_table(g, reference):
            raise Unsupported(f"{g.name}: no irrep recipe; supply generator images")
        if len(parts) > 1:
            acc = irreps_of(catalog_group(parts[0]))
            name = parts[0]
            for p in parts[1:]:
                name = f"{name}×{p}"
                acc = IrrepSet(catalog_group(name),
                               tuple(_kron_irreps(acc, irreps_of(catalog_group(p)))))
            irreps = list(acc.irreps)
        else:
            build = _builder_for(g.name)
            if build is None:
                raise Unsupported(f"{g.name}: no irrep recipe; supply generator images")
            gens, recipe = build(g)
            irreps = [Irrep(i, nm, extend_generator_images(g, gens, imgs))
                      for i, (nm, imgs) in enumerate(recipe)]
    s = IrrepSet(g, tuple(irreps))
    if validate:
        s.validate()
    _irrep_cache[key] = s
    return s


# ---------------------------------------------------------------- tensor products


@dataclass(frozen=True)
class TensorDecomposition:
    factors: tuple
    parts: tuple  # ((irrep id, multiplicity), ...)
    dim: int

    def multiplicity(self, irrep_id) -> int:
        return dict(self.parts).get(irrep_id, 0)


def tensor_decompose(s: IrrepSet, factors) -> TensorDecomposition:
    factors = tuple(int(f) for f in factors)
    if not factors:
        raise ValueError("factors must be non-empty")
    chi = np.ones(s.group.order, dtype=complex)
    for f in factors:
        chi = chi * s.char_table[f]
    raw = (np.conj(s.char_table) @ chi) / s.group.order
    mult = np.rint(raw.real)
    resid = float(np.abs(raw - mult).max())
    if resid > INT_TOL:
        raise NonIntegerMultiplicity(f"multiplicity residual {resid:.3g} for factors {factors}")
    dims = s.dims
    total = math.prod(dims[f] for f in factors)
    parts = tuple((i, int(m)) for i, m in enumerate(mult) if m > 0)
    if sum(m * dims[i] for i, m in parts) != total:
        raise InvariantFailure(f"dimensions do not balance for factors {factors}")
    return TensorDecomposition(factors, parts, total)


@dataclass(frozen=True)
class MultiplicityReport:
    factors: tuple
    max_mult: int
    bound: float
    ok: bool


def check_multiplicity_bound(s: IrrepSet, factors) -> MultiplicityReport:
    """Every multiplicity in the tensor product is at most (1 - 1/|G|) times its dimension."""
    dec = tensor_decompose(s, factors)
    if dec.dim < 2:
        raise HypothesisViolated("tensor product has dimension 1")
    bound = (1 - 1 / s.group.order) * dec.dim
    top = max(m for _, m in dec.parts)
    return MultiplicityReport(dec.factors, top, bound, top <= bound)


def dim1_pairing(s: IrrepSet) -> dict[int, int]:
    ones = [r.id for r in s.irreps if r.dim == 1]
    x = s.char_table
    pairing = {}
    for i in ones:
        for j in ones:
            if np.abs(x[i] - np.conj(x[j])).max() <= TOL:
                pairing[i] = j
                break
        else:
            raise NoPartner(f"no conjugate partner for irrep {i}")
    for i, j in pairing.items():
        if pairing[j] != i:
            raise InvariantFailure("conjugate pairing is not an involution")
    return pairing


# ---------------------------------------------------------------- projection subgroups


@dataclass(frozen=True)
class ProjectionReport:
    multiplicities: dict  # beta (tuple over [L]) -> multiplicity
    block_dims: tuple
    dim_alpha: int
    hypothesis: bool
    dichotomy_ok: bool
    violations: tuple


def restrict_through_projection(s: IrrepSet, alpha, pi, c, eps0) -> ProjectionReport:
    """Decompose alpha in Irrep(G^R) over the diagonal copy {x o pi : x in G^L} of G^L.

    Block l is the tensor of alpha's components on pi^-1(l). The report checks:
    if at least ``c`` blocks have dimension >= 2 then every constituent beta has
    dim(beta) >= c or multiplicity <= eps0^2 dim(alpha).
    """
    alpha = tuple(int(a) for a in alpha)
    pi = tuple(int(p) for p in pi)
    if len(alpha) != len(pi):
        raise ValueError("alpha and pi must both have length R")
    L = max(pi) + 1
    if set(pi) != set(range(L)):
        raise ValueError("pi is not surjective onto [L]")
    dims = s.dims
    blocks = []
    block_dims = []
    for l in range(L):
        fac = [a for a, p in zip(alpha, pi) if p == l]
        dec = tensor_decompose(s, fac)
        blocks.append(dec.parts)
        block_dims.append(dec.dim)
    dim_alpha = math.prod(dims[a] for a in alpha)
    mults = {}
    for combo in itertools.product(*blocks):
        beta = tuple(i for i, _ in combo)
        mults[beta] = math.prod(m for _, m in combo)
    hyp = sum(d >= 2 for d in block_dims) >= c
    violations = []
    if hyp:
        for beta, m in mults.items():
            dbeta = math.prod(dims[b] for b in beta)
            if not (dbeta >= c or m <= eps0 * eps0 * dim_alpha + 1e-12):
                violations.append(beta)
    return ProjectionReport(mults, tuple(block_dims), dim_alpha, hyp, not violations, tuple(violations))
