"""Fourier analysis on G^n for finite groups given as Cayley tables.

Tables over G^n are flat vectors in mixed-radix order: coordinate 0 is the most
significant digit, so index(x) = sum_t x_t * |G|^(n-1-t).

The transform is f^(alpha) = E_x f(x) alpha(x) with alpha = rho_1 (x) ... (x) rho_n
(Kronecker product, row index (j_1, ..., j_n) in row-major order).  Inversion
reads f(x) = sum_alpha dim(alpha) <f^(alpha), alpha(x)> with <A, B> = tr(A B^*).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .errors import (BudgetExceeded, DimOne, MeanNotZero, NotFolded, ParseError,
                     ShapeMismatch, Unsupported)
from .group import FiniteGroup, load_group
from .reps import TOL, Irrep, IrrepSet, irreps_of

MAX_TABLE = 10**5
MEAN_TOL = 1e-10


def _check_budget(order, n, budget=MAX_TABLE):
    size = order ** n
    if size > budget:
        raise BudgetExceeded(f"|G|^n = {order}^{n} = {size} exceeds the cap {budget}")
    return size


# ---------------------------------------------------------------- tables


@dataclass(frozen=True, eq=False)
class ScalarFunctionTable:
    group: FiniteGroup
    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.complex128)
        if v.shape != (self.group.order ** self.n,):
            raise ShapeMismatch(f"expected {self.group.order ** self.n} values, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def size(self):
        return self.values.size

    def mean(self) -> complex:
        return complex(self.values.mean())

    def norm(self) -> float:
        """L2 norm with respect to the uniform measure: sqrt(E|f|^2)."""
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def inner(self, other: "ScalarFunctionTable") -> complex:
        """Hermitian inner product E f conj(g)."""
        _same_shape(self, other)
        return complex(np.mean(self.values * np.conj(other.values)))

    def __add__(self, other):
        _same_shape(self, other)
        return ScalarFunctionTable(self.group, self.n, self.values + other.values)

    def __sub__(self, other):
        _same_shape(self, other)
        return ScalarFunctionTable(self.group, self.n, self.values - other.values)

    def scale(self, c):
        return ScalarFunctionTable(self.group, self.n, self.values * c)


@dataclass(frozen=True, eq=False)
class GroupFunctionTable:
    """f: G^n -> G.  ``folded`` is verified on construction when the table fits the cap."""

    group: FiniteGroup
    n: int
    values: np.ndarray
    folded: bool = False

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.int64)
        if v.shape != (self.group.order ** self.n,):
            raise ShapeMismatch(f"expected {self.group.order ** self.n} values, got {v.shape}")
        if v.size and (v.min() < 0 or v.max() >= self.group.order):
            raise ShapeMismatch("group-valued table has out-of-range element ids")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.folded and v.size <= MAX_TABLE and not is_folded(self.group, self.n, v):
            raise NotFolded("table violates f(c.x) = c f(x)")

    @classmethod
    def detect(cls, group, n, values):
        """Build the table and set ``folded`` from an exhaustive check."""
        values = np.asarray(values, dtype=np.int64)
        return cls(group, n, values, folded=is_folded(group, n, values))


def _same_shape(f, g):
    if f.group is not g.group and not np.array_equal(f.group.cayley, g.group.cayley):
        raise ShapeMismatch("tables live on different groups")
    if f.n != g.n:
        raise ShapeMismatch(f"tables have n = {f.n} and n = {g.n}")


def index_of(order, x) -> int:
    idx = 0
    for v in x:
        idx = idx * order + int(v)
    return idx


def tuple_of(order, n, idx) -> tuple:
    return tuple(int(v) for v in K.digits(order, n, [idx])[0])


def left_translate_index(group: FiniteGroup, n, c) -> np.ndarray:
    """perm[idx(x)] = idx(c.x) where (c.x)_i = c x_i."""
    d = K.digits(group.order, n)
    return group.cayley[c][d] @ K.radix(group.order, n)


def is_folded(group: FiniteGroup, n, values) -> bool:
    values = np.asarray(values)
    for c in range(group.order):
        if not np.array_equal(values[left_translate_index(group, n, c)], group.cayley[c][values]):
            return False
    return True


# ---------------------------------------------------------------- orbit representatives


def orbit_representative(group: FiniteGroup, x) -> tuple[int, tuple]:
    """(x_1, x_1^-1 . x): the orbit of x under diagonal left multiplication has a unique
    member whose first coordinate is the identity, and it is the lexicographically
    smallest one since the identity has id 0."""
    c = int(x[0])
    ci = int(group.inverse[c])
    return c, tuple(int(group.cayley[ci, v]) for v in x)


def orbit_rep_indices(group: FiniteGroup, n) -> tuple[np.ndarray, np.ndarray]:
    """For every index of G^n: (first coordinate, index of the representative within G^(n-1)).

    The representative has first coordinate 0, so its trailing n-1 digits index it.
    """
    d = K.digits(group.order, n)
    first = d[:, 0].copy()
    shifted = group.cayley[group.inverse[first][:, None], d[:, 1:]]
    rep = shifted @ K.radix(group.order, n - 1) if n > 1 else np.zeros(len(first), np.int64)
    return first, rep


def folded_from_representatives(group: FiniteGroup, n, rep_values) -> GroupFunctionTable:
    """Extend values on the |G|^(n-1) representatives by f(x) = x_1 f(x_1^-1 . x)."""
    rep_values = np.asarray(rep_values, dtype=np.int64)
    if rep_values.shape != (group.order ** (n - 1),):
        raise ShapeMismatch(f"expected {group.order ** (n - 1)} representative values")
    first, rep = orbit_rep_indices(group, n)
    vals = group.cayley[first, rep_values[rep]]
    return GroupFunctionTable(group, n, vals, folded=True)


# ---------------------------------------------------------------- irrep indices


@dataclass(frozen=True)
class IrrepIndex:
    components: tuple
    dim: int
    weight: int
    w2: int

    @classmethod
    def of(cls, s: IrrepSet, components) -> "IrrepIndex":
        comps = tuple(int(c) for c in components)
        dims = [s[c].dim for c in comps]
        return cls(comps, int(np.prod(dims)) if dims else 1,
                   sum(1 for c in comps if not s[c].is_trivial),
                   sum(1 for d in dims if d >= 2))

    def __iter__(self):
        return iter(self.components)


def all_indices(s: IrrepSet, n) -> list[IrrepIndex]:
    return [IrrepIndex.of(s, c) for c in itertools.product(range(len(s)), repeat=n)]


def alpha_matrix(s: IrrepSet, alpha, x) -> np.ndarray:
    """alpha(x) = kron of rho_i(x_i)."""
    m = np.ones((1, 1), dtype=np.complex128)
    for c, v in zip(alpha, x):
        m = np.kron(m, s[c].matrices[v])
    return m


def hs_inner(a, b) -> complex:
    """<A, B> = tr(A B^*)."""
    return complex(np.sum(np.asarray(a) * np.conj(np.asarray(b))))


def hs_norm(a) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(a)) ** 2)))


def bilinear_form(f1, f2, group: FiniteGroup) -> complex:
    """Symmetric form <f1 | f2>_G = (1/|G|) sum_g f1(g) f2(g^-1) on functions G -> C."""
    f1 = np.asarray(f1)
    f2 = np.asarray(f2)
    return complex(np.mean(f1 * f2[group.inverse]))


@lru_cache(maxsize=64)
def _basis(s: IrrepSet):
    """F[(rho, j, k), g] = rho(g)_jk stacked over the irreps, plus the slot layout."""
    rows, slots = [], []
    for r in s:
        d = r.dim
        rows.append(r.matrices.reshape(s.group.order, d * d).T)
        slots.append(d * d)
    basis = np.vstack(rows)
    offsets = np.concatenate([[0], np.cumsum(slots)])
    weights = np.concatenate([[r.dim] * (r.dim * r.dim) for r in s]).astype(float)
    return basis, offsets, weights


def _apply_axes(tensor, mat):
    """Contract every axis of ``tensor`` with ``mat`` (new axis replaces old, same order)."""
    for axis in range(tensor.ndim):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=([1], [axis])), 0, axis)
    return tensor


# ---------------------------------------------------------------- Fourier tables


@dataclass(frozen=True, eq=False)
class FourierTable:
    irreps: IrrepSet
    n: int
    coeffs: dict = field(repr=False)

    def __getitem__(self, alpha):
        if not isinstance(alpha, IrrepIndex):
            alpha = IrrepIndex.of(self.irreps, alpha)
        return self.coeffs[alpha]

    def __iter__(self):
        return iter(self.coeffs.items())

    def parseval_rhs(self) -> float:
        return float(sum(a.dim * hs_norm(m) ** 2 for a, m in self.coeffs.items()))

    def weight_mass(self, pred) -> float:
        """sum of dim(alpha) ||f^(alpha)||^2 over alpha with pred(alpha)."""
        return float(sum(a.dim * hs_norm(m) ** 2 for a, m in self.coeffs.items() if pred(a)))


def _flat_to_table(s: IrrepSet, n, flat) -> FourierTable:
    _, offsets, _ = _basis(s)
    order = s.group.order
    coeffs = {}
    for comps in itertools.product(range(len(s)), repeat=n):
        dims = [s[c].dim for c in comps]
        sl = tuple(slice(offsets[c], offsets[c + 1]) for c in comps)
        block = flat[sl].reshape([x for d in dims for x in (d, d)])
        perm = [2 * t for t in range(n)] + [2 * t + 1 for t in range(n)]
        dim = int(np.prod(dims))
        coeffs[IrrepIndex.of(s, comps)] = block.transpose(perm).reshape(dim, dim)
    del order
    return FourierTable(s, n, coeffs)


def _table_to_flat(t: FourierTable) -> np.ndarray:
    s, n = t.irreps, t.n
    _, offsets, _ = _basis(s)
    flat = np.zeros((s.group.order,) * n, dtype=np.complex128)
    for alpha, m in t.coeffs.items():
        dims = [s[c].dim for c in alpha]
        perm = [2 * t_ for t_ in range(n)] + [2 * t_ + 1 for t_ in range(n)]
        inv = np.argsort(perm)
        block = np.asarray(m).reshape(dims + dims).transpose(inv)
        sl = tuple(slice(offsets[c], offsets[c + 1]) for c in alpha)
        flat[sl] = block.reshape([d * d for d in dims])
    return flat


def fourier_transform(f: ScalarFunctionTable, s: IrrepSet, budget=MAX_TABLE) -> FourierTable:
    """f^(alpha) for every alpha, by contracting each coordinate with the stacked irrep basis.

    Every coefficient equals the direct sum E_x f(x) alpha(x) (see ``fourier_coefficient``);
    the coordinate-wise contraction just groups the terms of that sum.
    """
    order = f.group.order
    _check_budget(order, f.n, budget)
    basis, _, _ = _basis(s)
    tensor = f.values.reshape((order,) * f.n)
    flat = _apply_axes(tensor, basis) / f.size
    return _flat_to_table(s, f.n, flat)


def fourier_coefficient(f: ScalarFunctionTable, s: IrrepSet, alpha) -> np.ndarray:
    """Single coefficient by direct summation over G^n (independent of the fast path)."""
    alpha = tuple(alpha)
    order = f.group.order
    d = K.digits(order, f.n)
    dim = int(np.prod([s[c].dim for c in alpha]))
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for idx in range(f.size):
        if f.values[idx] != 0:
            acc += f.values[idx] * alpha_matrix(s, alpha, d[idx])
    return acc / f.size


def inverse_transform(t: FourierTable, s: IrrepSet | None = None) -> ScalarFunctionTable:
    s = s or t.irreps
    basis, _, weights = _basis(s)
    inv = (np.conj(basis) * weights[:, None]).T
    vals = _apply_axes(_table_to_flat(t), inv)
    return ScalarFunctionTable(s.group, t.n, vals.reshape(-1))


def inverse_at(t: FourierTable, x) -> complex:
    """f(x) = sum_alpha dim(alpha) <f^(alpha), alpha(x)>, evaluated pointwise."""
    return complex(sum(a.dim * hs_inner(m, alpha_matrix(t.irreps, a, x)) for a, m in t))


def plancherel_rhs(tf: FourierTable, tg: FourierTable) -> complex:
    return complex(sum(a.dim * hs_inner(m, tg.coeffs[a]) for a, m in tf))


# ---------------------------------------------------------------- convolution


def convolve(f: ScalarFunctionTable, g: ScalarFunctionTable, budget=MAX_TABLE) -> ScalarFunctionTable:
    """(f * g)(x) = E_y f(y) g(y^-1 x), summed directly."""
    _same_shape(f, g)
    grp = f.group
    _check_budget(grp.order, f.n, budget)
    vals = K.convolve(grp.cayley, grp.inverse, f.values, g.values, f.n, grp.order)
    return ScalarFunctionTable(grp, f.n, vals)


def convolve_spectral(f: ScalarFunctionTable, g: ScalarFunctionTable, s: IrrepSet) -> ScalarFunctionTable:
    """Convolution through the transform: multiply coefficient matrices, then invert."""
    _same_shape(f, g)
    tf, tg = fourier_transform(f, s), fourier_transform(g, s)
    prod = {a: m @ tg.coeffs[a] for a, m in tf}
    return inverse_transform(FourierTable(s, f.n, prod), s)


@dataclass(frozen=True)
class BnpResult:
    lhs: float
    rhs: float
    ok: bool
    D: int
    note: str = ""


def bnp_check(f: ScalarFunctionTable, g: ScalarFunctionTable, s: IrrepSet) -> BnpResult:
    """||f * g|| <= ||f|| ||g|| / sqrt(D) when f or g has mean zero (n = 1)."""
    _same_shape(f, g)
    if f.n != 1:
        raise ShapeMismatch("the convolution bound is checked on G (n = 1)")
    if abs(f.mean()) > MEAN_TOL and abs(g.mean()) > MEAN_TOL:
        raise MeanNotZero(f"means {abs(f.mean()):.3g} and {abs(g.mean()):.3g}; one must vanish")
    D = s.min_nontrivial_dim
    lhs = convolve(f, g).norm()
    rhs = f.norm() * g.norm() / np.sqrt(D)
    note = "trivial bound" if D == 1 else ""
    return BnpResult(float(lhs), float(rhs), bool(lhs <= rhs + TOL), D, note)


def bnp_check_group(f: ScalarFunctionTable, g: ScalarFunctionTable) -> BnpResult:
    """``bnp_check`` with the group's own irreps; when those are unavailable (e.g. gated off)
    only D = 1, i.e. Cauchy-Schwarz, can be used and the result says "trivial bound"."""
    try:
        s = irreps_of(f.group)
    except Unsupported:
        _same_shape(f, g)
        if abs(f.mean()) > MEAN_TOL and abs(g.mean()) > MEAN_TOL:
            raise MeanNotZero("one of the two functions must have mean zero") from None
        lhs = convolve(f, g).norm()
        rhs = f.norm() * g.norm()
        return BnpResult(float(lhs), float(rhs), bool(lhs <= rhs + TOL), 1, "trivial bound")
    return bnp_check(f, g, s)


# ---------------------------------------------------------------- group-valued functions


def entry_function(f: GroupFunctionTable, rho: Irrep, i, j) -> ScalarFunctionTable:
    """g_ij(x) = rho(f(x))_ij, with 0-based (i, j)."""
    d = rho.dim
    if not (0 <= i < d and 0 <= j < d):
        raise IndexError(f"entry ({i}, {j}) outside a {d}x{d} irrep")
    return ScalarFunctionTable(f.group, f.n, rho.matrices[f.values, i, j])


def folded_dim1_mass(f: GroupFunctionTable, rho: Irrep, s: IrrepSet) -> float:
    """max over entries (i, j) and one-dimensional alpha of |g_ij^(alpha)|."""
    if not f.folded:
        raise NotFolded("the dimension-one vanishing needs a folded function")
    if rho.dim < 2:
        raise DimOne(f"{rho.name} has dimension 1")
    return dim1_mass(f, rho, s)


def dim1_mass(f: GroupFunctionTable, rho: Irrep, s: IrrepSet) -> float:
    """Same quantity as ``folded_dim1_mass`` without the preconditions (for counter-checks)."""
    worst = 0.0
    for i in range(rho.dim):
        for j in range(rho.dim):
            t = fourier_transform(entry_function(f, rho, i, j), s)
            for a, m in t:
                if a.dim == 1:
                    worst = max(worst, hs_norm(m))
    return worst


# ---------------------------------------------------------------- random tables


def random_scalar(group, n, rng, mean_zero=False) -> ScalarFunctionTable:
    size = group.order ** n
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    if mean_zero:
        v = v - v.mean()
    return ScalarFunctionTable(group, n, v)


def random_folded(group, n, rng) -> GroupFunctionTable:
    reps = rng.integers(0, group.order, size=group.order ** (n - 1))
    return folded_from_representatives(group, n, reps)


def dictator(group, n, coord) -> GroupFunctionTable:
    """f(x) = x_coord (0-based)."""
    d = K.digits(group.order, n)
    return GroupFunctionTable(group, n, d[:, coord], folded=True)


# ---------------------------------------------------------------- fn files


def serialize_function(f) -> str:
    lines = ["fn v1", f"group {f.group.name}", f"n {f.n}"]
    if isinstance(f, GroupFunctionTable):
        lines += [f"{i} {int(v)}" for i, v in enumerate(f.values)]
    else:
        lines += [f"{i} {float(v.real)!r},{float(v.imag)!r}" for i, v in enumerate(f.values)]
    return "\n".join(lines) + "\n"


def parse_function(text, group: FiniteGroup | None = None):
    """Parse an ``fn v1`` table; complex entries are ``re,im``, bare integers are element ids."""
    lines = [(k + 1, ln.split("#", 1)[0].strip()) for k, ln in enumerate(text.splitlines())]
    lines = [(k, ln) for k, ln in lines if ln]
    if not lines or lines[0][1] != "fn v1":
        raise ParseError("expected header 'fn v1'", lines[0][0] if lines else 1)
    if len(lines) < 3:
        raise ParseError("missing 'group' or 'n' line", lines[-1][0])
    k, ln = lines[1]
    if not ln.startswith("group "):
        raise ParseError("expected 'group <name>'", k)
    gname = ln.split(None, 1)[1].strip()
    if group is None:
        try:
            group = load_group(gname)
        except Exception as exc:
            raise ParseError(str(exc), k) from exc
    k, ln = lines[2]
    parts = ln.split()
    if len(parts) != 2 or parts[0] != "n" or not parts[1].isdigit() or int(parts[1]) < 1:
        raise ParseError("expected 'n <positive integer>'", k)
    n = int(parts[1])
    size = _check_budget(group.order, n)
    body = lines[3:]
    if len(body) != size:
        raise ParseError(f"expected {size} entries, found {len(body)}", body[-1][0] if body else k)
    scalar = "," in body[0][1]
    vals = np.zeros(size, dtype=np.complex128 if scalar else np.int64)
    seen = np.zeros(size, dtype=bool)
    for k, ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise ParseError("expected '<index> <value>'", k)
        try:
            idx = int(parts[0])
        except ValueError:
            raise ParseError(f"bad index {parts[0]!r}", k) from None
        if not 0 <= idx < size or seen[idx]:
            raise ParseError(f"index {idx} out of range or repeated", k)
        seen[idx] = True
        try:
            if scalar:
                re, im = parts[1].split(",")
                vals[idx] = complex(float(re), float(im))
            else:
                vals[idx] = int(parts[1])
        except ValueError:
            raise ParseError(f"bad value {parts[1]!r}", k) from None
    if scalar:
        return ScalarFunctionTable(group, n, vals)
    if vals.min() < 0 or vals.max() >= group.order:
        raise ParseError("element id out of range", body[0][0])
    return GroupFunctionTable.detect(group, n, vals)
