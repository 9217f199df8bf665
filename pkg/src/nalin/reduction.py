"""Label Cover instances and their reduction to 3-LIN over a group.

Each Label Cover node w with alphabet size k gets a folded table f_w: G^k -> G, stored
as one LIN variable per folding orbit (|G|^(k-1) of them, representatives have first
coordinate the identity).  For an edge (u, v, pi) and a in G^R, b in G^L the test is

    f_v(a) f_u(b) f_v(c) = 1,   c_i = b_{pi(i)}^-1 a_i^-1,

and writing f_w(x) = x_1 z_w(rep(x)) turns it into a 3-term LIN constraint with the
first coordinates interleaved as constants.

LC file format (``lc v1``)::

    lc v1
    sides 2 3
    alphabets 2 3
    edge 0 1 : 0 1 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, NotFolded, ParseError
from .fourier import (MAX_TABLE, GroupFunctionTable, ScalarFunctionTable, fourier_transform,
                      hs_norm)
from .group import FiniteGroup
from .lin import LinConstraint, LinInstance, Term, evaluate
from .reps import Irrep, IrrepSet

FULL_CAP = 10**6


@dataclass(frozen=True, eq=False)
class LabelCover:
    n_u: int
    n_v: int
    L: int
    R: int
    edges: tuple  # (u, v, pi) with pi a tuple of length R over [L]

    def __post_init__(self):
        if self.L < 1 or self.R < self.L:
            raise ValueError(f"need 1 <= L <= R, got L = {self.L}, R = {self.R}")
        if not self.edges:
            raise ValueError("a Label Cover needs at least one edge")
        edges = []
        for u, v, pi in self.edges:
            pi = tuple(int(x) for x in pi)
            if not (0 <= u < self.n_u and 0 <= v < self.n_v):
                raise ValueError(f"edge ({u}, {v}) outside the vertex sets")
            if len(pi) != self.R or set(pi) != set(range(self.L)):
                raise ValueError(f"projection of edge ({u}, {v}) is not a surjection [R] -> [L]")
            edges.append((int(u), int(v), pi))
        object.__setattr__(self, "edges", tuple(edges))


@dataclass(frozen=True)
class Labeling:
    u_labels: tuple
    v_labels: tuple


def _check_labeling(lc: LabelCover, lab: Labeling):
    if len(lab.u_labels) != lc.n_u or len(lab.v_labels) != lc.n_v:
        raise ValueError("labeling length does not match the vertex sets")
    if any(not 0 <= x < lc.L for x in lab.u_labels) or any(not 0 <= x < lc.R for x in lab.v_labels):
        raise ValueError("label out of range")


def lc_value(lc: LabelCover, lab: Labeling) -> float:
    """Fraction of edges with pi(label(v)) = label(u)."""
    _check_labeling(lc, lab)
    good = sum(pi[lab.v_labels[v]] == lab.u_labels[u] for u, v, pi in lc.edges)
    return good / len(lc.edges)


def _random_surjection(rng, L, R, forced=None):
    """Uniformly shuffled surjection [R] -> [L]; ``forced = (i, l)`` pins pi(i) = l."""
    vals = list(rng.permutation(L)) + list(rng.integers(0, L, size=R - L))
    pi = [int(x) for x in rng.permutation(vals)]
    if forced is not None:
        i, target = forced
        j = pi.index(target)
        pi[i], pi[j] = pi[j], pi[i]
    return tuple(pi)


def generate_toy_lc(kind, n_u, n_v, L, R, seed) -> tuple[LabelCover, Labeling | None]:
    """Complete bipartite toy instance.  ``planted``: labels first, projections consistent."""
    if kind not in ("planted", "random"):
        raise ValueError(f"kind must be 'planted' or 'random', got {kind!r}")
    if n_u < 1 or n_v < 1 or L < 1 or R < L:
        raise ValueError(f"impossible sizes |U|={n_u} |V|={n_v} L={L} R={R}")
    rng = np.random.default_rng(seed)
    lab = None
    if kind == "planted":
        lab = Labeling(tuple(int(x) for x in rng.integers(0, L, size=n_u)),
                       tuple(int(x) for x in rng.integers(0, R, size=n_v)))
    edges = []
    for u in range(n_u):
        for v in range(n_v):
            forced = (lab.v_labels[v], lab.u_labels[u]) if lab else None
            edges.append((u, v, _random_surjection(rng, L, R, forced)))
    return LabelCover(n_u, n_v, L, R, tuple(edges)), lab


def smoothness_stat(lc: LabelCover, v, alpha_set, d0=None) -> dict:
    """E over edges at v of 1/|pi(alpha)|, optionally next to |alpha|^(-2 d0)."""
    alpha = sorted(set(int(a) for a in alpha_set))
    if not alpha:
        raise ValueError("alpha_set must be nonempty")
    vals = [1.0 / len({pi[a] for a in alpha}) for _, w, pi in lc.edges if w == v]
    if not vals:
        raise ValueError(f"vertex {v} has no edges")
    out = {"stat": float(np.mean(vals)), "neighbors": len(vals)}
    if d0 is not None:
        out["bound"] = len(alpha) ** (-2 * d0)
        out["ok"] = out["stat"] <= out["bound"] + 1e-12
    return out


# ---------------------------------------------------------------- reduction


@dataclass(frozen=True, eq=False)
class ReducedInstance:
    instance: LinInstance
    lc: LabelCover
    group: FiniteGroup
    mode: str
    offsets: dict = field(repr=False)  # (side, node) -> first variable index

    def var_index(self, side, node, rep_index) -> int:
        return self.offsets[(side, node)] + int(rep_index)

    def var_map(self) -> dict:
        """(side, node, representative tuple) -> variable index."""
        out = {}
        g = self.group
        for (side, node), off in self.offsets.items():
            k = self.lc.L if side == "u" else self.lc.R
            tail = K.digits(g.order, k - 1) if k > 1 else np.zeros((1, 0), dtype=np.int64)
            for i, t in enumerate(tail):
                out[(side, node, (0,) + tuple(int(x) for x in t))] = off + i
        return out

    @property
    def num_vars(self) -> int:
        return self.instance.num_vars


def expected_num_vars(lc: LabelCover, order) -> int:
    return lc.n_u * order ** (lc.L - 1) + lc.n_v * order ** (lc.R - 1)


def _offsets(lc, order):
    off, out = 0, {}
    for u in range(lc.n_u):
        out[("u", u)] = off
        off += order ** (lc.L - 1)
    for v in range(lc.n_v):
        out[("v", v)] = off
        off += order ** (lc.R - 1)
    return out


def _edge_constraints(g, lc, offsets, e, a, b, weight):
    """Constraints for rows of a (B, R) and b (B, L) on edge e."""
    u, v, pi = lc.edges[e]
    pi = np.asarray(pi)
    c = g.cayley[g.inverse[b[:, pi]], g.inverse[a]]
    ra = _rep_index(g, a)
    rb = _rep_index(g, b)
    rc = _rep_index(g, c)
    ou, ov = offsets[("u", u)], offsets[("v", v)]
    out = []
    for i in range(len(a)):
        consts = (int(a[i, 0]), int(b[i, 0]), int(c[i, 0]), 0)
        terms = (Term(ov + int(ra[i])), Term(ou + int(rb[i])), Term(ov + int(rc[i])))
        out.append(LinConstraint(weight, 0, consts, terms))
    return out


def _rep_index(g, x):
    """Index within G^(k-1) of x_1^-1 . x (rows of x)."""
    k = x.shape[1]
    if k == 1:
        return np.zeros(len(x), dtype=np.int64)
    shifted = g.cayley[g.inverse[x[:, :1]], x[:, 1:]]
    return shifted @ K.radix(g.order, k - 1)


def reduce(lc: LabelCover, g: FiniteGroup, mode="full", seed=0, samples=1000,
           cap=FULL_CAP) -> ReducedInstance:
    """Full mode enumerates every (e, a, b) with equal weight; sampled mode draws ``samples``
    triples uniformly (edge uniform, a and b uniform)."""
    order = g.order
    offsets = _offsets(lc, order)
    n_vars = expected_num_vars(lc, order)
    cons = []
    if mode == "full":
        per_edge = order ** (lc.R + lc.L)
        total = per_edge * len(lc.edges)
        if total > cap:
            raise BudgetExceeded(f"full reduction needs {total} constraints (cap {cap})")
        ab = K.digits(order, lc.R + lc.L)
        a, b = ab[:, :lc.R], ab[:, lc.R:]
        w = 1.0 / total
        for e in range(len(lc.edges)):
            cons.extend(_edge_constraints(g, lc, offsets, e, a, b, w))
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        es = rng.integers(0, len(lc.edges), size=samples)
        a = rng.integers(0, order, size=(samples, lc.R))
        b = rng.integers(0, order, size=(samples, lc.L))
        for e in range(len(lc.edges)):
            sel = es == e
            if sel.any():
                cons.extend(_edge_constraints(g, lc, offsets, e, a[sel], b[sel], 1.0 / samples))
    else:
        raise ValueError(f"mode must be 'full' or 'sampled', got {mode!r}")
    inst = LinInstance(g, n_vars, tuple(cons))
    return ReducedInstance(inst, lc, g, mode, offsets)


def assignment_from_tables(red: ReducedInstance, tables: dict) -> np.ndarray:
    """Orbit-representative values of folded node tables {(side, node): table}."""
    out = np.zeros(red.num_vars, dtype=np.int64)
    for key, off in red.offsets.items():
        t = tables[key]
        if not t.folded:
            raise NotFolded(f"table for {key} is not folded")
        size = red.group.order ** (t.n - 1)
        out[off:off + size] = t.values[:size]
    return out


def longcode_tables(lc: LabelCover, lab: Labeling, g: FiniteGroup) -> dict:
    """Dictator tables x -> x_label for every node."""
    _check_labeling(lc, lab)
    tables = {}
    for side, labels, k in (("u", lab.u_labels, lc.L), ("v", lab.v_labels, lc.R)):
        d = K.digits(g.order, k)
        for node, ell in enumerate(labels):
            tables[(side, node)] = GroupFunctionTable(g, k, d[:, ell], folded=True)
    return tables


def longcode_assignment(lc: LabelCover, lab: Labeling, red: ReducedInstance) -> np.ndarray:
    return assignment_from_tables(red, longcode_tables(lc, lab, red.group))


def reduced_value(red: ReducedInstance, assignment) -> float:
    return evaluate(red.instance, assignment)


# ---------------------------------------------------------------- decoding


@dataclass(frozen=True)
class NodeDecode:
    probs: np.ndarray  # label -> probability
    bottom: float      # leftover mass


def decode_distribution(table: GroupFunctionTable, rho: Irrep, i, j, s: IrrepSet) -> NodeDecode:
    """Pick alpha with probability dim(alpha) ||g^(alpha)||^2 for g = rho(f)_ij, then a uniform
    coordinate whose component has dimension >= 2; the remaining mass is bottom."""
    if not table.folded:
        raise NotFolded("decoding expects folded tables")
    k = table.n
    if table.group.order ** k > MAX_TABLE:
        raise BudgetExceeded("node table exceeds the transform cap")
    h = ScalarFunctionTable(table.group, k, rho.matrices[table.values, i, j])
    t = fourier_transform(h, s)
    probs = np.zeros(k)
    for alpha, m in t:
        mass = alpha.dim * hs_norm(m) ** 2
        coords = [c for c, comp in enumerate(alpha.components) if s[comp].dim >= 2]
        if coords and mass > 0:
            probs[coords] += mass / len(coords)
    total = float(probs.sum())
    if total > 1 + 1e-9:
        raise ValueError(f"decoding mass {total} exceeds 1")
    return NodeDecode(probs, max(0.0, 1.0 - total))


@dataclass(frozen=True)
class DecodeReport:
    labeling: tuple          # best trial: (u labels, v labels), -1 for bottom
    lc_value: float          # best conditional value over trials (nan if never defined)
    mean_value: float        # mean conditional value over trials where defined
    bottom_rate: float
    expected_value: float    # exact E[fraction of edges satisfied], bottom counts as unsatisfied
    node_mass: dict          # (side, node) -> non-bottom probability


def _conditional_value(lc, ul, vl):
    good = total = 0
    for u, v, pi in lc.edges:
        if ul[u] >= 0 and vl[v] >= 0:
            total += 1
            good += pi[vl[v]] == ul[u]
    return good / total if total else math.nan


def fourier_decode(red: ReducedInstance, tables: dict, rho: Irrep, indices, s: IrrepSet,
                   seed=0, trials=200) -> DecodeReport:
    """Randomized labeling from node tables: v uses rho(f_v)_{rp}, u uses rho(f_u)_{qr}."""
    if rho.dim < 2:
        raise ValueError("decoding needs an irrep of dimension >= 2")
    p, q, r = indices
    lc = red.lc
    dist = {}
    for key, t in tables.items():
        side = key[0]
        i, j = (r, p) if side == "v" else (q, r)
        dist[key] = decode_distribution(t, rho, i, j, s)
    expected = 0.0
    for u, v, pi in lc.edges:
        pv, pu = dist[("v", v)].probs, dist[("u", u)].probs
        expected += sum(pv[l] * pu[pi[l]] for l in range(lc.R))
    expected /= len(lc.edges)

    bottoms = draws = 0
    best, best_lab, vals = -1.0, None, []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        labels = {}
        for key in sorted(dist):
            d = dist[key]
            choice = rng.choice(len(d.probs) + 1, p=np.append(d.probs, d.bottom) /
                                (d.probs.sum() + d.bottom))
            labels[key] = -1 if choice == len(d.probs) else int(choice)
            bottoms += labels[key] < 0
            draws += 1
        ul = [labels[("u", u)] for u in range(lc.n_u)]
        vl = [labels[("v", v)] for v in range(lc.n_v)]
        val = _conditional_value(lc, ul, vl)
        if not math.isnan(val):
            vals.append(val)
            if val > best:
                best, best_lab = val, (tuple(ul), tuple(vl))
    return DecodeReport(best_lab, best if vals else math.nan,
                        float(np.mean(vals)) if vals else math.nan,
                        bottoms / draws, float(expected),
                        {k: 1.0 - d.bottom for k, d in dist.items()})


# ---------------------------------------------------------------- parameters


def soundness_params(delta, order, d0) -> dict:
    """Constants the soundness argument needs for given (delta, |G|, d0).

    C is the least value with C^(-d0/2) <= delta^2 / (12 |G|^6); the Label Cover must be
    at most delta^2 / (10 |G|^(10 C))-satisfiable, reported through its log10.
    """
    if not (0 < delta < 1 and 0 < d0 < 1 / 3 and order >= 2):
        raise ValueError("need 0 < delta < 1, 0 < d0 < 1/3 and |G| >= 2")
    C = (12 * order ** 6 / delta ** 2) ** (2 / d0)
    log10_s = 2 * math.log10(delta) - 1 - 10 * C * math.log10(order)
    eta = C ** (-d0)
    c = 1 / eta
    eps0 = math.sqrt(eta)
    return {"C": C, "log10_lc_soundness": log10_s, "eta": eta, "c": c, "eps0": eps0,
            "c_condition": c >= 10 * order * math.log(1 / eps0)}


# ---------------------------------------------------------------- files


def serialize_lc(lc: LabelCover) -> str:
    lines = ["lc v1", f"sides {lc.n_u} {lc.n_v}", f"alphabets {lc.L} {lc.R}"]
    lines += [f"edge {u} {v} : " + " ".join(str(x) for x in pi) for u, v, pi in lc.edges]
    return "\n".join(lines) + "\n"


def serialize_labeling(lab: Labeling) -> str:
    return ("u " + " ".join(map(str, lab.u_labels)) + "\n"
            + "v " + " ".join(map(str, lab.v_labels)) + "\n")


def parse_labeling(text) -> Labeling:
    rows = {}
    for k, ln in enumerate(text.splitlines(), start=1):
        ln = ln.split("#", 1)[0].split()
        if not ln:
            continue
        if ln[0] not in ("u", "v"):
            raise ParseError("expected 'u <labels>' or 'v <labels>'", k)
        try:
            rows[ln[0]] = tuple(int(x) for x in ln[1:])
        except ValueError:
            raise ParseError("labels must be integers", k) from None
    if set(rows) != {"u", "v"}:
        raise ParseError("labeling needs both 'u' and 'v' lines", 1)
    return Labeling(rows["u"], rows["v"])


def _ints(tokens, k, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"bad {what}", k) from None


def parse_lc(text) -> LabelCover:
    body = [(k, ln.split("#", 1)[0].strip()) for k, ln in enumerate(text.splitlines(), start=1)]
    body = [(k, ln) for k, ln in body if ln]
    if not body or body[0][1] != "lc v1":
        raise ParseError("expected header 'lc v1'", body[0][0] if body else 1)
    if len(body) < 3:
        raise ParseError("missing 'sides' or 'alphabets' line", body[-1][0])
    k, ln = body[1]
    parts = ln.split()
    if len(parts) != 3 or parts[0] != "sides":
        raise ParseError("expected 'sides <|U|> <|V|>'", k)
    n_u, n_v = _ints(parts[1:], k, "side sizes")
    k, ln = body[2]
    parts = ln.split()
    if len(parts) != 3 or parts[0] != "alphabets":
        raise ParseError("expected 'alphabets <L> <R>'", k)
    L, R = _ints(parts[1:], k, "alphabet sizes")
    edges = []
    for k, ln in body[3:]:
        head, sep, tail = ln.partition(":")
        hp = head.split()
        if not sep or len(hp) != 3 or hp[0] != "edge":
            raise ParseError("expected 'edge <u> <v> : <pi(0)> ... <pi(R-1)>'", k)
        u, v = _ints(hp[1:], k, "edge endpoints")
        pi = _ints(tail.split(), k, "projection")
        if len(pi) != R:
            raise ParseError(f"projection has {len(pi)} entries, expected R = {R}", k)
        if not (0 <= u < n_u and 0 <= v < n_v):
            raise ParseError(f"edge ({u}, {v}) outside the vertex sets", k)
        if any(not 0 <= x < L for x in pi) or len(set(pi)) != L:
            raise ParseError("projection must map onto [L]", k)
        edges.append((u, v, tuple(pi)))
    try:
        return LabelCover(n_u, n_v, L, R, tuple(edges))
    except ValueError as exc:
        raise ParseError(str(exc), body[-1][0]) from None
