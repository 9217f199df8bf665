"""Inner loops over group tables, with a numba path and a pure-numpy path.

The backend is chosen once at import time:

* ``NALIN_DISABLE_NUMBA=1`` forces numpy,
* ``NALIN_BACKEND=numpy|numba`` picks explicitly,
* otherwise numba is used when importable.

``set_backend`` switches at runtime (tests and the benchmark compare both).
Both paths take the same raw int64/complex128 arrays and return identical
results; mixed-radix indices put coordinate 0 in the most significant digit.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _initial_backend():
    if os.environ.get("NALIN_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    want = os.environ.get("NALIN_BACKEND", "").strip().lower()
    if want == "numpy":
        return "numpy"
    return "numba" if HAVE_NUMBA else "numpy"


_backend = _initial_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch backend; returns the previous one."""
    global _backend
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev


def radix(order, n):
    return order ** np.arange(n - 1, -1, -1, dtype=np.int64)


def digits(order, n, idx=None):
    """Mixed-radix digits of ``idx`` (default: all of range(order**n)), shape (len, n)."""
    if idx is None:
        idx = np.arange(order ** n, dtype=np.int64)
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.int64)
    rem = idx.copy()
    for t in range(n - 1, -1, -1):
        out[:, t] = rem % order
        rem //= order
    return out


# ---------------------------------------------------------------- LIN words


def _np_word_values(cayley, inverse, consts, tvars, texps, ks, assigns):
    """Evaluate every constraint word on every assignment row: returns (B, m)."""
    m, kmax = tvars.shape
    b = assigns.shape[0]
    acc = np.broadcast_to(consts[:, 0], (b, m)).copy()
    for t in range(kmax):
        active = t < ks
        v = np.where(active, tvars[:, t], 0)
        x = assigns[:, v]
        x = np.where(texps[:, t] < 0, inverse[x], x)
        nxt = cayley[cayley[acc, x], consts[:, t + 1]]
        acc = np.where(active, nxt, acc)
    return acc


@njit(cache=True)
def _nb_word_values(cayley, inverse, consts, tvars, texps, ks, assigns):
    b = assigns.shape[0]
    m = tvars.shape[0]
    out = np.empty((b, m), dtype=np.int64)
    for r in range(b):
        for i in range(m):
            acc = consts[i, 0]
            for t in range(ks[i]):
                x = assigns[r, tvars[i, t]]
                if texps[i, t] < 0:
                    x = inverse[x]
                acc = cayley[cayley[acc, x], consts[i, t + 1]]
            out[r, i] = acc
    return out


def word_values(cayley, inverse, consts, tvars, texps, ks, assigns):
    fn = _nb_word_values if _backend == "numba" else _np_word_values
    return fn(cayley, inverse, consts, tvars, texps, ks, assigns)


SCORE_TOL = 1e-12  # scores closer than this count as ties; the earlier index wins


def _np_search(cayley, inverse, consts, tvars, texps, ks, rhs, w, n_vars, order, target):
    """Chunked exhaustive scan in index order."""
    best_val, best_idx = -1.0, -1
    chunk = 1 << 15
    for lo in range(0, order ** n_vars, chunk):
        hi = min(order ** n_vars, lo + chunk)
        assigns = digits(order, n_vars, np.arange(lo, hi, dtype=np.int64))
        vals = _np_word_values(cayley, inverse, consts, tvars, texps, ks, assigns)
        score = (vals == rhs[None, :]) @ w
        top = score.max()
        if top > best_val + SCORE_TOL:
            j = int(np.flatnonzero(score >= top - SCORE_TOL)[0])
            best_val, best_idx = float(score[j]), lo + j
        if best_val >= target:
            break
    return best_val, best_idx


@njit(cache=True)
def _nb_search(cayley, inverse, consts, tvars, texps, ks, rhs, w, n_vars, order, target):
    """Depth-first search in index order with pruning.

    Each constraint is checked once its highest-numbered variable is set; a branch is
    cut as soon as the weight still attainable cannot beat the best value by SCORE_TOL.
    """
    m = ks.shape[0]
    ptr = np.zeros(n_vars + 1, dtype=np.int64)
    last = np.empty(m, dtype=np.int64)
    for i in range(m):
        mx = 0
        for t in range(ks[i]):
            mx = max(mx, tvars[i, t])
        last[i] = mx
        ptr[mx + 1] += 1
    for d in range(n_vars):
        ptr[d + 1] += ptr[d]
    fill = ptr.copy()
    cidx = np.empty(m, dtype=np.int64)
    for i in range(m):
        cidx[fill[last[i]]] = i
        fill[last[i]] += 1
    total = 0.0
    for i in range(m):
        total += w[i]

    a = np.zeros(n_vars, dtype=np.int64)
    lost = np.zeros(n_vars + 1)
    best_val, best_idx = -1.0, -1
    d = 0
    a[0] = -1
    while d >= 0:
        a[d] += 1
        if a[d] >= order:
            d -= 1
            continue
        v = lost[d]
        for j in range(ptr[d], ptr[d + 1]):
            i = cidx[j]
            acc = consts[i, 0]
            for t in range(ks[i]):
                x = a[tvars[i, t]]
                if texps[i, t] < 0:
                    x = inverse[x]
                acc = cayley[cayley[acc, x], consts[i, t + 1]]
            if acc != rhs[i]:
                v += w[i]
        if total - v <= best_val + SCORE_TOL:
            continue
        if d == n_vars - 1:
            best_val = total - v
            idx = 0
            for t in range(n_vars):
                idx = idx * order + a[t]
            best_idx = idx
            if best_val >= target:
                return best_val, best_idx
            continue
        lost[d + 1] = v
        d += 1
        a[d] = -1
    return best_val, best_idx


def search_assignments(cayley, inverse, consts, tvars, texps, ks, rhs, w, n_vars, order, target):
    """(value, index) of the first assignment in index order with the best value, where
    later assignments must win by more than SCORE_TOL; stops once value >= target."""
    fn = _nb_search if _backend == "numba" else _np_search
    val, idx = fn(cayley, inverse, consts, tvars, texps, ks, rhs, w, n_vars, order, target)
    return float(val), int(idx)


# ---------------------------------------------------------------- dictatorship test


def _np_dict_hist_pairs(cayley, inverse, f, n, order):
    big = order ** n
    d = digits(order, n)
    rad = radix(order, n)
    hist = np.zeros(order, dtype=np.float64)
    for ia in range(big):
        ic = inverse[cayley[d[ia][None, :], d]] @ rad
        prods = cayley[cayley[f[ia], f], f[ic]]
        hist += np.bincount(prods, minlength=order)
    return hist


@njit(cache=True)
def _nb_dict_hist_pairs(cayley, inverse, f, n, order):
    big = order ** n
    hist = np.zeros(order, dtype=np.float64)
    da = np.zeros(n, dtype=np.int64)
    db = np.zeros(n, dtype=np.int64)
    for ia in range(big):
        rem = ia
        for t in range(n - 1, -1, -1):
            da[t] = rem % order
            rem //= order
        for ib in range(big):
            rem = ib
            for t in range(n - 1, -1, -1):
                db[t] = rem % order
                rem //= order
            ic = 0
            for t in range(n):
                ic = ic * order + inverse[cayley[da[t], db[t]]]
            g = cayley[cayley[f[ia], f[ib]], f[ic]]
            hist[g] += 1.0
    return hist


def dict_hist_pairs(cayley, inverse, f, n, order):
    """Counts of f(a) f(b) f(c) over all (a, b) with c_i = (a_i b_i)^-1."""
    fn = _nb_dict_hist_pairs if _backend == "numba" else _np_dict_hist_pairs
    return fn(cayley, inverse, f, n, order)


def _np_dict_hist_noisy(cayley, f, n, order, on):
    big = order ** n
    d = digits(order, n)
    counts = np.zeros((n + 1, order), dtype=np.int64)
    for ia in range(big):
        fa = f[ia]
        for ib in range(big):
            k = np.zeros(big, dtype=np.int64)
            for t in range(n):
                k += on[d[ia, t], d[ib, t], d[:, t]]
            prods = cayley[cayley[fa, f[ib]], f]
            np.add.at(counts, (k, prods), 1)
    return counts


@njit(cache=True)
def _nb_dict_hist_noisy(cayley, f, n, order, on):
    big = order ** n
    counts = np.zeros((n + 1, order), dtype=np.int64)
    d = np.zeros((big, n), dtype=np.int64)
    for i in range(big):
        rem = i
        for t in range(n - 1, -1, -1):
            d[i, t] = rem % order
            rem //= order
    for ia in range(big):
        for ib in range(big):
            fab = cayley[f[ia], f[ib]]
            for ic in range(big):
                k = 0
                for t in range(n):
                    k += on[d[ia, t], d[ib, t], d[ic, t]]
                counts[k, cayley[fab, f[ic]]] += 1
    return counts


def dict_hist_noisy(cayley, f, n, order, on):
    """counts[k, g]: triples (a, b, c) in G^{3n} with f(a) f(b) f(c) = g and exactly k
    coordinates where on[a_i, b_i, c_i] is set."""
    fn = _nb_dict_hist_noisy if _backend == "numba" else _np_dict_hist_noisy
    return fn(cayley, f, n, order, np.ascontiguousarray(on, dtype=np.int64))


# ---------------------------------------------------------------- convolution


def _np_convolve(cayley, inverse, f, g, n, order):
    big = order ** n
    d = digits(order, n)
    rad = radix(order, n)
    out = np.zeros(big, dtype=np.complex128)
    chunk = max(1, (1 << 22) // max(1, big * n))
    for lo in range(0, big, chunk):
        hi = min(big, lo + chunk)
        # index of y^-1 x for y in [lo, hi), all x
        idx = cayley[inverse[d[lo:hi]][:, None, :], d[None, :, :]] @ rad
        out += f[lo:hi] @ g[idx]
    return out / big


@njit(cache=True)
def _nb_convolve(cayley, inverse, f, g, n, order):
    big = order ** n
    d = np.zeros((big, n), dtype=np.int64)
    for i in range(big):
        rem = i
        for t in range(n - 1, -1, -1):
            d[i, t] = rem % order
            rem //= order
    out = np.zeros(big, dtype=np.complex128)
    for x in range(big):
        s = 0j
        for y in range(big):
            idx = 0
            for t in range(n):
                idx = idx * order + cayley[inverse[d[y, t]], d[x, t]]
            s += f[y] * g[idx]
        out[x] = s / big
    return out


def convolve(cayley, inverse, f, g, n, order):
    """(f * g)(x) = E_y f(y) g(y^-1 x) over G^n by direct summation."""
    fn = _nb_convolve if _backend == "numba" else _np_convolve
    return fn(cayley, inverse, np.ascontiguousarray(f, dtype=np.complex128),
              np.ascontiguousarray(g, dtype=np.complex128), n, order)
