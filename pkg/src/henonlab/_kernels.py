"""Hot loops over piecewise power-law radial data.

A radial function is stored as positive node values on a log grid. Between
nodes r_i < r_{i+1} it is the power law through both endpoint values, below
the first node it is ``f_0 (r/r_0)**head`` and above the last node it is
``f_{n-1} (r/r_{n-1})**tail``. A segment with a zero endpoint is identically
zero in its interior (the limit of the power law as the exponent runs off to
-inf or +inf).

Every kernel exists twice: a numba ``@njit`` loop and a vectorized numpy
version. ``HENONLAB_BACKEND=numpy`` forces the numpy path; the default is
numba when it imports.
"""

import math
import os
from types import SimpleNamespace

import numpy as np

# |x| below this uses expm1(x)/x, above it the two-sided difference formula.
_SMALL = 1.0


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------


def _np_pieces(xa, xb, fa, fb, k):
    """Integral of s**k f(s) over [xa, xb] for the power law through (xa, fa), (xb, fb)."""
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    out = np.zeros(np.broadcast(xa, xb, fa, fb).shape)
    pos = (fa > 0.0) & (fb > 0.0)
    if not pos.any():
        return out
    xa, xb, fa, fb = xa[pos], xb[pos], fa[pos], fb[pos]
    L = np.log(xb / xa)
    sigma = np.log(fb / fa) / L
    e = k + 1.0 + sigma
    x = e * L
    a = fa * xa ** (k + 1.0)
    small = np.abs(x) < _SMALL
    res = np.empty_like(a)
    with np.errstate(invalid="ignore", divide="ignore"):
        xs = x[small]
        rel = np.where(xs == 0.0, 1.0, np.expm1(xs) / np.where(xs == 0.0, 1.0, xs))
        res[small] = a[small] * L[small] * rel
        big = ~small
        res[big] = (fb[big] * xb[big] ** (k + 1.0) - a[big]) / e[big]
    out[pos] = res
    return out


def _np_segment_moments(r, f, k):
    return _np_pieces(r[:-1], r[1:], f[:-1], f[1:], k)


def _np_potential_nodes(r, f, N, head, tail, use_head, use_tail):
    A = _np_segment_moments(r, f, N - 1.0)
    B = _np_segment_moments(r, f, 1.0)
    H = 0.0
    if use_head and f[0] > 0.0:
        H = f[0] * r[0] ** N / (N + head)
    T = 0.0
    if use_tail and f[-1] > 0.0:
        T = -f[-1] * r[-1] ** 2 / (2.0 + tail)
    inner = np.cumsum(np.concatenate(([H], A)))
    outer = np.cumsum(np.concatenate(([T], B[::-1])))[::-1]
    return (inner * r ** (2.0 - N) + outer) / (N - 2.0)


def _np_evaluate(r, f, head, tail, x):
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.zeros_like(flat)
    n = r.shape[0]
    lo = flat <= r[0]
    hi = flat >= r[-1]
    mid = ~(lo | hi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if lo.any() and f[0] > 0.0:
            out[lo] = f[0] * (flat[lo] / r[0]) ** head
        if hi.any() and f[-1] > 0.0:
            out[hi] = f[-1] * (flat[hi] / r[-1]) ** tail
        if mid.any():
            xm = flat[mid]
            i = np.clip(np.searchsorted(r, xm, side="right") - 1, 0, n - 2)
            fa, fb = f[i], f[i + 1]
            at_node = xm == r[i]
            pos = (fa > 0.0) & (fb > 0.0)
            sig = np.where(pos, np.log(np.where(pos, fb / np.where(pos, fa, 1.0), 1.0)) / np.log(r[i + 1] / r[i]), 0.0)
            val = np.where(pos, fa * (xm / r[i]) ** sig, 0.0)
            out[mid] = np.where(at_node, fa, val)
    return out.reshape(x.shape)


def _np_annulus_moments(r, f, head, tail, lo, hi, k):
    out = np.zeros(len(lo))
    for m in range(len(lo)):
        a, b = lo[m], hi[m]
        i0 = np.searchsorted(r, a, side="right")
        i1 = np.searchsorted(r, b, side="left")
        xs = np.concatenate(([a], r[i0:i1], [b]))
        fs = np.concatenate((_np_evaluate(r, f, head, tail, [a]), f[i0:i1], _np_evaluate(r, f, head, tail, [b])))
        out[m] = _np_pieces(xs[:-1], xs[1:], fs[:-1], fs[1:], k).sum()
    return out


def _np_annulus_max(r, f, head, tail, lo, hi):
    ends_lo = _np_evaluate(r, f, head, tail, lo)
    ends_hi = _np_evaluate(r, f, head, tail, hi)
    out = np.maximum(ends_lo, ends_hi)
    i0 = np.searchsorted(r, lo, side="right")
    i1 = np.searchsorted(r, hi, side="left")
    for m in range(len(lo)):
        if i1[m] > i0[m]:
            out[m] = max(out[m], f[i0[m]:i1[m]].max())
    return out


numpy_backend = SimpleNamespace(
    name="numpy",
    pieces=_np_pieces,
    segment_moments=_np_segment_moments,
    potential_nodes=_np_potential_nodes,
    evaluate=_np_evaluate,
    annulus_moments=_np_annulus_moments,
    annulus_max=_np_annulus_max,
)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------


def _build_numba_backend():
    from numba import njit

    @njit(cache=True)
    def piece(xa, xb, fa, fb, k):
        if fa <= 0.0 or fb <= 0.0:
            return 0.0
        L = math.log(xb / xa)
        sigma = math.log(fb / fa) / L
        e = k + 1.0 + sigma
        x = e * L
        a = fa * xa ** (k + 1.0)
        if abs(x) < _SMALL:
            if x == 0.0:
                return a * L
            return a * L * (math.expm1(x) / x)
        return (fb * xb ** (k + 1.0) - a) / e

    @njit(cache=True)
    def pieces(xa, xb, fa, fb, k):
        m = xa.shape[0]
        out = np.empty(m)
        for i in range(m):
            out[i] = piece(xa[i], xb[i], fa[i], fb[i], k)
        return out

    @njit(cache=True)
    def segment_moments(r, f, k):
        m = r.shape[0] - 1
        out = np.empty(m)
        for i in range(m):
            out[i] = piece(r[i], r[i + 1], f[i], f[i + 1], k)
        return out

    @njit(cache=True)
    def potential_nodes(r, f, N, head, tail, use_head, use_tail):
        n = r.shape[0]
        H = 0.0
        if use_head and f[0] > 0.0:
            H = f[0] * r[0] ** N / (N + head)
        T = 0.0
        if use_tail and f[n - 1] > 0.0:
            T = -f[n - 1] * r[n - 1] ** 2 / (2.0 + tail)
        inner = np.empty(n)
        outer = np.empty(n)
        acc = H
        inner[0] = acc
        for i in range(n - 1):
            acc = acc + piece(r[i], r[i + 1], f[i], f[i + 1], N - 1.0)
            inner[i + 1] = acc
        acc = T
        outer[n - 1] = acc
        for i in range(n - 2, -1, -1):
            acc = acc + piece(r[i], r[i + 1], f[i], f[i + 1], 1.0)
            outer[i] = acc
        g = np.empty(n)
        for j in range(n):
            g[j] = (inner[j] * r[j] ** (2.0 - N) + outer[j]) / (N - 2.0)
        return g

    @njit(cache=True)
    def eval_one(r, f, head, tail, xx):
        n = r.shape[0]
        if xx <= r[0]:
            if f[0] > 0.0:
                return f[0] * (xx / r[0]) ** head
            return 0.0
        if xx >= r[n - 1]:
            if f[n - 1] > 0.0:
                return f[n - 1] * (xx / r[n - 1]) ** tail
            return 0.0
        i = np.searchsorted(r, xx, side="right") - 1
        if i > n - 2:
            i = n - 2
        fa = f[i]
        if xx == r[i]:
            return fa
        fb = f[i + 1]
        if fa <= 0.0 or fb <= 0.0:
            return 0.0
        sig = math.log(fb / fa) / math.log(r[i + 1] / r[i])
        return fa * (xx / r[i]) ** sig

    @njit(cache=True)
    def evaluate_flat(r, f, head, tail, x):
        out = np.empty(x.shape[0])
        for m in range(x.shape[0]):
            out[m] = eval_one(r, f, head, tail, x[m])
        return out

    def evaluate(r, f, head, tail, x):
        x = np.asarray(x, dtype=float)
        return evaluate_flat(r, f, float(head), float(tail), x.ravel()).reshape(x.shape)

    @njit(cache=True)
    def annulus_moments(r, f, head, tail, lo, hi, k):
        M = lo.shape[0]
        out = np.zeros(M)
        for m in range(M):
            a = lo[m]
            b = hi[m]
            i0 = np.searchsorted(r, a, side="right")
            i1 = np.searchsorted(r, b, side="left")
            xprev = a
            fprev = eval_one(r, f, head, tail, a)
            acc = 0.0
            for i in range(i0, i1):
                acc += piece(xprev, r[i], fprev, f[i], k)
                xprev = r[i]
                fprev = f[i]
            acc += piece(xprev, b, fprev, eval_one(r, f, head, tail, b), k)
            out[m] = acc
        return out

    @njit(cache=True)
    def annulus_max(r, f, head, tail, lo, hi):
        M = lo.shape[0]
        out = np.empty(M)
        for m in range(M):
            v = max(eval_one(r, f, head, tail, lo[m]), eval_one(r, f, head, tail, hi[m]))
            i0 = np.searchsorted(r, lo[m], side="right")
            i1 = np.searchsorted(r, hi[m], side="left")
            for i in range(i0, i1):
                if f[i] > v:
                    v = f[i]
            out[m] = v
        return out

    def _pieces(xa, xb, fa, fb, k):
        args = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (xa, xb, fa, fb)))
        shape = args[0].shape
        flat = [np.ascontiguousarray(v).ravel() for v in args]
        return pieces(*flat, float(k)).reshape(shape)

    return SimpleNamespace(
        name="numba",
        pieces=_pieces,
        segment_moments=lambda r, f, k: segment_moments(r, f, float(k)),
        potential_nodes=lambda r, f, N, head, tail, use_head, use_tail: potential_nodes(
            r, f, float(N), float(head), float(tail), bool(use_head), bool(use_tail)
        ),
        evaluate=evaluate,
        annulus_moments=lambda r, f, head, tail, lo, hi, k: annulus_moments(
            r, f, float(head), float(tail), np.asarray(lo, dtype=float), np.asarray(hi, dtype=float), float(k)
        ),
        annulus_max=lambda r, f, head, tail, lo, hi: annulus_max(
            r, f, float(head), float(tail), np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        ),
    )


def get_backend(name):
    """Return the kernel namespace for ``"numba"`` or ``"numpy"``."""
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        return _build_numba_backend()
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    want = os.environ.get("HENONLAB_BACKEND", "numba").strip().lower()
    if want == "numpy":
        return numpy_backend
    try:
        return _build_numba_backend()
    except ImportError:
        return numpy_backend


backend = _select()
BACKEND = backend.name
