"""Hot loops for norm estimation, in two interchangeable backends.

``numba`` backend: explicit loops compiled with ``@njit``.
``numpy`` backend: vectorised array code, no compilation.

The backend is chosen at import time.  Set ``HLLAB_DISABLE_NUMBA=1`` to
force the numpy path; it is also used when numba is not importable.  Both
backends are importable as :data:`NUMBA_KERNELS` / :data:`NUMPY_KERNELS`
so tests and benchmarks can compare them in one process.

Exponents are plain floats here, with ``np.inf`` for infinity.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("HLLAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = _HAVE_NUMBA and not _DISABLED


# --------------------------------------------------------------------------
# loop implementations (numba-compatible Python)

def _dual_step_loop(c, p):
    n = c.shape[0]
    x = np.zeros(n)
    cmax = 0.0
    k = 0
    for i in range(n):
        a = abs(c[i])
        if a > cmax:
            cmax = a
            k = i
    if cmax == 0.0:
        x[0] = 1.0
        return x
    if p == np.inf:
        for i in range(n):
            x[i] = 1.0 if c[i] >= 0.0 else -1.0
    elif p == 1.0:
        x[k] = 1.0 if c[k] >= 0.0 else -1.0
    else:
        r = p / (p - 1.0)
        s = 0.0
        for i in range(n):
            s += (abs(c[i]) / cmax) ** r
        nr = s ** (1.0 / r)
        e = r - 1.0
        for i in range(n):
            v = (abs(c[i]) / cmax / nr) ** e
            x[i] = v if c[i] >= 0.0 else -v
    return x


def _ascent2_loop(A, p, q, x0, y0, max_iters, rel_tol):
    n1, n2 = A.shape
    x = x0.copy()
    y = y0.copy()
    val = 0.0
    for i in range(n1):
        s = 0.0
        for j in range(n2):
            s += A[i, j] * y[j]
        val += x[i] * s
    val = abs(val)
    c1 = np.empty(n1)
    c2 = np.empty(n2)
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        nz = False
        for i in range(n1):
            s = 0.0
            for j in range(n2):
                s += A[i, j] * y[j]
            c1[i] = s
            if s != 0.0:
                nz = True
        if nz:
            x = _dual_step_jit(c1, p)
        nz = False
        for j in range(n2):
            c2[j] = 0.0
        for i in range(n1):
            xi = x[i]
            if xi != 0.0:
                for j in range(n2):
                    c2[j] += xi * A[i, j]
        for j in range(n2):
            if c2[j] != 0.0:
                nz = True
        new = 0.0
        if nz:
            y = _dual_step_jit(c2, q)
            for j in range(n2):
                new += c2[j] * y[j]
            new = abs(new)
        if new - val <= rel_tol * new:
            val = max(val, new)
            converged = True
            break
        val = new
    return val, x, y, it, converged


def _linf_enum2_loop(A):
    # Gray-code walk over row signs with s[0] = +1 fixed (|T| is even in s)
    n1, n2 = A.shape
    s = np.ones(n1)
    c = np.zeros(n2)
    for i in range(n1):
        for j in range(n2):
            c[j] += A[i, j]
    best = 0.0
    for j in range(n2):
        best += abs(c[j])
    best_s = s.copy()
    total = 1 << (n1 - 1)
    for k in range(1, total):
        b = 0
        kk = k
        while (kk & 1) == 0:
            kk >>= 1
            b += 1
        i = b + 1
        s[i] = -s[i]
        f = 2.0 * s[i]
        v = 0.0
        for j in range(n2):
            c[j] += f * A[i, j]
            v += abs(c[j])
        if v > best:
            best = v
            best_s[:] = s
    return best_s


# --------------------------------------------------------------------------
# numpy implementations

def _dual_step_np(c, p):
    c = np.asarray(c, dtype=np.float64)
    n = c.shape[0]
    x = np.zeros(n)
    a = np.abs(c)
    cmax = a.max() if n else 0.0
    if cmax == 0.0:
        x[0] = 1.0
        return x
    if p == np.inf:
        return np.where(c >= 0.0, 1.0, -1.0)
    if p == 1.0:
        k = int(np.argmax(a))
        x[k] = 1.0 if c[k] >= 0.0 else -1.0
        return x
    r = p / (p - 1.0)
    u = a / cmax
    nr = (u**r).sum() ** (1.0 / r)
    v = (u / nr) ** (r - 1.0)
    return np.where(c >= 0.0, v, -v)


def _ascent2_np(A, p, q, x0, y0, max_iters, rel_tol):
    x = x0.copy()
    y = y0.copy()
    val = abs(float(x @ A @ y))
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        c1 = A @ y
        if np.any(c1 != 0.0):
            x = _dual_step_np(c1, p)
        c2 = x @ A
        new = 0.0
        if np.any(c2 != 0.0):
            y = _dual_step_np(c2, q)
            new = abs(float(c2 @ y))
        if new - val <= rel_tol * new:
            val = max(val, new)
            converged = True
            break
        val = new
    return val, x, y, it, converged


def _sign_rows(start, stop, n):
    # row k is the k-th Gray code, the same visiting order as the loop kernel,
    # so ties resolve to the same sign vector; coordinate 0 is fixed at +1
    k = np.arange(start, stop, dtype=np.int64)[:, None]
    g = k ^ (k >> 1)
    bits = (g >> np.arange(n - 1, dtype=np.int64)[None, :]) & 1
    return np.hstack([np.ones((stop - start, 1)), 1.0 - 2.0 * bits])


def _linf_enum2_np(A, chunk=1 << 14):
    n1 = A.shape[0]
    total = 1 << (n1 - 1)
    best = -1.0
    best_s = np.ones(n1)
    for start in range(0, total, chunk):
        S = _sign_rows(start, min(total, start + chunk), n1)
        vals = np.abs(S @ A).sum(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            best_s = S[k].copy()
    return best_s


# --------------------------------------------------------------------------

if _HAVE_NUMBA:
    _dual_step_jit = numba.njit(cache=True)(_dual_step_loop)
    _ascent2_jit = numba.njit(cache=True)(_ascent2_loop)
    _linf_enum2_jit = numba.njit(cache=True)(_linf_enum2_loop)
else:  # pragma: no cover
    _dual_step_jit = _dual_step_loop
    _ascent2_jit = _ascent2_loop
    _linf_enum2_jit = _linf_enum2_loop


def _wrap_ascent(fn):
    def ascent2(A, p, q, x0, y0, max_iters, rel_tol):
        A = np.ascontiguousarray(A, dtype=np.float64)
        val, x, y, it, conv = fn(
            A, float(p), float(q), np.asarray(x0, np.float64), np.asarray(y0, np.float64),
            int(max_iters), float(rel_tol),
        )
        return float(val), x, y, int(it), bool(conv)

    return ascent2


def _wrap_enum(fn):
    def linf_enum2(A):
        return fn(np.ascontiguousarray(A, dtype=np.float64))

    return linf_enum2


def _wrap_dual(fn):
    def dual_step(c, p):
        return fn(np.ascontiguousarray(c, dtype=np.float64), float(p))

    return dual_step


NUMPY_KERNELS = SimpleNamespace(
    name="numpy",
    dual_step=_wrap_dual(_dual_step_np),
    ascent2=_wrap_ascent(_ascent2_np),
    linf_enum2=_wrap_enum(_linf_enum2_np),
)

NUMBA_KERNELS = SimpleNamespace(
    name="numba" if _HAVE_NUMBA else "python",
    dual_step=_wrap_dual(_dual_step_jit),
    ascent2=_wrap_ascent(_ascent2_jit),
    linf_enum2=_wrap_enum(_linf_enum2_jit),
)

KERNELS = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def backend() -> str:
    return KERNELS.name
