"""Certified lower bounds for norms of multilinear forms.

The norm ``sup |T(x1, ..., xm)|`` over the product of unit balls is
estimated by alternating maximisation: with every slot but one frozen the
problem is linear in the free slot and :func:`dual_step` solves it exactly.
Every returned :class:`NormCertificate` carries the feasible inputs that
attain its value, so the value is a proven lower bound on the true norm.
"""

from __future__ import annotations

import enum
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DomainError, TooLarge
from .exponents import ExpLike, XExp, conj, xexp
from .forms import MultilinearForm, contract, evaluate
from .tensor import lp_norm

ENUM_GUARD = 2**24
FEASIBILITY_SLACK = 1e-12


class Method(str, enum.Enum):
    ASCENT = "ASCENT"
    ENUMERATION = "ENUMERATION"
    CLOSED_FORM = "CLOSED_FORM"


@dataclass(frozen=True)
class AscentConfig:
    multistarts: int = 16
    max_iters: int = 200
    rel_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.multistarts < 1 or self.max_iters < 1 or not self.rel_tol > 0 or self.seed < 0:
            raise DomainError(f"invalid ascent configuration {self}")


@dataclass(frozen=True)
class NormCertificate:
    value: float
    witnesses: tuple[np.ndarray, ...] = field(repr=False)
    method: Method
    converged: bool
    multistarts_used: int

    def check(self, f: MultilinearForm, rtol: float = 1e-12) -> bool:
        """Feasibility of every witness and reproduction of ``value``."""
        for x, p in zip(self.witnesses, f.domain_exps):
            if float(lp_norm(x, p)) > 1 + FEASIBILITY_SLACK:
                return False
        got = abs(evaluate(f, self.witnesses))
        return abs(got - self.value) <= rtol * max(self.value, np.finfo(float).tiny)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method.value,
            "converged": self.converged,
            "multistarts_used": self.multistarts_used,
            "witnesses": [w.tolist() for w in self.witnesses],
        }


def dual_step(c, p: ExpLike) -> np.ndarray:
    """Maximiser of ``<c, x>`` over the unit ball of ``l_p``.

    Ties: ``sign(0) = +1`` and, for ``p = 1``, the lowest index of
    ``max |c_i|``.  ``c = 0`` returns ``e_1``.
    """
    p = xexp(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    if c.size == 0:
        raise DomainError("empty vector")
    return kernels.KERNELS.dual_step(c, float(p))


def _normalize(x: np.ndarray, p: XExp) -> np.ndarray:
    return x / float(lp_norm(x, p))


PEAK_START = -1


def _starts(f: MultilinearForm, cfg: AscentConfig, index: int) -> list[np.ndarray]:
    if index == PEAK_START:
        # basis vectors at the largest |coefficient|: already worth max |a|
        peak = np.unravel_index(int(np.argmax(np.abs(f.coeffs.array))), f.dims)
        return [np.eye(1, n, i).reshape(-1) for n, i in zip(f.dims, peak)]
    if index == 0:
        return [_normalize(np.ones(n), p) for n, p in zip(f.dims, f.domain_exps)]
    rng = np.random.default_rng([cfg.seed, index])
    out = []
    for n, p in zip(f.dims, f.domain_exps):
        g = rng.standard_normal(n)
        while not np.any(g):
            g = rng.standard_normal(n)
        out.append(_normalize(g / np.linalg.norm(g), p))
    return out


def _ascent_general(f: MultilinearForm, xs: list[np.ndarray], cfg: AscentConfig):
    a = f.coeffs.array
    exps = [float(p) for p in f.domain_exps]
    m = f.order
    val = abs(float(contract(a, xs)))
    it = 0
    converged = False
    while it < cfg.max_iters:
        it += 1
        new = 0.0
        for t in range(m):
            c = contract(a, xs, skip=t)
            if np.any(c != 0.0):
                xs[t] = kernels.KERNELS.dual_step(c, exps[t])
            if t == m - 1:
                new = abs(float(c @ xs[t]))
        if new - val <= cfg.rel_tol * new:
            val = max(val, new)
            converged = True
            break
        val = new
    return val, xs, it, converged


def _run_start(f: MultilinearForm, cfg: AscentConfig, index: int):
    xs = _starts(f, cfg, index)
    if f.order == 2:
        val, x, y, it, conv = kernels.KERNELS.ascent2(
            f.coeffs.array, float(f.domain_exps[0]), float(f.domain_exps[1]),
            xs[0], xs[1], cfg.max_iters, cfg.rel_tol,
        )
        xs = [x, y]
    else:
        val, xs, it, conv = _ascent_general(f, xs, cfg)
    return val, xs, conv


def threads() -> int:
    try:
        return max(1, int(os.environ.get("HLLAB_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``map`` over a thread pool capped by ``HLLAB_THREADS``; output order is input order."""
    items = list(items)
    n = min(threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def estimate_norm(f: MultilinearForm, cfg: AscentConfig = AscentConfig()) -> NormCertificate:
    """Best value of alternating maximisation over ``cfg.multistarts`` starts.

    Start 0 is the normalised all-ones tuple; start ``k`` draws from a
    generator seeded by ``(cfg.seed, k)``, so a run with more starts
    extends a run with fewer.  One extra run starts from the basis vectors
    of the largest coefficient, so the value never falls below ``max |a|``.
    Ties go to the earliest start, the extra run last.
    """
    if np.all(f.coeffs.array == 0.0):
        xs = tuple(_starts(f, cfg, 0))
        return NormCertificate(0.0, xs, Method.ASCENT, True, cfg.multistarts)
    order = list(range(cfg.multistarts)) + [PEAK_START]
    results = ordered_map(lambda k: _run_start(f, cfg, k), order)
    best = max(range(len(results)), key=lambda k: (results[k][0], -k))
    _, xs, conv = results[best]
    xs = tuple(np.asarray(x, dtype=np.float64) for x in xs)
    value = abs(evaluate(f, xs))
    return NormCertificate(value, xs, Method.ASCENT, conv, cfg.multistarts)


def exact_norm_linf(f: MultilinearForm) -> NormCertificate:
    """Exact norm when every slot is ``l_inf``, by enumerating sign vertices.

    Sign vectors of slots ``1..m-1`` are enumerated (the first coordinate of
    slot 1 is fixed by symmetry); the last slot is solved by ``l_1`` duality.
    """
    if not all(p.is_inf for p in f.domain_exps):
        raise DomainError("exact enumeration needs every domain exponent = inf")
    dims = f.dims
    m = f.order
    if m == 1:
        x = np.where(f.coeffs.array >= 0.0, 1.0, -1.0)
        return NormCertificate(float(np.abs(f.coeffs.array).sum()), (x,), Method.ENUMERATION, True, 0)
    if sum(dims[:-1]) > 24:
        raise TooLarge(f"enumeration over 2^{sum(dims[:-1])} sign vectors exceeds the 2^24 guard")
    a = f.coeffs.array
    best_val = -1.0
    best = None
    outer = [itertools.product((1.0, -1.0), repeat=n) for n in dims[: m - 2]]
    for combo in itertools.product(*outer):
        vecs = [np.array(s) for s in combo]
        mat = a
        for v in vecs:
            mat = np.tensordot(v, mat, axes=(0, 0))
        s = kernels.KERNELS.linf_enum2(mat)
        c = s @ mat
        val = float(np.abs(c).sum())
        if val > best_val:
            best_val = val
            best = vecs + [s, np.where(c >= 0.0, 1.0, -1.0)]
    xs = tuple(best)
    value = abs(evaluate(f, xs))
    return NormCertificate(value, xs, Method.ENUMERATION, True, 0)


def _is_standard_basis(xs: np.ndarray) -> bool:
    return xs.ndim == 2 and xs.shape[0] == xs.shape[1] and np.array_equal(xs, np.eye(xs.shape[0]))


def weak_norm(xs, s: ExpLike, p: ExpLike, cfg: AscentConfig = AscentConfig()) -> NormCertificate:
    """Weak ``l_p`` norm of vectors ``x_1..x_N`` in ``l_s^n``.

    ``sup_{||z||_{s*} <= 1} (sum_j |<z, x_j>|^p)^(1/p)``, computed as the norm
    of the bilinear form ``(w, z) -> sum_j w_j <z, x_j>`` on ``l_{p*} x l_{s*}``.
    The standard basis is answered in closed form: ``n^max(0, 1/p - 1/s*)``.
    """
    s, p = xexp(s), xexp(p)
    if s < 1 or p < 1:
        raise DomainError("s, p must lie in [1, inf]")
    mat = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    if _is_standard_basis(mat):
        n = mat.shape[0]
        e = max(p.recip - conj(s).recip, 0)
        value = float(n) ** float(e)
        # witness: z spread evenly when 1/p > 1/s*, otherwise a basis vector
        if e > 0:
            z = _normalize(np.ones(n), conj(s))
        else:
            z = np.zeros(n)
            z[0] = 1.0
        w = dual_step(mat @ z, conj(p))
        return NormCertificate(value, (w, z), Method.CLOSED_FORM, True, 0)
    form = MultilinearForm(mat, [conj(p), conj(s)])
    return estimate_norm(form, cfg)


def escalate(cfg: AscentConfig, factor: int = 4) -> AscentConfig:
    return replace(cfg, multistarts=cfg.multistarts * factor)
