"""Multilinear forms on products of finite-dimensional l_p spaces."""

from __future__ import annotations

import enum
import json
from typing import Sequence

import numpy as np

from .errors import DimMismatch, DomainError
from .exponents import ExpLike, XExp, conj, xexp
from .tensor import DenseTensor


class WitnessKind(str, enum.Enum):
    U = "U"
    V = "V"
    KSZ = "KSZ"
    GAUSSIAN = "GAUSSIAN"


class MultilinearForm:
    """``T(x1, ..., xm) = sum coeffs[i1..im] x1[i1] ... xm[im]`` on ``l_{p1} x ... x l_{pm}``."""

    __slots__ = ("coeffs", "domain_exps")

    def __init__(self, coeffs, domain_exps: Sequence[ExpLike]):
        if not isinstance(coeffs, DenseTensor):
            coeffs = DenseTensor(coeffs)
        exps = tuple(xexp(p) for p in domain_exps)
        if len(exps) != coeffs.order:
            raise DimMismatch(f"{len(exps)} domain exponents for an order-{coeffs.order} tensor")
        for p in exps:
            if p < 1:
                raise DomainError(f"domain exponents must lie in [1, inf], got {p}")
        self.coeffs = coeffs
        self.domain_exps = exps

    @property
    def order(self) -> int:
        return self.coeffs.order

    @property
    def dims(self) -> tuple[int, ...]:
        return self.coeffs.dims

    def scaled(self, lam: float) -> "MultilinearForm":
        return MultilinearForm(self.coeffs * lam, self.domain_exps)

    def with_exps(self, domain_exps: Sequence[ExpLike]) -> "MultilinearForm":
        return MultilinearForm(self.coeffs, domain_exps)

    def __call__(self, *xs) -> float:
        return evaluate(self, xs)

    def __repr__(self) -> str:
        exps = ", ".join(str(p) for p in self.domain_exps)
        return f"MultilinearForm(dims={self.dims}, domain_exps=({exps}))"

    def to_json_obj(self) -> dict:
        obj = self.coeffs.to_json_obj()
        obj["domain_exps"] = [str(p) for p in self.domain_exps]
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MultilinearForm":
        t = DenseTensor.from_json_obj(obj)
        exps = obj.get("domain_exps")
        if exps is None:
            raise DimMismatch("form JSON needs a 'domain_exps' list")
        return cls(t, [XExp(str(e)) for e in exps])

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def loads(cls, text: str) -> "MultilinearForm":
        return cls.from_json_obj(json.loads(text))


def contract(coeffs: np.ndarray, xs: Sequence[np.ndarray], skip: int | None = None) -> np.ndarray:
    """Contract every axis except ``skip`` against its vector.

    Leading axes go first so each step shrinks the largest remaining array.
    """
    cur = coeffs
    m = coeffs.ndim
    # axes before `skip` from the front, then those after it from the back
    for t in range(m):
        if t == skip:
            break
        cur = np.tensordot(xs[t], cur, axes=(0, 0))
    if skip is not None:
        for t in range(m - 1, skip, -1):
            cur = cur @ xs[t]
    return cur


def evaluate(f: MultilinearForm, xs: Sequence) -> float:
    if len(xs) != f.order:
        raise DimMismatch(f"form takes {f.order} vectors, got {len(xs)}")
    vecs = [np.asarray(x, dtype=np.float64).reshape(-1) for x in xs]
    for t, (v, n) in enumerate(zip(vecs, f.dims)):
        if v.shape[0] != n:
            raise DimMismatch(f"slot {t} expects length {n}, got {v.shape[0]}")
    return float(contract(f.coeffs.array, vecs))


def witness(kind: WitnessKind | str, m: int, n: int, seed: int = 0, domain_exps: Sequence[ExpLike] | None = None) -> MultilinearForm:
    """Build a witness form; random kinds are deterministic per ``(kind, m, n, seed)``.

    ``U``: ``x_1 * sum_j y_j``.  ``V``: ``sum_j x_j y_j``.  ``KSZ``: uniform
    random signs.  ``GAUSSIAN``: standard normal entries.  Domain exponents
    default to ``inf`` in every slot.
    """
    kind = WitnessKind(kind)
    if n < 1:
        raise DomainError("n must be positive")
    if kind in (WitnessKind.U, WitnessKind.V):
        if m != 2:
            raise DomainError(f"{kind.value} witness is bilinear only (m = 2)")
        a = np.zeros((n, n))
        if kind is WitnessKind.U:
            a[0, :] = 1.0
        else:
            np.fill_diagonal(a, 1.0)
    else:
        if m < 2:
            raise DomainError("random witnesses need m >= 2")
        rng = np.random.default_rng([int(seed) & (2**64 - 1), n, m, 0 if kind is WitnessKind.KSZ else 1])
        shape = (n,) * m
        if kind is WitnessKind.KSZ:
            a = rng.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0
        else:
            a = rng.standard_normal(shape)
    exps = domain_exps if domain_exps is not None else [XExp.INF] * m
    return MultilinearForm(DenseTensor(a), exps)


def closed_form_norm(kind: WitnessKind | str, p: ExpLike, q: ExpLike, n: int) -> float:
    """Exact norm of ``U_n`` or ``V_n`` on ``l_p^n x l_q^n``.

    ``||U_n|| = n^(1/q*)``; ``||V_n|| = n^max(0, 1 - 1/p - 1/q)``.
    """
    kind = WitnessKind(kind)
    p, q = xexp(p), xexp(q)
    if p < 1 or q < 1:
        raise DomainError("p, q must be >= 1")
    if kind is WitnessKind.U:
        e = conj(q).recip
    elif kind is WitnessKind.V:
        e = max(1 - p.recip - q.recip, 0)
    else:
        raise DomainError(f"no closed-form norm for {kind.value}")
    return float(n) ** float(e)
