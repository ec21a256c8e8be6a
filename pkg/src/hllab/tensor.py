"""Dense coefficient tensors and nested (anisotropic) mixed norms."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimMismatch, DomainError, SpecMismatch
from .exponents import ExpLike, XExp, xexp

DEFAULT_RTOL = 1e-12


class DenseTensor:
    """Order-m real array stored row-major, read-only after construction."""

    __slots__ = ("_a",)

    def __init__(self, data, dims: Sequence[int] | None = None):
        a = np.array(data, dtype=np.float64, copy=True)
        if dims is not None:
            dims = tuple(int(d) for d in dims)
            if any(d < 1 for d in dims):
                raise DimMismatch(f"dims must be positive, got {dims}")
            if a.size != int(np.prod(dims)):
                raise DimMismatch(f"{a.size} entries cannot fill dims {dims}")
            a = a.reshape(dims)
        if a.ndim < 1 or a.size == 0:
            raise DimMismatch("tensor must have order >= 1 and positive dims")
        if not np.all(np.isfinite(a)):
            raise DomainError("tensor entries must be finite")
        a.flags.writeable = False
        self._a = a

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def order(self) -> int:
        return self._a.ndim

    @property
    def dims(self) -> tuple[int, ...]:
        return self._a.shape

    @property
    def data(self) -> np.ndarray:
        return self._a.reshape(-1)

    def __mul__(self, scalar: float) -> "DenseTensor":
        return DenseTensor(self._a * float(scalar))

    __rmul__ = __mul__

    def __add__(self, other: "DenseTensor") -> "DenseTensor":
        if self.dims != other.dims:
            raise DimMismatch(f"{self.dims} vs {other.dims}")
        return DenseTensor(self._a + other._a)

    def transpose(self, axes: Sequence[int] | None = None) -> "DenseTensor":
        return DenseTensor(np.transpose(self._a, axes))

    def __eq__(self, other) -> bool:
        return isinstance(other, DenseTensor) and self.dims == other.dims and np.array_equal(self._a, other._a)

    def __repr__(self) -> str:
        return f"DenseTensor(dims={self.dims})"

    # JSON ---------------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {"order": self.order, "dims": list(self.dims), "data": self.data.tolist()}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DenseTensor":
        try:
            order, dims, data = obj["order"], obj["dims"], obj["data"]
        except (KeyError, TypeError) as exc:
            raise DimMismatch(f"tensor JSON missing field {exc}") from None
        if not isinstance(dims, list) or len(dims) != order:
            raise DimMismatch(f"order {order} disagrees with dims {dims}")
        if not isinstance(data, list):
            raise DimMismatch("data must be a flat list")
        expected = 1
        for d in dims:
            if not isinstance(d, int) or d < 1:
                raise DimMismatch(f"bad dimension {d!r}")
            expected *= d
        if len(data) != expected:
            raise DimMismatch(f"data has {len(data)} entries, dims require {expected}")
        return cls(data, dims)

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def loads(cls, text: str) -> "DenseTensor":
        return cls.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class MixedNormSpec:
    """Per-axis exponents, outermost axis first."""

    exponents: tuple[XExp, ...]

    def __init__(self, exponents: Sequence[ExpLike]):
        exps = tuple(xexp(e) for e in exponents)
        for e in exps:
            if e < 1:
                raise DomainError(f"mixed-norm exponents must be >= 1, got {e}")
        object.__setattr__(self, "exponents", exps)

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)


def as_spec(spec) -> MixedNormSpec:
    return spec if isinstance(spec, MixedNormSpec) else MixedNormSpec(spec)


def lp_norm(x: np.ndarray, p: ExpLike | float, axis: int = -1) -> np.ndarray:
    """``l_p`` norm along one axis, rescaled by the max to avoid over/underflow."""
    pf = float(p)
    ax = np.abs(np.asarray(x, dtype=np.float64))
    if pf == np.inf:
        return ax.max(axis=axis)
    if pf == 1.0:
        return ax.sum(axis=axis)
    if pf == 2.0:
        scale = ax.max(axis=axis, keepdims=True)
        safe = np.where(scale > 0, scale, 1.0)
        return np.sqrt(((ax / safe) ** 2).sum(axis=axis)) * np.squeeze(safe, axis=axis)
    scale = ax.max(axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return ((ax / safe) ** pf).sum(axis=axis) ** (1.0 / pf) * np.squeeze(safe, axis=axis)


def mixed_norm_array(a: np.ndarray, spec: Sequence[ExpLike]) -> float:
    """Nested norm of a raw array; innermost (last) axis reduced first."""
    spec = as_spec(spec)
    a = np.asarray(a, dtype=np.float64)
    if len(spec) != a.ndim:
        raise SpecMismatch(f"spec has {len(spec)} exponents, tensor has order {a.ndim}")
    cur = np.abs(a)
    for e in reversed(spec.exponents):
        cur = lp_norm(cur, e, axis=-1)
    return float(cur)


def mixed_norm(t: DenseTensor, spec: Sequence[ExpLike] | MixedNormSpec) -> float:
    """Nested ``l_{q1}(l_{q2}(... l_{qm}))`` norm of ``t``; ``inf`` is a sup."""
    return mixed_norm_array(t.array, spec)


def _as_matrix(a) -> np.ndarray:
    arr = a.array if isinstance(a, DenseTensor) else np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimMismatch("expected an order-2 tensor")
    return arr


def minkowski_check(a, p: ExpLike, q: ExpLike, rtol: float = DEFAULT_RTOL) -> tuple[float, float, bool]:
    """Compare ``l_q(l_p)`` over (rows, columns) with ``l_p(l_q)`` over (columns, rows).

    For ``1 <= p <= q`` the first never exceeds the second.
    """
    p, q = xexp(p), xexp(q)
    if p < 1:
        raise DomainError("p must be >= 1")
    if p > q:
        raise DomainError(f"need p <= q, got p={p}, q={q}")
    m = _as_matrix(a)
    lhs = mixed_norm_array(m, (q, p))
    rhs = mixed_norm_array(m.T, (p, q))
    return lhs, rhs, lhs <= rhs * (1 + rtol)


def interpolate_spec(spec1, spec2, theta: ExpLike) -> MixedNormSpec:
    """Exponents whose reciprocals are ``theta/spec1 + (1 - theta)/spec2``, exactly."""
    s1, s2 = as_spec(spec1), as_spec(spec2)
    if len(s1) != len(s2):
        raise SpecMismatch("specs differ in length")
    th = xexp(theta)
    if th > 1:
        raise DomainError(f"theta must lie in [0, 1], got {th}")
    t = th.fraction
    return MixedNormSpec(
        [XExp.from_recip(t * e1.recip + (1 - t) * e2.recip) for e1, e2 in zip(s1, s2)]
    )


def interp_holder_check(a, spec1, spec2, theta: ExpLike, rtol: float = DEFAULT_RTOL) -> tuple[float, float, bool]:
    """Interpolative Hoelder inequality for mixed norms at a given ``theta``."""
    arr = a.array if isinstance(a, DenseTensor) else np.asarray(a, dtype=np.float64)
    mid = interpolate_spec(spec1, spec2, theta)
    t = float(xexp(theta).fraction)
    lhs = mixed_norm_array(arr, mid)
    n1 = mixed_norm_array(arr, spec1)
    n2 = mixed_norm_array(arr, spec2)
    rhs = (n1**t if t > 0 else 1.0) * (n2 ** (1.0 - t) if t < 1 else 1.0)
    return lhs, rhs, lhs <= rhs * (1 + rtol)
