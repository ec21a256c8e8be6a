"""Exact extended exponents and the closed-form exponent calculus.

Every quantity here is a nonnegative rational or infinity.  Formulas are
evaluated on reciprocals wherever possible: ``1/inf = 0`` turns the
infinite endpoints into ordinary rationals, so no case splits are needed
for ``p = inf`` or ``b = inf``.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, ExponentOverflow, Unclassified

_LIMIT = 2**63 - 1

ExpLike = Union["XExp", int, Fraction, str]


def _check64(fr: Fraction) -> Fraction:
    if abs(fr.numerator) > _LIMIT or fr.denominator > _LIMIT:
        raise ExponentOverflow(f"{fr} does not fit in 64-bit numerator/denominator")
    return fr


def _parse(text: str) -> Fraction | None:
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "∞"):
        return None
    if "." in s or "e" in s:
        raise DomainError(f"exact rational required, got {text!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse exponent {text!r}") from None


@functools.total_ordering
class XExp:
    """A nonnegative rational with 64-bit components, or ``INF``.

    Accepts ints, ``Fraction``, other ``XExp`` and strings such as ``"4"``,
    ``"4/3"`` or ``"inf"``.  Decimal strings and non-integral floats are
    rejected: boundary cases depend on exact values.
    """

    __slots__ = ("_q",)
    INF: "XExp"

    def __init__(self, value: ExpLike | float = 0):
        if isinstance(value, XExp):
            q = value._q
        elif isinstance(value, str):
            q = _parse(value)
        elif isinstance(value, bool):
            raise TypeError("bool is not an exponent")
        elif isinstance(value, (int, Fraction)):
            q = Fraction(value)
        elif isinstance(value, float):
            if value == float("inf"):
                q = None
            elif value.is_integer():
                q = Fraction(int(value))
            else:
                raise DomainError(f"exact rational required, got float {value!r}")
        else:
            raise TypeError(f"cannot build XExp from {type(value).__name__}")
        if q is not None:
            if q < 0:
                raise DomainError(f"exponents are nonnegative, got {q}")
            _check64(q)
        self._q = q

    @classmethod
    def from_recip(cls, r: Fraction) -> "XExp":
        """Build ``1/r``; ``r = 0`` gives ``INF``."""
        if r < 0:
            raise DomainError(f"reciprocal {r} is negative")
        return cls.INF if r == 0 else cls(1 / Fraction(r))

    @property
    def is_inf(self) -> bool:
        return self._q is None

    @property
    def fraction(self) -> Fraction:
        if self._q is None:
            raise DomainError("INF has no finite rational value")
        return self._q

    @property
    def recip(self) -> Fraction:
        """``1/self`` as a finite rational (``1/inf = 0``)."""
        if self._q is None:
            return Fraction(0)
        if self._q == 0:
            raise DomainError("1/0 is infinite; use reciprocal()")
        return 1 / self._q

    def reciprocal(self) -> "XExp":
        if self._q is None:
            return XExp(0)
        if self._q == 0:
            return XExp.INF
        return XExp(1 / self._q)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other: ExpLike) -> "XExp":
        o = xexp(other)
        if self.is_inf or o.is_inf:
            return XExp.INF
        return XExp(self._q + o._q)

    __radd__ = __add__

    def __sub__(self, other: ExpLike) -> "XExp":
        o = xexp(other)
        if o.is_inf:
            raise DomainError("subtracting INF")
        if self.is_inf:
            return XExp.INF
        d = self._q - o._q
        if d < 0:
            raise DomainError(f"{self} - {o} is negative")
        return XExp(d)

    def __rsub__(self, other: ExpLike) -> "XExp":
        return xexp(other) - self

    def __mul__(self, other: ExpLike) -> "XExp":
        o = xexp(other)
        if self.is_inf or o.is_inf:
            if self == 0 or o == 0:
                raise DomainError("0 * INF is undefined")
            return XExp.INF
        return XExp(self._q * o._q)

    __rmul__ = __mul__

    def __truediv__(self, other: ExpLike) -> "XExp":
        o = xexp(other)
        if o.is_inf:
            if self.is_inf:
                raise DomainError("INF / INF is undefined")
            return XExp(0)
        if o._q == 0:
            if self == 0:
                raise DomainError("0 / 0 is undefined")
            return XExp.INF
        if self.is_inf:
            return XExp.INF
        return XExp(self._q / o._q)

    def __rtruediv__(self, other: ExpLike) -> "XExp":
        return xexp(other) / self

    # comparison ---------------------------------------------------------
    def _key(self):
        return (1, 0) if self._q is None else (0, self._q)

    def __eq__(self, other) -> bool:
        try:
            o = xexp(other)
        except (TypeError, DomainError):
            return NotImplemented
        return self._q == o._q

    def __lt__(self, other) -> bool:
        return self._key() < xexp(other)._key()

    def __hash__(self) -> int:
        return hash(("XExp", self._q))

    def __float__(self) -> float:
        return float("inf") if self._q is None else float(self._q)

    def __str__(self) -> str:
        return "inf" if self._q is None else str(self._q)

    def __repr__(self) -> str:
        return f"XExp('{self}')"

    def __reduce__(self):
        return (XExp, (str(self),))


XExp.INF = object.__new__(XExp)
XExp.INF._q = None
INF = XExp.INF


def xexp(value: ExpLike | float) -> XExp:
    """Coerce to :class:`XExp` (no copy when already one)."""
    return value if isinstance(value, XExp) else XExp(value)


class Constraint(str, enum.Enum):
    A_LOWER = "A_LOWER"
    B_LOWER = "B_LOWER"
    SUM_CONDITION = "SUM_CONDITION"
    PQ_DEGENERATE = "PQ_DEGENERATE"


class RegionLabel(str, enum.Enum):
    ADMISSIBLE = "ADMISSIBLE"
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    P2_FAIL = "P2_FAIL"
    PQ_DEGENERATE = "PQ_DEGENERATE"


@dataclass(frozen=True)
class Classification:
    admissible: bool
    on_boundary: bool
    failed_constraints: tuple[Constraint, ...] = ()

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "on_boundary": self.on_boundary,
            "failed_constraints": [c.value for c in self.failed_constraints],
        }


def conj(p: ExpLike) -> XExp:
    """Conjugate exponent: ``1/p + 1/p* = 1`` with ``1* = inf``."""
    p = xexp(p)
    if p < 1:
        raise DomainError(f"conjugate needs p >= 1, got {p}")
    return XExp.from_recip(1 - p.recip)


def _require_pq(p: XExp, q: XExp) -> None:
    if p < 2 or q < 2:
        raise DomainError(f"p, q must lie in [2, inf], got p={p}, q={q}")


def _classify(first: XExp, p: XExp, q: XExp, a: XExp, b: XExp) -> Classification:
    # `first` is the exponent whose conjugate bounds `a` from below
    _require_pq(p, q)
    if a == 0 or b == 0:
        raise DomainError("a, b must be positive")
    ip, iq = p.recip, q.recip
    s = ip + iq
    if s >= 1:
        return Classification(False, False, (Constraint.PQ_DEGENERATE,))
    ia, ib = a.recip, b.recip
    # a >= first*  <=>  1/a <= 1 - 1/first ; b >= pq/(pq-p-q)  <=>  1/b <= 1 - s
    checks = [
        (Constraint.A_LOWER, ia, 1 - first.recip),
        (Constraint.B_LOWER, ib, 1 - s),
        (Constraint.SUM_CONDITION, ia + ib, Fraction(3, 2) - s),
    ]
    failed = tuple(c for c, lhs, rhs in checks if lhs > rhs)
    if failed:
        return Classification(False, False, failed)
    return Classification(True, any(lhs == rhs for _, lhs, rhs in checks))


def hl_admissible(p: ExpLike, q: ExpLike, a: ExpLike, b: ExpLike) -> Classification:
    """Classify ``(a, b)`` for the anisotropic Hardy-Littlewood inequality.

    ``a`` is the inner exponent (over ``j``), ``b`` the outer one (over ``i``).
    """
    p, q, a, b = map(xexp, (p, q, a, b))
    return _classify(q, p, q, a, b)


def hl_admissible_reversed(p: ExpLike, q: ExpLike, a: ExpLike, b: ExpLike) -> Classification:
    """Same classification with the order of summation swapped."""
    p, q, a, b = map(xexp, (p, q, a, b))
    return _classify(p, p, q, a, b)


_GRID_LIMIT = 2**15
FAIL_A, FAIL_B, FAIL_SUM, FAIL_PQ = 1, 2, 4, 8


def _recip_pairs(values: Sequence[ExpLike]):
    num, den = [], []
    for v in values:
        r = xexp(v).recip
        if r.numerator >= _GRID_LIMIT or r.denominator >= _GRID_LIMIT:
            raise ExponentOverflow(f"{v} is too large for the vectorised classifier")
        num.append(r.numerator)
        den.append(r.denominator)
    return np.asarray(num, dtype=np.int64), np.asarray(den, dtype=np.int64)


def classify_grid(ps, qs, as_, bs, reversed: bool = False):
    """Exact classification of every ``(p, q, a, b)`` in a Cartesian grid.

    Returns ``(admissible, on_boundary, failed)`` arrays of shape
    ``(len(ps), len(qs), len(as_), len(bs))``; ``failed`` is a bit mask of
    ``FAIL_A | FAIL_B | FAIL_SUM`` (or ``FAIL_PQ`` alone).  Reciprocals are
    compared by integer cross-multiplication, so numerators and denominators
    are limited to 15 bits.
    """
    for v in list(ps) + list(qs):
        if xexp(v) < 2:
            raise DomainError(f"p, q must lie in [2, inf], got {v}")
    for v in list(as_) + list(bs):
        if xexp(v) == 0:
            raise DomainError("a, b must be positive")
    (pn, pd), (qn, qd), (an, ad), (bn, bd) = (_recip_pairs(v) for v in (ps, qs, as_, bs))
    pn, pd = pn[:, None, None, None], pd[:, None, None, None]
    qn, qd = qn[None, :, None, None], qd[None, :, None, None]
    an, ad = an[None, None, :, None], ad[None, None, :, None]
    bn, bd = bn[None, None, None, :], bd[None, None, None, :]
    fn, fd = (pn, pd) if reversed else (qn, qd)
    pq = pd * qd
    one_minus_s = pq - pn * qd - qn * pd  # (1 - 1/p - 1/q) * pq
    fail_a = an * fd > (fd - fn) * ad
    fail_b = bn * pq > one_minus_s * bd
    lhs = 2 * (an * bd + bn * ad) * pq
    rhs = (2 * one_minus_s + pq) * ad * bd  # (3/2 - s) * 2pq
    fail_sum = lhs > rhs
    eq_a = an * fd == (fd - fn) * ad
    eq_b = bn * pq == one_minus_s * bd
    eq_sum = lhs == rhs
    failed = fail_a * FAIL_A + fail_b * FAIL_B + fail_sum * FAIL_SUM
    failed = np.where(one_minus_s <= 0, FAIL_PQ, failed).astype(np.int8)
    admissible = failed == 0
    on_boundary = admissible & (eq_a | eq_b | eq_sum)
    return admissible, on_boundary, failed


def region_label(p: ExpLike, q: ExpLike, r1: ExpLike, r2: ExpLike) -> RegionLabel:
    """Locate ``(r1, r2)`` among the admissible set and the blow-up regions.

    Raises :class:`Unclassified` for non-admissible pairs covered by no
    region, e.g. ``r1 < q*`` with ``r2 = 2p/(p-2)`` exactly.
    """
    p, q, r1, r2 = map(xexp, (p, q, r1, r2))
    _require_pq(p, q)
    if r1 < 1 or r2 < 1:
        raise DomainError("r1, r2 must be >= 1")
    cls = hl_admissible(p, q, r1, r2)
    if Constraint.PQ_DEGENERATE in cls.failed_constraints:
        return RegionLabel.PQ_DEGENERATE
    if cls.admissible:
        return RegionLabel.ADMISSIBLE
    if p == 2:
        return RegionLabel.P2_FAIL
    ip, iq, i1, i2 = p.recip, q.recip, r1.recip, r2.recip
    s = ip + iq
    iqc = 1 - iq  # 1/q*
    half_gap = Fraction(1, 2) - ip  # 1/(2p/(p-2))
    if iqc >= i1 >= Fraction(1, 2) and i1 + i2 > Fraction(3, 2) - s:
        return RegionLabel.R1
    if i1 > iqc and i2 > half_gap:
        return RegionLabel.R2
    if i1 > iqc and i2 < half_gap:
        return RegionLabel.R3
    if i1 < Fraction(1, 2) and i2 > 1 - s:
        return RegionLabel.R4
    raise Unclassified(f"(r1, r2) = ({r1}, {r2}) at (p, q) = ({p}, {q}) lies in no region")


def blowup_exponent(p: ExpLike, q: ExpLike, r1: ExpLike, r2: ExpLike) -> XExp:
    """Optimal dimension blow-up exponent for a non-admissible ``(r1, r2)``."""
    p, q, r1, r2 = map(xexp, (p, q, r1, r2))
    label = region_label(p, q, r1, r2)
    s = p.recip + q.recip
    i1, i2 = r1.recip, r2.recip
    iqc = 1 - q.recip
    if label in (RegionLabel.R1, RegionLabel.R2):
        t = i1 + i2 - (Fraction(3, 2) - s)
    elif label is RegionLabel.R3:
        t = i1 - iqc
    elif label is RegionLabel.R4:
        t = i2 - (1 - s)
    elif label is RegionLabel.P2_FAIL:
        t = i1 + i2 - iqc
    else:
        raise DomainError(f"no blow-up exponent for region {label.value}")
    if t <= 0:
        raise DomainError(f"blow-up formula gives non-positive exponent {t} for region {label.value}")
    return XExp(t)


def blowup_exponents_rect(q: ExpLike, r1: ExpLike, r2: ExpLike) -> tuple[XExp, XExp]:
    """Exponents of ``n1`` and ``n2`` on rectangular ``n1 x n2`` forms when ``1/p + 1/q >= 1``."""
    q, r1, r2 = map(xexp, (q, r1, r2))
    if q <= 1:
        raise DomainError("q must exceed 1")
    if r1 < 1 or r2 < 1:
        raise DomainError("r1, r2 must be >= 1")
    big = max(r1, conj(q))
    return XExp(r2.recip), XExp(r1.recip - big.recip)


def rp_exponent(k: int, p1: ExpLike, p2: ExpLike) -> XExp:
    """Composite exponent ``p1 p2 / (k p1 - (k-1) p2)`` of the regularity principle."""
    p1, p2 = xexp(p1), xexp(p2)
    if k < 1:
        raise DomainError("k must be a positive integer")
    if p1 < 1 or p2 < p1:
        raise DomainError(f"need 1 <= p1 <= p2, got p1={p1}, p2={p2}")
    if k == 1:
        return p2
    if p2.is_inf:
        raise DomainError("p2 must be finite when k >= 2")
    a, b = p1.fraction, p2.fraction
    den = k * a - (k - 1) * b
    if den <= 0:
        raise DomainError(f"p2 must be < k p1/(k-1) = {Fraction(k) * a / (k - 1)}")
    return XExp(a * b / den)


def inclusion_exponent(m: int, r: ExpLike, s: ExpLike, u: ExpLike) -> XExp:
    """Target summing exponent ``rsu / (su + mrs - mru)`` of the inclusion theorem."""
    r, s, u = map(xexp, (r, s, u))
    if m < 1:
        raise DomainError("m must be a positive integer")
    if r.is_inf or s.is_inf or u.is_inf:
        raise DomainError("r, s, u must be finite")
    if r == 0 or s < 1 or u < s:
        raise DomainError(f"need r > 0 and 1 <= s <= u, got r={r}, s={s}, u={u}")
    rf, sf, uf = r.fraction, s.fraction, u.fraction
    den = sf * uf + m * rf * sf - m * rf * uf
    if den <= 0:
        raise DomainError(f"u = {u} is outside the strip u < mrs/(mr - s)")
    return XExp(rf * sf * uf / den)


def anisotropic_ok(r1: ExpLike, p1: ExpLike, r3: ExpLike, p3: ExpLike) -> bool:
    """Hypothesis ``1/r1 - 1/p1 <= 1/r3 - 1/p3`` of the anisotropic regularity principle."""
    r1, p1, r3, p3 = map(xexp, (r1, p1, r3, p3))
    if min(r1, p1, r3, p3) < 1:
        raise DomainError("all exponents must be >= 1")
    if p3 < p1 or r3 < r1:
        raise DomainError("need p3 >= p1 and r3 >= r1")
    return r1.recip - p1.recip <= r3.recip - p3.recip


def bh_hl_admissible(ps: Sequence[ExpLike], qs: Sequence[ExpLike]) -> bool:
    """Sum condition for the generalized m-linear Hardy-Littlewood inequality.

    Only defined on its natural cube: ``|1/p| <= 1/2`` and every
    ``q_j in [(1 - |1/p|)^-1, 2]``; outside it a :class:`DomainError` is raised.
    """
    ps = [xexp(p) for p in ps]
    qs = [xexp(q) for q in qs]
    if len(ps) != len(qs) or not ps:
        raise DomainError("ps and qs must be nonempty and of equal length")
    if any(p < 1 for p in ps):
        raise DomainError("p_j must be >= 1")
    m = len(ps)
    inv_p = sum((p.recip for p in ps), Fraction(0))
    if inv_p > Fraction(1, 2):
        raise DomainError(f"|1/p| = {inv_p} exceeds 1/2")
    lo = XExp.from_recip(1 - inv_p)
    for q in qs:
        if q < lo or q > 2:
            raise DomainError(f"q_j = {q} outside [{lo}, 2]")
    return sum((q.recip for q in qs), Fraction(0)) <= Fraction(m + 1, 2) - inv_p


def qq2211_tuple(m: int, p: ExpLike) -> list[XExp]:
    """Globally sharp m-tuple ``(2p/(p-2), 2(m-1)p/(mp-2m+2), ...)``."""
    p = xexp(p)
    if m < 3:
        raise DomainError("m must be at least 3")
    if p < 2 * m - 2:
        raise DomainError(f"p must be >= 2m - 2 = {2 * m - 2}")
    ip = p.recip
    first = XExp.from_recip(Fraction(1, 2) - ip)
    rest = XExp.from_recip(Fraction(m, 2 * (m - 1)) - ip)
    return [first] + [rest] * (m - 1)


def reciprocal_sum(values: Iterable[ExpLike]) -> Fraction:
    return sum((xexp(v).recip for v in values), Fraction(0))


def boundary_b(p: ExpLike, q: ExpLike, a: ExpLike) -> XExp:
    """Smallest ``b`` with ``(a, b)`` admissible for the given ``a``."""
    p, q, a = map(xexp, (p, q, a))
    _require_pq(p, q)
    s = p.recip + q.recip
    if s >= 1:
        raise DomainError("need 1/p + 1/q < 1")
    if a < conj(q):
        raise DomainError(f"a = {a} is below q* = {conj(q)}")
    slack = Fraction(3, 2) - s - a.recip
    if slack <= 0:
        return XExp.INF
    return XExp.from_recip(min(1 - s, slack))
