"""Hardy-Littlewood quotients, blow-up slope fits and inequality checks.

Norm denominators are certified lower bounds, so every quotient computed
here over-estimates the true one.  Inequality checks therefore report
``VERIFIED`` or ``INCONCLUSIVE``, never a violation: a lower bound on
``||T||`` can prove ``lhs <= ||T||`` but cannot refute it.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimMismatch, DomainError, ZeroNorm
from .exponents import ExpLike, RegionLabel, XExp, conj, region_label, xexp
from .forms import MultilinearForm, WitnessKind, closed_form_norm, witness
from .optnorm import (
    ENUM_GUARD,
    AscentConfig,
    NormCertificate,
    escalate,
    estimate_norm,
    exact_norm_linf,
    ordered_map,
    weak_norm,
)
from .tensor import MixedNormSpec, as_spec, lp_norm, mixed_norm, mixed_norm_array


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[int, float], ...]
    # per-n spread and trial count, filled by the random sweeps
    trials: tuple[int, ...] = ()
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points": [[n, v] for n, v in self.points],
        }

    def rows(self) -> list[tuple[int, float, int, float, float]]:
        trials = self.trials or (1,) * len(self.points)
        lo = self.lo or tuple(v for _, v in self.points)
        hi = self.hi or tuple(v for _, v in self.points)
        return [(n, v, t, a, b) for (n, v), t, a, b in zip(self.points, trials, lo, hi)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "value", "trials", "lo", "hi"])
        for n, v, t, a, b in self.rows():
            w.writerow([n, repr(v), t, repr(a), repr(b)])
        return buf.getvalue()


class Status(str, enum.Enum):
    VERIFIED = "VERIFIED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Record:
    n: int
    lhs: float
    norm_lower_bound: float
    status: Status
    kind: str = ""
    escalated: bool = False


@dataclass(frozen=True)
class VerificationReport:
    records: tuple[Record, ...] = field(default=())

    @property
    def total(self) -> int:
        return len(self.records)

    @property
    def verified(self) -> int:
        return sum(r.status is Status.VERIFIED for r in self.records)

    @property
    def inconclusive(self) -> int:
        return self.total - self.verified

    @property
    def worst_margin(self) -> float:
        margins = [
            (r.norm_lower_bound - r.lhs) / r.norm_lower_bound
            for r in self.records
            if r.status is Status.VERIFIED and r.norm_lower_bound > 0
        ]
        return min(margins) if margins else math.nan

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "verified": self.verified,
            "inconclusive": self.inconclusive,
            "worst_margin": self.worst_margin,
            "records": [
                {
                    "n": r.n,
                    "kind": r.kind,
                    "lhs": r.lhs,
                    "norm_lower_bound": r.norm_lower_bound,
                    "status": r.status.value,
                    "escalated": r.escalated,
                }
                for r in self.records
            ],
        }


def hl_quotient(f: MultilinearForm, spec, cert: NormCertificate) -> float:
    """Mixed norm of the coefficients divided by the certified norm."""
    if cert.value == 0:
        raise ZeroNorm("certificate value is zero")
    return mixed_norm(f.coeffs, spec) / cert.value


def fit_rate(points: Sequence[tuple[int, float]]) -> RateFit:
    """Ordinary least squares of ``log value`` on ``log n``."""
    pts = [(int(n), float(v)) for n, v in points]
    if len(pts) < 3:
        raise DomainError("need at least 3 points")
    ns = [n for n, _ in pts]
    if any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
        raise DomainError("n must be positive and strictly increasing")
    if any(not v > 0 or not math.isfinite(v) for _, v in pts):
        raise DomainError("values must be finite and positive")
    x = np.log(np.array(ns, dtype=np.float64))
    y = np.log(np.array([v for _, v in pts]))
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = float((dx * (y - ym)).sum() / (dx * dx).sum())
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    ss_tot = float(((y - ym) ** 2).sum())
    # a flat series (up to rounding in the logs) is fitted exactly
    r2 = 1.0 if ss_tot <= len(pts) * 1e-28 else 1.0 - float((resid**2).sum()) / ss_tot
    return RateFit(slope, intercept, r2, tuple(pts))


def _fit_medians(ns: Sequence[int], samples: Sequence[Sequence[float]]) -> RateFit:
    med = [float(np.median(s)) for s in samples]
    base = fit_rate(list(zip(ns, med)))
    return RateFit(
        base.slope, base.intercept, base.r_squared, base.points,
        trials=tuple(len(s) for s in samples),
        lo=tuple(float(np.min(s)) for s in samples),
        hi=tuple(float(np.max(s)) for s in samples),
    )


def _enumerable(f: MultilinearForm) -> bool:
    return all(p.is_inf for p in f.domain_exps) and 2 ** sum(f.dims[:-1]) <= ENUM_GUARD


def best_norm(f: MultilinearForm, cfg: AscentConfig) -> NormCertificate:
    """Exact enumeration when available, otherwise the ascent lower bound."""
    return exact_norm_linf(f) if _enumerable(f) else estimate_norm(f, cfg)


def _random_seeds(seed: int, count: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def witness_sweep(
    kind: WitnessKind | str,
    p: ExpLike,
    q: ExpLike,
    r1: ExpLike,
    r2: ExpLike,
    ns: Sequence[int],
    cfg: AscentConfig = AscentConfig(),
    trials: int = 20,
    seed: int = 0,
) -> RateFit:
    """Fit the growth of the ``(r2 outer, r1 inner)`` quotient of a witness family.

    U and V use their exact norms.  Random kinds take the median over
    ``trials`` seeds with exact enumeration when ``p = q = inf``.
    """
    kind = WitnessKind(kind)
    p, q, r1, r2 = map(xexp, (p, q, r1, r2))
    if region_label(p, q, r1, r2) is RegionLabel.ADMISSIBLE:
        raise DomainError(f"(r1, r2) = ({r1}, {r2}) is admissible; nothing blows up")
    spec = MixedNormSpec((r2, r1))
    if kind in (WitnessKind.U, WitnessKind.V):
        pts = []
        for n in ns:
            f = witness(kind, 2, n)
            pts.append((n, mixed_norm(f.coeffs, spec) / closed_form_norm(kind, p, q, n)))
        return fit_rate(pts)
    seeds = _random_seeds(seed, trials)

    def one(args):
        n, s = args
        f = witness(kind, 2, n, s, domain_exps=(p, q))
        return hl_quotient(f, spec, best_norm(f, cfg))

    samples = [ordered_map(one, [(n, s) for s in seeds]) for n in ns]
    return _fit_medians(ns, samples)


def ksz_predicted(m: int, ps: Sequence[ExpLike]) -> Fraction:
    return Fraction(m + 1, 2) - sum((xexp(p).recip for p in ps), Fraction(0))


def ksz_norm_scaling(
    m: int,
    ps: Sequence[ExpLike],
    ns: Sequence[int],
    trials: int = 20,
    seed: int = 0,
    cfg: AscentConfig = AscentConfig(),
) -> RateFit:
    """Median norm of random-sign m-linear forms against ``n``.

    The fitted slope is compared with ``(m+1)/2 - sum 1/p_k``.
    """
    ps = [xexp(p) for p in ps]
    if m < 2 or len(ps) != m:
        raise DomainError("need m >= 2 and one exponent per slot")
    if any(p < 2 for p in ps):
        raise DomainError("exponents must be >= 2")
    seeds = _random_seeds(seed, trials)

    def one(args):
        n, s = args
        return best_norm(witness(WitnessKind.KSZ, m, n, s, domain_exps=ps), cfg).value

    samples = [ordered_map(one, [(n, s) for s in seeds]) for n in ns]
    return _fit_medians(ns, samples)


def flat_norm_exponent(m: int, p: ExpLike) -> XExp:
    """``2p/(p - 2m)``; requires ``p > 2m``."""
    p = xexp(p)
    if not p > 2 * m:
        raise DomainError(f"need p > 2m = {2 * m}, got {p}")
    return XExp.from_recip(Fraction(1, 2) - m * p.recip)


def verify_flat_norm(f: MultilinearForm, p: ExpLike, cfg: AscentConfig = AscentConfig(), kind: str = "") -> Record:
    """Check ``||coeffs||_{2p/(p-2m)} <= ||f||`` on ``l_p^n`` with one x4 escalation."""
    m = f.order
    e = flat_norm_exponent(m, p)
    g = f.with_exps([xexp(p)] * m)
    lhs = float(lp_norm(g.coeffs.data, e))
    n = g.dims[0]
    bound = estimate_norm(g, cfg).value
    if lhs <= bound:
        return Record(n, lhs, bound, Status.VERIFIED, kind)
    bound = max(bound, estimate_norm(g, escalate(cfg)).value)
    status = Status.VERIFIED if lhs <= bound else Status.INCONCLUSIVE
    return Record(n, lhs, bound, status, kind, escalated=True)


def verify_eq654(
    m: int,
    p: ExpLike,
    ns: Sequence[int],
    trials: int,
    seed: int = 0,
    cfg: AscentConfig = AscentConfig(),
    kinds: Sequence[WitnessKind | str] = (WitnessKind.GAUSSIAN, WitnessKind.KSZ),
) -> VerificationReport:
    """Run the flat-norm check on ``trials`` random forms of each kind.

    Instance ``i`` of a kind has dimension ``ns[i % len(ns)]``.
    """
    flat_norm_exponent(m, p)
    if not ns:
        raise DomainError("ns is empty")
    jobs = []
    for kind in kinds:
        kind = WitnessKind(kind)
        for i, s in enumerate(_random_seeds(seed + 7919 * list(WitnessKind).index(kind), trials)):
            jobs.append((kind, ns[i % len(ns)], s))

    def one(job):
        kind, n, s = job
        return verify_flat_norm(witness(kind, m, n, s), p, cfg, kind.value)

    return VerificationReport(tuple(ordered_map(one, jobs)))


def verify_flat_norm_diagonal(p: ExpLike, ns: Sequence[int]) -> VerificationReport:
    """Bilinear diagonal family ``V_n`` with closed forms: ``n^((p-4)/(2p)) <= n^(1-2/p)``."""
    e = flat_norm_exponent(2, p)
    recs = []
    for n in ns:
        lhs = float(n) ** float(e.recip)  # n ones in the diagonal
        bound = closed_form_norm(WitnessKind.V, p, p, n)
        status = Status.VERIFIED if lhs <= bound else Status.INCONCLUSIVE
        recs.append(Record(n, lhs, bound, status, WitnessKind.V.value))
    return VerificationReport(tuple(recs))


def row_sup_ratio(f: MultilinearForm, q: ExpLike, norm: float) -> float:
    """``sup_i ||row_i||_{q*} / norm``."""
    if norm == 0:
        raise ZeroNorm("norm is zero")
    return mixed_norm(f.coeffs, (XExp.INF, conj(q))) / norm


def verify_p2_row_sup(
    q: ExpLike,
    ns: Sequence[int],
    trials: int = 20,
    seed: int = 0,
    cfg: AscentConfig = AscentConfig(),
    kind: WitnessKind | str = WitnessKind.GAUSSIAN,
) -> RateFit:
    """Growth of the row-sup quotient on ``l_2 x l_q``; bounded when the inequality holds."""
    q = xexp(q)
    if q < 2 or q.is_inf:
        raise DomainError("q must lie in [2, inf)")
    kind = WitnessKind(kind)
    if kind in (WitnessKind.U, WitnessKind.V):
        pts = [(n, row_sup_ratio(witness(kind, 2, n), q, closed_form_norm(kind, 2, q, n))) for n in ns]
        return fit_rate(pts)
    seeds = _random_seeds(seed, trials)

    def one(args):
        n, s = args
        f = witness(kind, 2, n, s, domain_exps=(2, q))
        return row_sup_ratio(f, q, estimate_norm(f, cfg).value)

    samples = [ordered_map(one, [(n, s) for s in seeds]) for n in ns]
    return _fit_medians(ns, samples)


def _seq_matrix(seq, n: int) -> np.ndarray:
    mat = np.atleast_2d(np.asarray(seq, dtype=np.float64))
    if mat.shape[1] != n:
        raise DimMismatch(f"sequence vectors have length {mat.shape[1]}, slot expects {n}")
    return mat


def value_tensor(f: MultilinearForm, seqs: Sequence) -> np.ndarray:
    """``v[j1..jm] = T(x^(1)_{j1}, ..., x^(m)_{jm})``."""
    if len(seqs) != f.order:
        raise DimMismatch(f"need {f.order} sequences, got {len(seqs)}")
    cur = f.coeffs.array
    for t, (seq, n) in enumerate(zip(seqs, f.dims)):
        mat = _seq_matrix(seq, n)
        # contract axis t and put the new sequence axis back in place t
        cur = np.moveaxis(np.tensordot(mat, cur, axes=(1, t)), 0, t)
    return cur


def summing_lhs(f: MultilinearForm, qs: Sequence[ExpLike], seqs: Sequence) -> float:
    """Mixed ``l_qs`` norm of the values of ``f`` on the given sequences."""
    v = value_tensor(f, seqs)
    if len(as_spec(qs)) != f.order:
        raise DimMismatch("one summing exponent per slot is required")
    return mixed_norm_array(v, qs)


def verify_summing_ratio(
    f: MultilinearForm,
    qs: Sequence[ExpLike],
    ws: Sequence[ExpLike],
    seqs: Sequence,
    cfg: AscentConfig = AscentConfig(),
    norm: NormCertificate | None = None,
) -> float:
    """``summing_lhs / (||f|| * prod_k ||seq_k||_{w, ws_k})`` with lower-bound denominators."""
    if len(ws) != f.order:
        raise DimMismatch("one weak exponent per slot is required")
    cert = norm if norm is not None else estimate_norm(f, cfg)
    den = cert.value
    for seq, n, s, w in zip(seqs, f.dims, f.domain_exps, ws):
        den *= weak_norm(_seq_matrix(seq, n), s, w, cfg).value
    if den == 0:
        raise ZeroNorm("vanishing denominator")
    return summing_lhs(f, qs, seqs) / den


def summing_ratio_sweep(
    m: int,
    p: ExpLike,
    qs: Sequence[ExpLike],
    ws: Sequence[ExpLike],
    ns: Sequence[int],
    trials: int = 20,
    seed: int = 0,
    cfg: AscentConfig = AscentConfig(),
    domain_exps: Sequence[ExpLike] | None = None,
) -> RateFit:
    """Median summing ratio of Gaussian m-linear forms on basis sequences."""
    exps = list(domain_exps) if domain_exps is not None else [xexp(p)] * m
    seeds = _random_seeds(seed, trials)

    def one(args):
        n, s = args
        f = witness(WitnessKind.GAUSSIAN, m, n, s, domain_exps=exps)
        basis = [np.eye(n)] * m
        return verify_summing_ratio(f, qs, ws, basis, cfg)

    samples = [ordered_map(one, [(n, s) for s in seeds]) for n in ns]
    return _fit_medians(ns, samples)


def report_json(obj) -> str:
    return json.dumps(obj.to_dict(), sort_keys=True)
