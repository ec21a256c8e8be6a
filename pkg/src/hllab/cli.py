"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 a verification ended with
inconclusive instances.  Output is JSON by default, CSV with ``--csv`` for
tabular commands.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

from . import experiments as ex
from .errors import DomainError, HLLabError
from .exponents import (
    XExp,
    blowup_exponent,
    blowup_exponents_rect,
    boundary_b,
    conj,
    hl_admissible,
    hl_admissible_reversed,
    inclusion_exponent,
    qq2211_tuple,
    reciprocal_sum,
    region_label,
    RegionLabel,
    rp_exponent,
    xexp,
)
from .forms import MultilinearForm, WitnessKind
from .optnorm import AscentConfig, estimate_norm, exact_norm_linf

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3


def exponent_arg(text: str) -> XExp:
    try:
        return XExp(text)
    except HLLabError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def n_range_arg(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(s) for s in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return lo, hi


def expand_range(rng: tuple[int, int], geometric: bool) -> list[int]:
    lo, hi = rng
    if not geometric:
        return list(range(lo, hi + 1))
    out, n = [], lo
    while n <= hi:
        out.append(n)
        n *= 2
    return out


def _frac(x: XExp | Fraction) -> str:
    return str(x)


def emit_boundary(p, q, samples: int, a_max=None) -> list[dict]:
    """Sample the admissible boundary ``b_min(a)`` from ``a = q*`` to ``a_max``.

    The points are equally spaced exact rationals; a last row gives the
    ``a -> inf`` limit ``pq/(pq - p - q)``.
    """
    p, q = xexp(p), xexp(q)
    if samples < 2:
        raise DomainError("samples must be >= 2")
    lo = conj(q)
    hi = xexp(a_max) if a_max is not None else lo * 3
    if hi.is_inf or hi <= lo:
        raise DomainError(f"a_max must be finite and above q* = {lo}")
    step = (hi.fraction - lo.fraction) / (samples - 1)
    rows = []
    for k in range(samples):
        a = XExp(lo.fraction + k * step)
        rows.append((a, boundary_b(p, q, a)))
    rows.append((XExp.INF, boundary_b(p, q, XExp.INF)))
    return [
        {"a": float(a), "b_min": float(b), "a_exact": _exact(a), "b_min_exact": _exact(b)}
        for a, b in rows
    ]


def _exact(x: XExp) -> str:
    if x.is_inf:
        return "inf"
    f = x.fraction
    return f"{f.numerator}/{f.denominator}"


def boundary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b_min", "a_exact", "b_min_exact"])
    for r in rows:
        w.writerow([repr(r["a"]), repr(r["b_min"]), r["a_exact"], r["b_min_exact"]])
    return buf.getvalue()


def _cfg(args) -> AscentConfig:
    return AscentConfig(multistarts=args.multistarts, max_iters=args.max_iters, rel_tol=args.tol, seed=args.seed)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError("missing required flag(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


# commands ---------------------------------------------------------------

def cmd_classify(args):
    _require(args, "p", "q", "a", "b")
    fn = hl_admissible_reversed if args.reversed else hl_admissible
    return fn(args.p, args.q, args.a, args.b).to_dict()


def cmd_region(args):
    _require(args, "p", "q", "r1", "r2")
    return {"region": region_label(args.p, args.q, args.r1, args.r2).value}


def cmd_blowup(args):
    _require(args, "p", "q", "r1", "r2")
    label = region_label(args.p, args.q, args.r1, args.r2)
    if label is RegionLabel.PQ_DEGENERATE:
        t1, t2 = blowup_exponents_rect(args.q, args.r1, args.r2)
        return {"region": label.value, "n1_exponent": _frac(t1), "n2_exponent": _frac(t2)}
    return {"region": label.value, "exponent": _frac(blowup_exponent(args.p, args.q, args.r1, args.r2))}


def cmd_rp(args):
    _require(args, "k", "p1", "p2")
    return {"exponent": _frac(rp_exponent(args.k, args.p1, args.p2))}


def cmd_inclusion(args):
    _require(args, "m", "r", "s", "u")
    return {"exponent": _frac(inclusion_exponent(args.m, args.r, args.s, args.u))}


def cmd_tuple(args):
    _require(args, "m", "p")
    tup = qq2211_tuple(args.m, args.p)
    target = Fraction(args.m + 1, 2) - args.m * args.p.recip
    return {
        "tuple": [_frac(t) for t in tup],
        "reciprocal_sum": str(reciprocal_sum(tup)),
        "target": str(target),
    }


def cmd_boundary(args):
    _require(args, "p", "q")
    if args.a is not None:
        return {"a": _frac(args.a), "b_min": _frac(boundary_b(args.p, args.q, args.a))}
    rows = emit_boundary(args.p, args.q, args.samples, args.a_max)
    if args.csv:
        return boundary_csv(rows)
    return {"rows": rows}


def cmd_norm(args):
    _require(args, "input")
    with open(args.input) as fh:
        obj = json.load(fh)
    if "domain_exps" not in obj:
        _require(args, "p")
        obj = dict(obj, domain_exps=[str(args.p)] * obj.get("order", 0))
    f = MultilinearForm.from_json_obj(obj)
    if args.method == "enum" or (args.method == "auto" and ex._enumerable(f)):
        cert = exact_norm_linf(f)
    else:
        cert = estimate_norm(f, _cfg(args))
    return cert.to_dict()


def _ns(args) -> list[int]:
    _require(args, "n_range")
    return expand_range(args.n_range, args.geometric)


def _fit_output(args, fit, extra: dict):
    if args.csv:
        return fit.to_csv()
    out = fit.to_dict()
    out.update(extra)
    return out


def cmd_sweep(args):
    _require(args, "p", "q", "r1", "r2")
    ns = _ns(args)
    fit = ex.witness_sweep(args.kind, args.p, args.q, args.r1, args.r2, ns, _cfg(args), args.trials, args.seed)
    label = region_label(args.p, args.q, args.r1, args.r2)
    extra = {"region": label.value}
    if label is not RegionLabel.PQ_DEGENERATE:
        extra["predicted"] = _frac(blowup_exponent(args.p, args.q, args.r1, args.r2))
    return _fit_output(args, fit, extra)


def cmd_ksz(args):
    _require(args, "m", "p")
    ns = _ns(args)
    ps = [args.p] * args.m
    fit = ex.ksz_norm_scaling(args.m, ps, ns, args.trials, args.seed, _cfg(args))
    return _fit_output(args, fit, {"predicted": str(ex.ksz_predicted(args.m, ps))})


def cmd_verify(args):
    ns = _ns(args)
    if args.target == "row-sup":
        _require(args, "q")
        fit = ex.verify_p2_row_sup(args.q, ns, args.trials, args.seed, _cfg(args), args.kind or WitnessKind.GAUSSIAN)
        return _fit_output(args, fit, {})
    _require(args, "m", "p")
    kinds = [WitnessKind.GAUSSIAN, WitnessKind.KSZ] if args.kind is None else [WitnessKind(args.kind)]
    report = ex.verify_eq654(args.m, args.p, ns, args.trials, args.seed, _cfg(args), kinds)
    return report.to_dict(), (EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK)


COMMANDS = {
    "classify": cmd_classify,
    "region": cmd_region,
    "blowup": cmd_blowup,
    "rp": cmd_rp,
    "inclusion": cmd_inclusion,
    "tuple": cmd_tuple,
    "boundary": cmd_boundary,
    "norm": cmd_norm,
    "sweep": cmd_sweep,
    "ksz": cmd_ksz,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name in ("p", "q", "a", "b", "r1", "r2", "r", "s", "u", "p1", "p2"):
        common.add_argument(f"--{name}", type=exponent_arg)
    common.add_argument("--m", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--n-range", type=n_range_arg, help="inclusive range lo..hi")
    common.add_argument("--geometric", action="store_true", help="double n across --n-range instead of stepping by 1")
    common.add_argument("--trials", type=int, default=20)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--multistarts", type=int, default=16)
    common.add_argument("--max-iters", type=int, default=200)
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--csv", action="store_true")
    common.add_argument("--input", help="tensor/form JSON file")

    parser = _Parser(prog="hllab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "classify":
            sp.add_argument("--reversed", action="store_true", help="outer sum over j instead of i")
        elif name == "boundary":
            sp.add_argument("--samples", type=int, default=5)
            sp.add_argument("--a-max", type=exponent_arg)
        elif name == "norm":
            sp.add_argument("--method", choices=("auto", "ascent", "enum"), default="auto")
        elif name == "sweep":
            sp.add_argument("--kind", choices=[k.value for k in WitnessKind], default="U")
        elif name == "verify":
            sp.add_argument("--target", choices=("flat-norm", "row-sup"), default="flat-norm")
            sp.add_argument("--kind", choices=[k.value for k in WitnessKind], default=None)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    old_err = sys.stderr
    sys.stderr = stderr
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        try:
            result = COMMANDS[args.command](args)
        except (HLLabError, ValueError, OSError) as exc:
            print(f"hllab {args.command}: error: {exc}", file=stderr)
            return EXIT_INPUT
    finally:
        sys.stderr = old_err
    code = EXIT_OK
    if isinstance(result, tuple):
        result, code = result
    if isinstance(result, str):
        stdout.write(result)
    else:
        stdout.write(json.dumps(_json_safe(result), separators=(",", ":"), allow_nan=False) + "\n")
    return code


def _json_safe(obj):
    # strict JSON has no Infinity/NaN tokens
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def main() -> None:
    sys.exit(run())
