"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on both backends after one warm-up call (which also
triggers JIT compilation), and the results are checked for agreement.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from hllab import kernels


def _cases(rng):
    for n in (16, 64, 256):
        a = rng.standard_normal((n, n))
        x0 = np.ones(n) / n ** (1 / 3)
        y0 = np.ones(n) / n ** (1 / 1.5)
        yield f"ascent2 n={n} (p=3, q=3/2)", "ascent2", (a, 3.0, 1.5, x0, y0, 200, 1e-12)
        yield f"dual_step n={n * n} (p=5/2)", "dual_step", (a.reshape(-1), 2.5)
    for n in (12, 16, 20):
        yield f"linf_enum2 {n}x{n} (2^{n - 1} signs)", "linf_enum2", (rng.choice([-1.0, 1.0], size=(n, n)),)


def _first(value):
    return value[0] if isinstance(value, tuple) else value


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = [kernels.NUMBA_KERNELS, kernels.NUMPY_KERNELS]
    print(f"{'case':<36}" + "".join(f"{b.name:>14}" for b in backends) + f"{'speedup':>10}  agree")
    for label, name, call_args in _cases(rng):
        times, outs = [], []
        for b in backends:
            fn = getattr(b, name)
            outs.append(_first(fn(*call_args)))
            best = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat))
            times.append(best)
        agree = np.allclose(outs[0], outs[1], rtol=1e-10, atol=0)
        cols = "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        print(f"{label:<36}{cols}{times[1] / times[0]:>9.1f}x  {'yes' if agree else 'NO'}")


if __name__ == "__main__":
    main()
