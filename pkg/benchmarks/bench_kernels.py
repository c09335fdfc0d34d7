"""Time the compiled kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from juliathermo import _pykernels
from juliathermo.conjugacy import BoettcherSeries, angle_orbit
from juliathermo.poly_core import cubic_map, newton_fixed_point, quadratic_map
from juliathermo.thermo import _pullback_refine

try:
    from juliathermo import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    for d, level in ((2, 16), (3, 10)):
        s = BoettcherSeries(d)
        theta = (np.arange(d ** level) + 0.5) / d ** level
        orbit = angle_orbit(theta, d, s.depth)
        args = (orbit, d, s._pair_ptr, s._pair_b, s._pair_g, s._shift_pos, s._shift_k)
        yield f"series_terms d={d} nodes={d ** level}", "series_terms", args

    for P in (quadratic_map(0.05), cubic_map(0.05, 0.05)):
        z0, _ = newton_fixed_point(P, 1.0)
        rng = np.random.default_rng(0)
        digits = rng.integers(0, P.degree, size=(16, 5000)).astype(np.int8)
        yield (f"mc_chains d={P.degree} chains=16 steps=5000", "mc_chains",
               (P.coefficients(), P.degree, complex(z0), 0.0, digits, 500))

    P = quadratic_map(0.1)
    n = 16
    # the same contracted seeds the periodic-point solver starts from
    seeds = _pullback_refine(P, np.exp(2j * np.pi * np.arange(2 ** n - 1) / (2 ** n - 1)))
    yield f"newton_periodic d=2 n={n}", "newton_periodic", (seeds, P.coefficients(), n, 100, 1e-14)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'case':45s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for label, name, fargs in cases():
        tp, outp = _best(lambda: getattr(_pykernels, name)(*fargs), args.repeat)
        if _ckernels is None:
            print(f"{label:45s} {tp:10.3f} {'n/a':>10s}")
            continue
        tc, outc = _best(lambda: getattr(_ckernels, name)(*fargs), args.repeat)
        a = np.asarray(outp[0] if isinstance(outp, tuple) else outp)
        b = np.asarray(outc[0] if isinstance(outc, tuple) else outc)
        diff = float(np.max(np.abs(a - b)))
        print(f"{label:45s} {tp:10.3f} {tc:10.3f} {tp / tc:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
