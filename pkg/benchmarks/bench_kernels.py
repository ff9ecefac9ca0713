"""Compare the numba and numpy backends on the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported side by side from ``lambdacpa.kernels`` so the env
flag is not needed here. Timings exclude the first (compiling) call.
"""

import argparse
import time

import numpy as np

from lambdacpa import kernels
from lambdacpa.dynamics import LiouvillianSpec
from lambdacpa.model import steady_state_polynomial
from lambdacpa.params import ModelVariant, ProbeDrive, SystemParams


def _best(fn, repeat):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _matched_gap(ra, rb):
    # roots come unordered; compare each to its nearest partner
    ra, rb = ra[~np.isnan(ra)], rb[~np.isnan(rb)]
    if ra.size != rb.size:
        return np.inf
    return max((np.min(np.abs(rb - z)) / max(1.0, abs(z)) for z in ra), default=0.0)


def roots_case(n_rows=20000):
    p = SystemParams(omega1=1.0)
    rng = np.random.default_rng(0)
    rows = []
    for dp in rng.uniform(-10, 10, n_rows):
        drive = ProbeDrive.from_intensity(dp, rng.uniform(0.1, 50))
        rows.append(steady_state_polynomial(p.replace(delta_ac=dp), drive, ModelVariant.REDUCED))
    return np.ascontiguousarray(rows, dtype=np.float64)


def integrate_case():
    p = SystemParams(omega1=0.0, delta_ac=-6.0).two_level()
    spec = LiouvillianSpec(p)
    vec = spec.vector(ProbeDrive.from_intensity(6.0, 100.0))
    y0 = np.zeros(kernels.STATE_SIZE, dtype=complex)
    y0[0] = 1.0
    return y0, vec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--rows", type=int, default=20000)
    args = ap.parse_args(argv)

    impls = [kernels.numpy_impl] + ([kernels.numba_impl] if kernels.numba_impl else [])
    coeffs = roots_case(args.rows)
    y0, vec = integrate_case()

    print(f"{'kernel':<22}{'backend':<8}{'best [s]':>12}")
    ref = {}
    for impl in impls:
        t = _best(lambda: impl.poly_roots_batch(coeffs, 3), args.repeat)
        print(f"{'poly_roots_batch':<22}{impl.name:<8}{t:>12.4f}")
        ref.setdefault("roots", []).append(impl.poly_roots_batch(coeffs, 3))
    for impl in impls:
        run = lambda: impl.integrate(y0, vec, 200.0, 1e-2, 1e-10, 1e-9, 0.0, 0)
        t = _best(run, args.repeat)
        print(f"{'integrate (t=200)':<22}{impl.name:<8}{t:>12.4f}")
        ref.setdefault("y", []).append(run()[0])
    if len(impls) == 2:
        a, b = ref["roots"]
        gap = max(_matched_gap(x, y) for x, y in zip(a, b))
        print(f"max relative root gap between backends: {gap:.2e}")
        print(f"max state gap after integration: {np.max(np.abs(ref['y'][0] - ref['y'][1])):.2e}")


if __name__ == "__main__":
    main()
