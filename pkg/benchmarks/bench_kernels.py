"""Compiled vs pure-Python Sturm kernels on Witten operators.

Run ``python3 benchmarks/bench_kernels.py [--n 4000] [--k 20] [--repeat 3]``.
"""

import argparse
import time

import numpy as np

from torsionlab import _kernels_py
from torsionlab.deformation import make_profile
from torsionlab.operator1d import Grid, assemble_witten_pair

try:
    from torsionlab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--T", type=float, default=8.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    prof_i = make_profile(args.T, "interval_odd")
    prof_c = make_profile(args.T, "circle_periodic")
    tri, _ = assemble_witten_pair(prof_i, Grid(-2.0, 2.0, args.n), "abs", "rel")
    per, _ = assemble_witten_pair(prof_c, Grid(-2.0, 6.0, args.n, True))
    idx = np.arange(args.k, dtype=np.int64)

    backends = [("python", _kernels_py)] + ([("compiled", _compiled)] if _compiled else [])
    cases = {
        "sturm_count": lambda m: m.sturm_count(tri.diag, tri.offdiag, 100.0),
        "sturm_count_periodic": lambda m: m.sturm_count_periodic(per.diag, per.offdiag, per.corner, 100.0),
        "bisect_tridiag": lambda m: m.bisect_tridiag(tri.diag, tri.offdiag, idx, *tri.gershgorin(), 1e-12, 1e-12),
        "bisect_periodic": lambda m: m.bisect_periodic(per.diag, per.offdiag, per.corner, idx, *per.gershgorin(), 1e-12, 1e-12),
    }
    print(f"n = {args.n}, k = {args.k}, T = {args.T:g}")
    print(f"{'kernel':<22}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}{'max diff':>12}")
    for label, fn in cases.items():
        res = [best_of(lambda m=m: fn(m), args.repeat) for _, m in backends]
        line = f"{label:<22}" + "".join(f"{t * 1e3:>12.2f}ms" for t, _ in res)
        if len(res) == 2:
            diff = float(np.max(np.abs(np.asarray(res[0][1], dtype=float) - np.asarray(res[1][1], dtype=float))))
            line += f"{res[0][0] / res[1][0]:>9.1f}x{diff:>12.2e}"
        print(line)


if __name__ == "__main__":
    main()
