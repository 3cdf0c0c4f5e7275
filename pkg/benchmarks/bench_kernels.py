"""Time the compiled kernels against the numpy/pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Also times the two end-to-end paths that use them (a loaded-rod shooting
solve and a 16-section discrete solve) under each backend.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cablerod import _kernels_py
from cablerod.core import baseline_params

try:
    from cablerod import _kernels
except ImportError:
    _kernels = None


def _cases():
    p = baseline_params()
    g, w = np.polynomial.legendre.leggauss(32)
    a = np.array([0.54, 7.6, -5.06])
    edges = np.linspace(0.0, 1.0, 17)
    return {
        "loaded_rk4_end (2000 steps)": ("loaded_rk4_end", (-0.7, p.L, p.EI0, 0.0, 0.6164, 2000)),
        "loaded_rk4_path (2000 steps)": ("loaded_rk4_path", (-0.7, p.L, p.EI0, 0.0, 0.6164, 2000)),
        "chord_terms (16 spans, m=3)": ("chord_terms", (a, edges, p.L, p.W0, g, w)),
    }


def _time(fn, args, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def _max_diff(x, y):
    if isinstance(x, tuple):
        return max(_max_diff(a, b) for a, b in zip(x, y))
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; only the fallback is available")
    print(f"{'kernel':32s} {'python [us]':>12s} {'cython [us]':>12s} {'speedup':>8s} {'max |diff|':>11s}")
    for label, (name, fargs) in _cases().items():
        t_py = _time(getattr(_kernels_py, name), fargs, args.repeat)
        if _kernels is None:
            print(f"{label:32s} {t_py * 1e6:12.1f} {'-':>12s} {'-':>8s} {'-':>11s}")
            continue
        fc = getattr(_kernels, name)
        t_c = _time(fc, fargs, args.repeat)
        diff = _max_diff(getattr(_kernels_py, name)(*fargs), fc(*fargs))
        print(f"{label:32s} {t_py * 1e6:12.1f} {t_c * 1e6:12.1f} {t_py / t_c:8.1f} {diff:11.2e}")
    print()
    print(f"{'end-to-end':32s} {'python [ms]':>12s} {'cython [ms]':>12s}")
    for label, stmt in END_TO_END.items():
        times = [_solve_time(stmt, pure) for pure in ("1", "0")]
        print(f"{label:32s} {times[0]:12.2f} {times[1]:12.2f}")


END_TO_END = {
    "solve_shooting (loaded rod)": "solve_shooting(LoadedBVP(baseline_params(), qy=0.6164))",
    "solve_discrete (n=16)": "solve_discrete(DiscreteRobotSpec(baseline_params(), 16), 3.0)",
}


def _solve_time(stmt, pure):
    # the backend is fixed at import, so each one gets a fresh interpreter
    code = (
        "import timeit\n"
        "from cablerod import *\n"
        f"print(min(timeit.repeat(lambda: {stmt}, number=3, repeat=3)) / 3 * 1e3)"
    )
    env = dict(os.environ, CABLEROD_PURE_PYTHON=pure)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


if __name__ == "__main__":
    main()
