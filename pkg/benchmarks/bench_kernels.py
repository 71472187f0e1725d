"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Inputs are block graphs of the bundled generators at levels 3 and 4.
"""
import argparse
import time

import numpy as np

from confdim import _kernels_py
from confdim.igs import bundled_spec
from confdim.metric_cascade import CascadeDensity

try:
    from confdim import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    for name, value, levels in (("diamond", 0.25, (3, 4)), ("fig5_right", 1 / 3, (3, 4))):
        spec = bundled_spec(name)
        cd = CascadeDensity.constant(spec, value)
        for n in levels:
            yield name, n, spec, cd.blocks(n)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the Python fallback is available")
    print(f"{'case':<22}{'kernel':<12}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, n, spec, bg in cases():
        src = np.array([0], dtype=np.int64)
        d0 = np.zeros(1)
        lev = spec.level(n)
        a = np.ascontiguousarray(lev.tail, dtype=np.int64)
        b = np.ascontiguousarray(lev.head, dtype=np.int64)
        jobs = {
            "dijkstra": lambda m: m.dijkstra_csr(bg.indptr, bg.indices, bg.weights, src, d0),
            "union_find": lambda m: m.union_find_labels(lev.n_vertices, a, b),
        }
        for kernel, job in jobs.items():
            slow = best_of(lambda: job(_kernels_py), args.repeat)
            if compiled is None:
                print(f"{name + ' L' + str(n):<22}{kernel:<12}{slow:>12.5f}{'-':>12}{'-':>10}")
                continue
            fast = best_of(lambda: job(compiled), args.repeat)
            print(f"{name + ' L' + str(n):<22}{kernel:<12}{slow:>12.5f}{fast:>12.5f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
