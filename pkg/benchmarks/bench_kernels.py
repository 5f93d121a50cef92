"""Time the numba and numpy kernel backends on preset spectra.

    python3 benchmarks/bench_kernels.py [--points 4001] [--repeat 5]

Both backends are timed in one process by rebinding the dispatch names in
``omit_chain.kernels``; numba compilation is excluded by a warm-up call.
"""
import argparse
import timeit

import numpy as np

from omit_chain import kernels, preset
from omit_chain._accel import HAVE_NUMBA
from omit_chain.closed_form import eps_t_cf_grid
from omit_chain.sideband import eps_t_direct_grid

CASES = [("fig2d", 0.0), ("fig4b", 0.0), ("fig6", 4.0), ("fig8", 10.0)]


def use(backend):
    kernels.cf_grid = getattr(kernels, f"cf_grid_{backend}")
    kernels.solve_batch = getattr(kernels, f"solve_batch_{backend}")


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4001)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'case':<10}{'route':<8}" + "".join(f"{b + ' [ms]':>14}" for b in backends) + f"{'speedup':>10}")
    for name, V in CASES:
        m = preset(name, V=V)
        x = np.linspace(-3.0, 3.0, args.points) * m.kappa_N
        for route, fn in (("cf", eps_t_cf_grid), ("direct", eps_t_direct_grid)):
            times, results = [], []
            for b in backends:
                use(b)
                results.append(fn(m, x))
                times.append(best_of(lambda: fn(m, x), args.repeat) * 1e3)
            agree = max(float(np.max(np.abs(r - results[0]) / np.abs(results[0]))) for r in results)
            speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
            print(f"{name:<10}{route:<8}" + "".join(f"{t:14.2f}" for t in times) + speed
                  + f"   max rel diff {agree:.1e}")


if __name__ == "__main__":
    main()
