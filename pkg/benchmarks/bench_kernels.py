"""Compare the numba and numpy per-mode kernels of the spectral propagator.

    python benchmarks/bench_kernels.py [--sizes 32,64] [--repeat 5]

Prints best-of-``repeat`` wall times and the max difference between the two
paths. Compilation happens once before timing.
"""

import argparse
import time

import numpy as np

from nullknot.core import GridSpec
from nullknot.spectral import _kernels as K
from nullknot.spectral import wavenumbers


def best(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="32,64")
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    if not K.HAVE_NUMBA:
        print("numba not importable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12}{'N':>5}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>9}{'max diff':>11}")
    for n in (int(s) for s in a.sizes.split(",")):
        k = wavenumbers(GridSpec(1.0, n))
        F = rng.standard_normal((n, n, n, 3)) + 1j * rng.standard_normal((n, n, n, 3))
        cases = {
            "rotate": (lambda: K.rotate_modes_np(F, k, k, k, 0.37), lambda: K.rotate_modes_nb(F, k, k, k, 0.37)),
            "project": (lambda: K.project_modes_np(F, k, k, k), lambda: K.project_modes_nb(F, k, k, k)),
            "divergence": (lambda: K.divergence_modes_np(F, k, k, k), lambda: K.divergence_modes_nb(F, k, k, k)),
        }
        for name, (f_np, f_nb) in cases.items():
            f_nb()  # compile
            diff = float(np.max(np.abs(f_np() - f_nb())))
            t_np, t_nb = best(f_np, a.repeat), best(f_nb, a.repeat)
            print(f"{name:<12}{n:>5}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.2f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
