"""Time the Monte Carlo phase-averaging kernel on both backends.

    python3 benchmarks/bench_phase_average.py [--samples N] [--repeat R]
"""

import argparse
import time

import numpy as np

from phaseqec import _kernels
from phaseqec.channels import SIGNS


def best_of(fn, repeat, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    thetas = rng.normal(size=(args.samples, 3))

    results = {"numpy": best_of(_kernels.phase_average_numpy, args.repeat, rho, thetas, SIGNS)}
    if _kernels.HAVE_NUMBA:
        _kernels.phase_average_numba(rho, thetas[:10], SIGNS)  # compile
        results["numba"] = best_of(_kernels.phase_average_numba, args.repeat, rho, thetas, SIGNS)
        ref = _kernels.phase_average_numpy(rho, thetas, SIGNS)[0]
        got = _kernels.phase_average_numba(rho, thetas, SIGNS)[0]
        print(f"max |numba - numpy| = {np.max(np.abs(ref - got)):.2e}")

    for name, sec in results.items():
        print(f"{name:6s} {sec * 1e3:9.2f} ms  {args.samples / sec / 1e6:7.2f} Msamples/s")
    if "numba" in results:
        print(f"speedup {results['numpy'] / results['numba']:.1f}x")


if __name__ == "__main__":
    main()
