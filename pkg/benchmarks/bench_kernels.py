"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both variants are imported directly, so the SPIKELAB_NUMBA flag does not
matter here. The first numba call (compilation) is excluded from timings.
"""
import argparse
import timeit

import numpy as np

from spikelab import kernels


def cases():
    rng = np.random.default_rng(0)
    n = 128
    A = 1.0 + 0.1 * rng.random((n, n))
    H = 1.0 + 0.1 * rng.random((n, n))
    mu = 1.0 + rng.random((n, n))
    F = rng.random((n, n))
    X = rng.random((12, 2)) * 20.0
    return {
        "rk4_radial (n=4000)": (kernels.rk4_radial_numpy, kernels.rk4_radial_numba, (2.3919564, 0.005, 4000)),
        "reaction (128^2)": (kernels.reaction_numpy, kernels.reaction_numba, (A, H, mu, 0.01)),
        "inhibitor_source (128^2)": (kernels.inhibitor_source_numpy, kernels.inhibitor_source_numba,
                                     (A, H, 0.01, 0.1)),
        "local_maxima (128^2)": (kernels.local_maxima_numpy, kernels.local_maxima_numba, (F, 0.5)),
        "pair_energy (k=12)": (kernels.pair_energy_numpy, kernels.pair_energy_numba, (X, 0.05)),
        "pair_gradient (k=12)": (kernels.pair_gradient_numpy, kernels.pair_gradient_numba, (X, 0.05)),
    }


def best_of(fn, args, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'kernel':<26}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for name, (py, jit, a) in cases().items():
        jit(*a)  # compile
        t_py = best_of(py, a, args.repeat)
        t_jit = best_of(jit, a, args.repeat)
        print(f"{name:<26}{t_py * 1e6:>14.1f}{t_jit * 1e6:>14.1f}{t_py / t_jit:>9.1f}x")


if __name__ == "__main__":
    main()
