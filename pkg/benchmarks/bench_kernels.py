"""Compare the compiled dual kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times the fused objective/gradient/Hessian kernel on grids of the sizes the
convergence studies use, and a full solve through each backend.
"""

import argparse
import timeit
import warnings

import numpy as np

from momentlock import _backend, maxent
from momentlock import density as dm
from momentlock.diagnostics import discretize
from momentlock.moments import polynomial, targets_from_density


def kernel_case(I, L, seed=0):
    rng = np.random.default_rng(seed)
    q = rng.dirichlet(np.ones(I))
    D = np.ascontiguousarray(rng.normal(size=(I, L)))
    lam = np.ascontiguousarray(0.3 * rng.normal(size=L))
    return q, D, lam


def time_call(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    best = min(timeit.Timer(fn).repeat(repeat=repeat, number=n))
    return best / n


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = {"python": _backend.python_kernels}
    if _backend.compiled_kernels is not None:
        backends["cython"] = _backend.compiled_kernels
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'case':<28}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for I, L in [(9, 2), (25, 6), (51, 4), (401, 6), (5001, 6)]:
        args_ = kernel_case(I, L)
        t = {b: time_call(lambda m=m: m.dual_terms(*args_), args.repeat)
             for b, m in backends.items()}
        _row(f"dual_terms I={I} L={L}", t)

    d = dm.beta(2, 4)
    T = polynomial(6)
    tbar = targets_from_density(d, T)
    for M in (6, 12, 200):
        q = discretize(d, "simpson", M)
        t = {}
        for b, m in backends.items():
            maxent.kernels = m
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                t[b] = time_call(lambda: maxent.solve_dual(q, T, tbar), args.repeat)
        maxent.kernels = _backend.kernels
        _row(f"solve_dual M={M} L=6", t)


def _row(label, t):
    cells = "".join(f"{v * 1e6:>12.1f}us" for v in t.values())
    speed = t["python"] / t["cython"] if "cython" in t else float("nan")
    print(f"{label:<28}{cells}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
