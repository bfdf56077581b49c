"""Compiled kernels against the numpy fallback.

Times the Schur-complement assembly and the dephasing damp on realistic
inputs, then a full robustness solve with each backend swapped in.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from dephase_lab import _pykernels, kernels
from dephase_lab.channels import NoiseSpec, damping_table
from dephase_lab.coherence import build_problem, robustness
from dephase_lab.families import make_family

try:
    from dephase_lab import _ckernels
except ImportError:
    _ckernels = None


def spd_stack(rng, count, n):
    a = rng.normal(size=(count, n, n))
    return a @ np.swapaxes(a, 1, 2) + n * np.eye(n)


def best_of(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def schur_cases(rng):
    for name, k in (("ghz", 1), ("cluster_encoded", 2), ("cluster_encoded", 3)):
        prob = build_problem(make_family(name, 4).rho(0.5), k).sdp
        for fam in prob.families:
            x, z = spd_stack(rng, fam.count, fam.n), spd_stack(rng, fam.count, fam.n)
            yield f"schur {name} k={k} ({fam.count}x{fam.n}x{fam.n})", fam, x, z, prob.m


def run_schur(impl, fam, x, z, m):
    M = np.zeros((m, m))
    local = np.ascontiguousarray(impl.schur_local(x, z, fam.rows, fam.cols, fam.vals))
    impl.scatter_add(M, local, fam.gidx)
    return M


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    rows = []
    for label, fam, x, z, m in schur_cases(rng):
        args_ = (fam, x, z, m)
        assert np.allclose(run_schur(_pykernels, *args_), run_schur(_ckernels, *args_), atol=1e-9)
        rows.append((label, best_of(lambda: run_schur(_pykernels, *args_), args.repeat),
                     best_of(lambda: run_schur(_ckernels, *args_), args.repeat)))
    for n in (4, 7, 10):
        d = 2 ** n
        rho = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        table = damping_table(NoiseSpec.uniform(0.3, n))
        rows.append((f"damp n={n}", best_of(lambda: _pykernels.damp(rho, table), args.repeat),
                     best_of(lambda: _ckernels.damp(rho, table), args.repeat)))
    for k in (2, 3):
        rho = make_family("cluster_encoded", 4).rho(0.5)
        times = []
        for impl in (_pykernels, _ckernels):
            kernels._impl = impl
            times.append(best_of(lambda: robustness(rho, k), max(1, args.repeat // 2)))
        rows.append((f"robustness solve cluster_encoded k={k}", *times))
    kernels._impl = _ckernels if kernels.BACKEND == "cython" else _pykernels

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'numpy [ms]':>11}  {'cython [ms]':>11}  {'speedup':>7}")
    for label, slow, fast in rows:
        print(f"{label:<{width}}  {slow * 1e3:11.3f}  {fast * 1e3:11.3f}  {slow / fast:7.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
