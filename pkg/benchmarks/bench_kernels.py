"""Time the Monte Carlo trial kernels: numba jit path vs pure-numpy path.

Run:  python benchmarks/bench_kernels.py [--trials 2048] [--m 64,256]

Both paths consume identical random draws, so the comparison is math-for-math.
The jit path is what `pcdl verify` uses by default; PCDL_NO_NUMBA=1 selects
the numpy path at import time.
"""

import argparse
import math
import time

import numpy as np

from pcdl import _kernels
from pcdl.estimation import compute_alpha, crandn, own_links
from pcdl.geometry import ScenarioConfig, build_scenario
from pcdl.rate_core import Precoder, effective_gain


def kernel_args(scenario, stats, M, precoder, trials, seed):
    L, K = scenario.n_cells, scenario.users_per_cell
    rng = np.random.default_rng(seed)
    h = crandn(rng, (trials, L, K, L, M))
    z = crandn(rng, (trials, L, K, M))
    s = crandn(rng, (trials, L, K))
    w = crandn(rng, (trials,))
    eff = effective_gain(scenario, stats, M, precoder, (0, 0))
    scale = np.sqrt(scenario.rho_d / eff.lam)
    return (h, z, s, w, np.sqrt(scenario.beta), own_links(stats.alpha),
            math.sqrt(scenario.rho_p), 0, 0, scale, eff.lam, scenario.rho_d)


def time_fn(fn, args, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=2048)
    parser.add_argument("--m", default="64,256")
    args = parser.parse_args()

    if _kernels.backend() != "numba":
        raise SystemExit("numba path unavailable (PCDL_NO_NUMBA set or numba "
                         "missing); nothing to compare")

    scenario = build_scenario(ScenarioConfig(), 0)
    stats = compute_alpha(scenario)
    print(f"{'kernel':>10} {'M':>6} {'trials':>7} {'numba':>9} {'numpy':>9} {'speedup':>8}")
    for M in (int(v) for v in args.m.split(",")):
        for name, jit_fn, np_fn in [
                ("mrt", _kernels._mrt_chunk_nb, _kernels._mrt_chunk_np),
                ("zf", _kernels._zf_chunk_nb, _kernels._zf_chunk_np)]:
            prec = Precoder.MRT if name == "mrt" else Precoder.ZF
            ka = kernel_args(scenario, stats, M, prec, args.trials, seed=0)
            jit_fn(*ka)  # warm-up compile
            t_nb = time_fn(jit_fn, ka)
            t_np = time_fn(np_fn, ka)
            print(f"{name:>10} {M:>6} {args.trials:>7} {t_nb:>8.3f}s {t_np:>8.3f}s "
                  f"{t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
