"""Compare the compiled kernels with the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both backends are called in-process through ``kernel(name, backend)``; the
numba timings exclude the first (compiling) call.  The numpy moments kernel
has no vectorized rewrite and is skipped.
"""
import argparse
import time

import numpy as np

from brwre._kernels import kernel
from brwre.criticality import two_env_example, find_critical_theta
from brwre.environment import BarrierSpec, sample_environment
from brwre.forward import PopulationCaps, _setup
from brwre.pointprocess import PointProcessLaw
from brwre.rwre import CorridorSpec, LatticeWalk, _cuts
from brwre.streams import generator

LAW_A = PointProcessLaw.from_pairs([(0.5, [-1, 1]), (0.5, [1, 1])])
LAW_B = PointProcessLaw.from_pairs([(0.4, [-2, 0, 3]), (0.6, [0, 1])])


def cases():
    envlaw = two_env_example(0.5, LAW_A, LAW_B)
    th = find_critical_theta(envlaw).vartheta
    n = 216
    env = sample_environment(envlaw, n, 1)
    st = _setup(env, BarrierSpec(1.5, 1 / 3, th), n, PopulationCaps(10_000))
    walk = LatticeWalk.from_step_law([-1, 1], [0.5, 0.5], 20_000)
    spec = CorridorSpec.symmetric(20_000, 27.0)
    comp, klo, khi, cap = _cuts(walk, spec, 0.0)
    maxw = int((khi - klo).max() + 1)
    corr = (20_000, comp, walk.start, walk.x, walk.xi, walk.mass, klo, khi, cap, maxw)
    vals = np.array([-1.0, 1.0])
    cdf = np.array([0.5, 1.0])
    return {
        "alive_block": lambda rng: (rng, 2000, n, *st.args, st.base, st.width, 64),
        "population_block": lambda rng: (rng, 200, n, *st.args, 10_000, st.base, st.width),
        "survival_dp": lambda rng: (n, *st.args, st.base, st.width),
        "corridor_forward": lambda rng: corr,
        "max_excursion": lambda rng: (rng, 200, 10_000, vals, cdf),
    }


def timed(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    opts = ap.parse_args()
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, make in cases().items():
        nb = kernel(name, "numba")
        nb(*make(7))  # compile
        t_nb = timed(nb, make(7), opts.repeat)
        t_np = timed(kernel(name, "numpy"), make(generator(7)), opts.repeat)
        print(f"{name:<18}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
