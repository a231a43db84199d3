"""Compare the compiled and pure-Python kernel backends.

Run with ``python benchmarks/bench_kernels.py``. Each workload is evolved
on both backends; the resulting states must agree before timings are
reported.
"""

import argparse
import time

import numpy as np

from qlgawalk import _backend
from qlgawalk.correspondence import embed, embedding_for
from qlgawalk.matrices import random_zero_diagonal_unitary
from qlgawalk.qlga import global_step
from qlgawalk.state import max_deviation
from qlgawalk.walks import build_2d, build_particle_history, build_site_history, build_standard


def workloads(scale):
    rng = np.random.default_rng(1)
    yield "standard walk", build_standard(np.pi / 4), 400 * scale, False
    yield "particle-history N=3 walk", build_particle_history(3, [np.pi / 4]), 150 * scale, False
    yield "site-history n=10 walk", build_site_history(10, np.pi / 4, np.pi / 3), 20 * scale, False
    yield "2D walk", build_2d("non_repeating", random_zero_diagonal_unitary(rng)), 40 * scale, False
    yield "Meyer QLGA", build_standard(np.pi / 4), 400 * scale, True
    yield "particle-history tail-2 QLGA", build_particle_history(3, [np.pi / 4]), 150 * scale, True
    yield "2D QLGA", build_2d("non_repeating", random_zero_diagonal_unitary(rng)), 40 * scale, True


def run_once(model, steps, lattice_gas):
    init = model.random_state(np.random.default_rng(2), 4, 2)
    t0 = time.perf_counter()
    if lattice_gas:
        e = embedding_for(model)
        state = embed(e, init)
        for k in range(steps):
            state = global_step(state, e.rule, k)
    else:
        state = model.fresh().run(init, steps)
    return time.perf_counter() - t0, state


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scale", type=int, default=1, help="multiply step counts")
    args = p.parse_args()
    backends = _backend.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'workload':<30} {'steps':>6} " + " ".join(f"{b:>10}" for b in backends) + "  speedup")
    for name, model, steps, lattice_gas in workloads(args.scale):
        times, states = {}, {}
        for b in backends:
            _backend.use(b)
            times[b], states[b] = run_once(model, steps, lattice_gas)
        if len(backends) == 2:
            dev = max_deviation(states["cython"], states["python"])
            assert dev < 1e-12, f"{name}: backends disagree by {dev:.2e}"
            speed = f"{times['python'] / times['cython']:.2f}x"
        else:
            speed = "n/a"
        print(f"{name:<30} {steps:>6} " + " ".join(f"{times[b]:>9.3f}s" for b in backends)
              + f"  {speed}")


if __name__ == "__main__":
    main()
