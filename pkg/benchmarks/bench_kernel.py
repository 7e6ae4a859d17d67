"""Benchmark the compiled co-simulation kernel against its pure-Python twin.

Usage: python benchmarks/bench_kernel.py [--repeats N]
"""

import argparse
import time

import numpy as np

from adrclab.design import synthesize
from adrclab.sim import _kernel_py
from adrclab.sim.engine import _kernel_inputs
from adrclab.sim.scenario import preset_scenarios

try:
    from adrclab.sim import _loopstep
except ImportError:
    _loopstep = None


def run_once(kernel, inp, n_samples, n_states):
    r, y, u, e = (np.empty(n_samples) for _ in range(4))
    xo = np.empty((n_samples, n_states))
    t0 = time.perf_counter()
    status = kernel(**inp, y_abort=1e6, r_out=r, y_out=y, u_out=u,
                    e_out=e, xo_out=xo)
    elapsed = time.perf_counter() - t0
    assert status == -1
    return elapsed, y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--preset", default="fig6")
    args = ap.parse_args()

    sc = preset_scenarios()[args.preset].with_scheme("eadrc")
    d = synthesize(sc.params)
    inp = _kernel_inputs(sc, d)
    t = inp.pop("t")
    n_samples = len(t)
    print(f"scenario {args.preset}: {n_samples} samples, plant order "
          f"{sc.plant.tf.den.degree}, observer order {d.n + 1}")

    kernels = [("python", _kernel_py.run_loop)]
    if _loopstep is not None:
        kernels.insert(0, ("cython", _loopstep.run_loop))
    else:
        print("compiled extension not available; benchmarking python only")

    results = {}
    outputs = {}
    for name, kernel in kernels:
        best = min(run_once(kernel, inp, n_samples, d.n + 1)[0]
                   for _ in range(args.repeats))
        outputs[name] = run_once(kernel, inp, n_samples, d.n + 1)[1]
        results[name] = best
        print(f"{name:>7}: {best * 1e3:8.2f} ms  "
              f"({n_samples / best / 1e6:6.2f} Msteps/s)")

    if len(results) == 2:
        dev = float(np.max(np.abs(outputs["cython"] - outputs["python"])))
        print(f"speedup: {results['python'] / results['cython']:.1f}x, "
              f"max |y| deviation {dev:.2e}")


if __name__ == "__main__":
    main()
