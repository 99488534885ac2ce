"""Compare the compiled and NumPy cores on gate sweeps and SMO.

    python benchmarks/bench_core.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from qkcompose import _backend, kernelmat
from qkcompose.circuit import CircuitDescriptor, circuit_states, default_theta
from qkcompose.svm import train_dual


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=400)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    c = CircuitDescriptor.from_matrix([[0, 2, 0, 1, 2, 0],
                                       [3, 0, 2, 0, 2, 3],
                                       [2, 0, 1, 3, 0, 1],
                                       [1, 3, 5, 2, 0, 2]])
    X = rng.uniform(0, 2 * np.pi, size=(args.points, 4))
    theta = default_theta(c)
    K = kernelmat.gram_from_states(circuit_states(c, theta, X))
    y = (rng.random(args.points) < 0.5).astype(int)

    print(f"points={args.points} repeat={args.repeat} default backend={_backend.NAME}")
    print(f"{'backend':>8}  {'gate sweep [ms]':>16}  {'SMO [ms]':>10}")
    rows = {}
    for name in _backend.available():
        sweep = best_of(lambda: circuit_states(c, theta, X, backend=name), args.repeat)
        smo = best_of(lambda: train_dual(K, y, 1.0, 1e-3, backend=name), args.repeat)
        rows[name] = (sweep, smo)
        print(f"{name:>8}  {sweep * 1e3:>16.3f}  {smo * 1e3:>10.3f}")
    if len(rows) == 2:
        (cs, cm), (ps, pm) = rows["cython"], rows["python"]
        print(f"speed-up: gate sweep x{ps / cs:.1f}, SMO x{pm / cm:.1f}")


if __name__ == "__main__":
    main()
