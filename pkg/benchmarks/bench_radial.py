"""Benchmark the compiled radial kernel against the pure-Python one.

Runs the same perturbed trajectory through both kernels, checks the
outputs are bit-identical, and reports steps per second.  Usage:

    python3 benchmarks/bench_radial.py [--steps N] [--step H] [--repeat K]
"""

import argparse
import math
import sys
import time

from kelvinasym import _radial_py, radial
from kelvinasym.kelvin import PhaseBranch


def best_time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=200_000, help="RK4 steps")
    parser.add_argument("--step", type=float, default=1e-3, help="step width")
    parser.add_argument("--repeat", type=int, default=3, help="best of K runs")
    args = parser.parse_args()

    theta = 3 * math.pi / 4
    branch = PhaseBranch.slag(theta)
    w1 = radial.radial_rhs(branch, 3, theta, 1.0, 1.1)
    kernel_args = (
        radial._KIND_CODES["SLAG"],
        branch.a,
        branch.b,
        3,
        theta,
        0.5,
        1.1,
        w1,
        args.step,
        args.steps,
        max(1, args.steps // 200),
    )

    py_time, py_out = best_time(
        lambda: _radial_py.run_kernel(*kernel_args), args.repeat
    )
    rows = [("python", py_time, args.steps / py_time)]

    if radial.kernel_name() == "compiled":
        from kelvinasym import _radial_rk4

        c_time, c_out = best_time(
            lambda: _radial_rk4.run_kernel(*kernel_args), args.repeat
        )
        rows.append(("compiled", c_time, args.steps / c_time))
        identical = all(
            all(x == y for x, y in zip(a, b)) for a, b in zip(py_out[:5], c_out[:5])
        ) and py_out[5:] == c_out[5:]
        if not identical:
            print("ERROR: kernels disagree on this workload", file=sys.stderr)
            return 1
    else:
        print("note: compiled kernel not built; timing the fallback only")

    print(f"\nperturbed SLAG trajectory, {args.steps} steps of {args.step:g}:")
    print(f"{'kernel':<10} {'seconds':>10} {'steps/sec':>14}")
    for name, seconds, rate in rows:
        print(f"{name:<10} {seconds:>10.4f} {rate:>14,.0f}")
    if len(rows) == 2:
        print(f"\nspeedup: {rows[0][1] / rows[1][1]:.1f}x, outputs bit-identical")
    return 0


if __name__ == "__main__":
    sys.exit(main())
