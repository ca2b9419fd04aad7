"""Compiled versus pure-Python path kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--paths 20000] [--repeat 3]

Both backends consume the same random stream, so the script also confirms
that their outputs are identical before reporting timings.
"""

import argparse
import time

import numpy as np

from fracph import RngStream, load_model
from fracph._backend import available_backends, load_backend
from fracph.verify import as_mpha


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    d = as_mpha(load_model("preset:paper-fig3").dist)
    cum_init, cum_jump = d.base.sampling_tables()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}; {args.paths} paths, best of {args.repeat}")
    for alpha in (1.0, d.alpha):
        results = {}
        for name in backends:
            kernel = load_backend(name)

            def run():
                gen = RngStream(11).generator
                return kernel.simulate_rewards(gen, cum_init, cum_jump, d.base.rates, d.R, alpha, args.paths)

            results[name] = best_time(run, args.repeat)
        line = [f"alpha={alpha:<4}"]
        for name, (t, _) in results.items():
            line.append(f"{name}: {t * 1e3:8.1f} ms")
        if len(results) == 2:
            (tc, (yc, fc)), (tp, (yp, fp)) = results["cython"], results["python"]
            same = np.array_equal(yc, yp) and np.array_equal(fc, fp)
            line.append(f"speedup {tp / tc:5.1f}x  identical={same}")
        print("  ".join(line))


if __name__ == "__main__":
    main()
