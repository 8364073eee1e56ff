"""Time the numba kernels against the pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both backends are loaded in one process via ``kernels.get_kernels``; the
numba versions are compiled (and cached) before timing.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np
from scipy.stats import binom

from isolines import kernels
from isolines.marginal import fit_marginal
from isolines.surface import survival_grid
from isolines.synth import SynthModel, generate


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    s = generate(SynthModel("logistic", 0.5, "gumbel"), 20_000, seed=1)
    grid = survival_grid(s.x1, s.x2)
    vals = np.ascontiguousarray(grid.values)
    level = 0.01

    big = generate(SynthModel("logistic", 0.5, "gumbel"), 1_000_000, seed=2)
    probes = np.column_stack([np.linspace(2, 6, 200), np.linspace(6, 2, 200)])

    m = fit_marginal(s.x1)
    xs = np.linspace(s.x1.min() - 1, s.x1.max() + 3, 200_000)
    f = m.cdf(np.linspace(s.x1.min(), m.x_thold_plus, 20_000))
    use_cdf = np.ones(f.size, dtype=np.bool_)
    lo, hi = float(m.knots_x[0]), float(m.x_thold_plus)

    pmf = binom.pmf(np.arange(20_001), 20_000, 0.001)

    return {
        "marching_squares 400x400": lambda k: k.marching_squares(vals, grid.x_coords, grid.y_coords, level),
        "exceedance_counts 1e6 x 200": lambda k: k.exceedance_counts(big.x1, big.x2, probes[:, 0].copy(),
                                                                     probes[:, 1].copy()),
        "blend_eval 2e5": lambda k: k.blend_eval(xs, *m._params),
        "blend_invert 2e4": lambda k: k.blend_invert(f, use_cdf, lo, hi, *m._params),
        "shortest_interval n=2e4": lambda k: k.shortest_interval(pmf, 0.95),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write timings here")
    args = ap.parse_args(argv)

    backends = {"numpy": kernels.get_kernels("numpy")}
    try:
        backends["numba"] = kernels.get_kernels("numba")
    except RuntimeError:
        print("numba not available; timing numpy only")
    rows = []
    for name, run in cases().items():
        row = {"kernel": name}
        for bname, k in backends.items():
            run(k)  # warm-up / compile
            row[bname] = _best(lambda: run(k), args.repeat)
        rows.append(row)

    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for r in rows:
        nb = r.get("numba")
        sp = f"{r['numpy'] / nb:7.1f}x" if nb else "    n/a"
        nbs = f"{1e3 * nb:12.2f}" if nb else f"{'n/a':>12s}"
        print(f"{r['kernel']:32s} {1e3 * r['numpy']:12.2f} {nbs} {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
