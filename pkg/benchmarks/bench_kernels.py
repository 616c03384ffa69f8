"""Compare the compiled and the pure-Python bound kernels.

Two measurements per available backend:

* per-box cost of ``evaluate_box`` on boxes drawn from the worked example at
  its peak frequency (bisected a few levels so box sizes vary);
* wall time of a full parallel sweep of the worked example.

Usage::

    python benchmarks/bench_kernels.py [--boxes 2000] [--it 5000] [--repeat 3]
"""

import argparse
from pathlib import Path
import time

import numpy as np

from musweep import kernels
from musweep.bounds import evaluate_box
from musweep.cli import load_model
from musweep.engine import make_grid, run_parallel
from musweep.plant import freq_response
from musweep.uncertainty import bisect_longest_edge, unit_box

EXAMPLE = Path(__file__).resolve().parent.parent / "data" / "example_model.json"


def sample_boxes(count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        q = unit_box(2)
        for _ in range(int(rng.integers(0, 12))):
            q = bisect_longest_edge(q)[int(rng.integers(0, 2))]
        out.append(q)
    return out


def time_boxes(m, boxes, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        for q in boxes:
            evaluate_box(m, q)
        best = min(best, time.perf_counter() - start)
    return best / len(boxes)


def time_sweep(model, it, repeat):
    grid = make_grid(0.01, 15.01, 30, 50)
    best, res = np.inf, None
    for _ in range(repeat):
        start = time.perf_counter()
        res = run_parallel(model, grid, 0.01, it)
        best = min(best, time.perf_counter() - start)
    return best, res


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--boxes", type=int, default=2000)
    p.add_argument("--it", type=int, default=5000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    model, _ = load_model(EXAMPLE)
    m = np.ascontiguousarray(freq_response(model, 0.01 + 15.0 * 915 / 1499))
    boxes = sample_boxes(args.boxes)
    prev = kernels.backend_name()
    rows = []
    try:
        for name in kernels.available():
            kernels.use(name)
            per_box = time_boxes(m, boxes, args.repeat)
            sweep, res = time_sweep(model, args.it, args.repeat)
            rows.append((name, per_box, sweep, res.mu_hat, res.metrics.boxes_created))
    finally:
        kernels.use(prev)

    print(f"{'backend':<8} {'per box (us)':>13} {'sweep (s)':>10} {'mu_hat':>12} {'boxes':>8}")
    for name, per_box, sweep, mu, nbox in rows:
        print(f"{name:<8} {per_box * 1e6:13.1f} {sweep:10.3f} {mu:12.8f} {nbox:8d}")
    if len(rows) == 2:
        ref = dict((r[0], r) for r in rows)
        print(f"speed-up: {ref['python'][1] / ref['cython'][1]:.1f}x per box, "
              f"{ref['python'][2] / ref['cython'][2]:.1f}x per sweep")


if __name__ == "__main__":
    main()
