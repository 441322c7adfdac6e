"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from apronid import kernels
from apronid.geometry import convex_hull_giftwrap, convex_hull_monotone, mask_diameter_sq
from apronid.photogrammetry import GroundSampleDistance
from apronid.synthkit import SynthSpec, rasterize


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    disc = rng.normal(size=(5000, 2))
    disc = np.unique((disc / np.linalg.norm(disc, axis=1, keepdims=True) * 20000).astype(np.int64), axis=0)
    square = rng.integers(0, 1 << 16, size=(20000, 2))
    gsd = GroundSampleDistance(3.13)
    a380 = rasterize(SynthSpec("ellipse", 73, 14.6, heading_deg=37, gsd=gsd))
    cm2 = rasterize(SynthSpec("cross", 13, 16, heading_deg=120, gsd=gsd))
    return [
        ("giftwrap, 5k points on a circle", lambda b: convex_hull_giftwrap(disc, backend=b)),
        ("monotone, 5k points on a circle", lambda b: convex_hull_monotone(disc, backend=b)),
        ("giftwrap, 20k uniform points", lambda b: convex_hull_giftwrap(square, backend=b)),
        ("mask diameter, A-380 ellipse", lambda b: mask_diameter_sq(a380, backend=b)),
        ("mask diameter, CM2 cross", lambda b: mask_diameter_sq(cm2, backend=b)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the Python fallback is timed")
    header = f"{'case':<34}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, fn in cases():
        times = [_time(lambda: fn(b), args.repeat) for b in backends]
        line = f"{name:<34}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
