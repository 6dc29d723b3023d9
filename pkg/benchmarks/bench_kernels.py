"""Time the per-pixel kernels on the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1 4]

``--scale k`` multiplies both frame sides of the 256x192 reference frame by k.
Numba compile time is paid in an untimed warm-up call.
"""
import argparse
import timeit

import numpy as np

from atagwarp import _accel, synth
from atagwarp.atag import AtagCorrespondence, atag_field
from atagwarp.geometry import ArmChain, Point2
from atagwarp.pipeline import run_warp
from atagwarp.raster import SourceMap, backward_warp
from atagwarp.tps import tps_fit, tps_field


def cases(scale):
    h, w = 256 * scale, 192 * scale
    full = np.ones((h, w), bool)
    k = float(scale)
    target = ArmChain(Point2(40 * k, 60 * k), Point2(90 * k, 120 * k), Point2(60 * k, 190 * k))
    source = ArmChain(Point2(45 * k, 60 * k), Point2(60 * k, 130 * k), Point2(70 * k, 200 * k))
    corr = AtagCorrespondence(target, source)

    rng = np.random.default_rng(0)
    ctrl = rng.uniform(0, min(h, w), (7, 2))
    model = tps_fit(np.stack([ctrl, ctrl + rng.normal(0, 6 * k, ctrl.shape)], axis=1), lam=1e-3)

    img = rng.integers(0, 256, (h, w, 3), dtype=np.uint8)
    mask = rng.random((h, w)) < 0.8
    smap = SourceMap.identity(full)
    smap.coords += rng.uniform(-3, 3, smap.coords.shape)
    sample = synth.identity_sample(1)

    out = {
        "atag_field": lambda: atag_field(full, corr),
        "tps_field": lambda: tps_field(full, model),
        "backward_warp": lambda: backward_warp(img, mask, smap),
    }
    if scale == 1:
        out["run_warp (identity sample)"] = lambda: run_warp(sample)
    return (h, w), out


def bench(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--scale", type=int, nargs="+", default=[1, 4])
    args = p.parse_args(argv)
    backends = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])
    print(f"{'kernel':30s} {'frame':>10s} " + " ".join(f"{b:>10s}" for b in backends)
          + ("  speed-up" if len(backends) == 2 else ""))
    for scale in args.scale:
        shape, fns = cases(scale)
        for name, fn in fns.items():
            times = []
            for b in backends:
                _accel.set_backend(b)
                times.append(bench(fn, args.repeat))
            _accel.set_backend(None)
            row = f"{name:30s} {shape[0]:>4d}x{shape[1]:<5d} " + " ".join(
                f"{t * 1e3:8.1f}ms" for t in times)
            if len(times) == 2:
                row += f"  {times[0] / times[1]:7.1f}x"
            print(row)


if __name__ == "__main__":
    main()
