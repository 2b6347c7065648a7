"""Compare the compiled patch-distance core against the NumPy fallback.

Times the two hot paths behind non-local means (dense and windowed
kernel-matrix construction) and one end-to-end denoise, on both
backends, and checks that the results agree.  Run from the repository
root:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --sizes 256 1024 --repeats 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from denoisekit._accel import available_backends
from denoisekit.kernels import build_kernel_matrix
from denoisekit.nlm import nlm_denoise
from denoisekit.patches import PatchConfig
from denoisekit.rng import make_rng, standard_normal


def _best_of(fn, repeats: int) -> tuple[float, object]:
    best = np.inf
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def _max_diff(a, b) -> float:
    da = a.toarray() if hasattr(a, "toarray") else np.asarray(a)
    db = b.toarray() if hasattr(b, "toarray") else np.asarray(b)
    return float(np.max(np.abs(da - db)))


def bench_case(name: str, make_call, backends, repeats: int) -> None:
    rows = {}
    results = {}
    for backend in backends:
        seconds, value = _best_of(lambda b=backend: make_call(b), repeats)
        rows[backend] = seconds
        results[backend] = value
    line = f"{name:<34}"
    for backend in backends:
        line += f"  {backend}: {rows[backend] * 1e3:9.2f} ms"
    if len(backends) == 2 and rows["compiled"] > 0:
        line += f"  speedup: {rows['numpy'] / rows['compiled']:5.1f}x"
        diff = _max_diff(
            getattr(results["compiled"], "matrix", results["compiled"]),
            getattr(results["numpy"], "matrix", results["numpy"]),
        )
        line += f"  max|diff|: {diff:.1e}"
    print(line)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes", type=int, nargs="+", default=[256, 512, 1024],
        help="1D signal lengths for the dense build",
    )
    parser.add_argument(
        "--image", type=int, default=64, help="side length of the 2D windowed case"
    )
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats (best kept)")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("note: compiled core not built; timing the NumPy fallback only")
    print()

    dense_cfg = PatchConfig(patch_radius=2, search_radius=None)
    for n in args.sizes:
        x = standard_normal(make_rng(11), (n,))
        bench_case(
            f"dense kernel build, n={n}",
            lambda b, x=x: build_kernel_matrix(x, dense_cfg, alpha=0.5, backend=b),
            backends,
            args.repeats,
        )

    side = args.image
    img = standard_normal(make_rng(12), (side, side))
    windowed_cfg = PatchConfig(patch_radius=2, search_radius=4)
    bench_case(
        f"windowed kernel build, {side}x{side}",
        lambda b: build_kernel_matrix(img, windowed_cfg, alpha=0.5, backend=b),
        backends,
        args.repeats,
    )
    bench_case(
        f"nlm denoise, {side}x{side}",
        lambda b: nlm_denoise(img, 0.5, cfg=windowed_cfg, backend=b),
        backends,
        args.repeats,
    )


if __name__ == "__main__":
    main()
