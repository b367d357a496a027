"""Compare the numba kernels with the numpy fallback.

Run: python benchmarks/bench_kernels.py [--repeat 3]
"""
from __future__ import annotations

import argparse
import time
from fractions import Fraction

import numpy as np

from blform import _kernels
from blform.datum import NormalForm
from blform.quadrature import QuadConfig, log_rule, pv_form
from blform.specs import Gaussian, Tensor, Translate


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_contract(repeat, n=256, chunk=60):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((chunk, n, 1))
    b = rng.standard_normal((chunk, n, n))
    c = rng.standard_normal((chunk, 1, n))
    w = rng.random((n, n))
    k = rng.random(chunk)
    return lambda: _kernels.contract([a, b, c], w, k)


def bench_fourier(repeat, nt=20001, nxi=512):
    ts = np.linspace(0.0, 20.0, nt)
    xi = np.linspace(0.5, 1.5, nxi)
    w = np.full(nxi, 1.0 / nxi)
    return lambda: _kernels.fourier_synthesis(ts, xi, w)


def bench_form(repeat, points=128):
    sh = lambda s, a: Translate((s,), Gaussian(a))
    f = sh(0.3, 1.2)
    G = Tensor(sh(-0.4, 1.0), sh(0.2, 0.8))
    H = Tensor(sh(0.5, 0.9), sh(-0.3, 1.1))
    cfg = QuadConfig(xy_points=points, xy_box=8.0, refine=False)
    return lambda: pv_form(NormalForm("L4", Fraction(2)), f, G, H, cfg).value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels.numba is None:
        print("numba is not installed, nothing to compare")
        return
    cases = [("contract 3 factors", bench_contract), ("fourier synthesis", bench_fourier), ("pv_form L4(2)", bench_form)]
    print(f"{'case':<22}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, make in cases:
        fn = make(args.repeat)
        res = {}
        for backend in ("numba", "numpy"):
            _kernels.set_backend(backend)
            fn()  # warm up, includes compilation for numba
            res[backend] = _best(fn, args.repeat)
        diff = np.max(np.abs(np.asarray(res["numba"][1]) - np.asarray(res["numpy"][1])))
        tn, tb = res["numpy"][0], res["numba"][0]
        print(f"{name:<22}{tn:>12.4f}{tb:>12.4f}{tn / tb:>10.2f}{diff:>14.3g}")
    _kernels.set_backend(_kernels._env_backend())


if __name__ == "__main__":
    main()
