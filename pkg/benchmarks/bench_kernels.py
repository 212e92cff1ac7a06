"""Compiled vs pure-Python inertia kernels on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends are checked to return identical counts before timing.
"""
import argparse
import time

import numpy as np

from qgwegner import _pykernels, kernels
from qgwegner import conditions as vc
from qgwegner import graph as gr
from qgwegner.assembly import Discretization


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    g = gr.path(16)
    d = Discretization(gr.restrict(g, g.edge_ids), vc.uniform_field(g, "kirchhoff"), 1 / 64)
    W, m = d.band(), d.m
    yield "band_count_many path(16) h=1/64, 41 shifts", "band_count_many", (W, m, np.linspace(0, 20, 41))
    g = gr.grid(4, 4)
    d = Discretization(gr.restrict(g, g.edge_ids), vc.uniform_field(g, "kirchhoff"), 1 / 16)
    yield (f"band_count_many grid(4,4) h=1/16 (n={d.n_dofs}, bw={d.mesh.bandwidth}), 11 shifts",
           "band_count_many", (d.band(), d.m, np.linspace(0, 20, 11)))
    rng = np.random.default_rng(0)
    A = rng.normal(size=(200, 200))
    A = A + A.T
    yield "dense_inertia n=200", "dense_inertia", (A,)
    yield "tql_eigenvalues n=500", "tql_eigenvalues", (rng.normal(size=500), rng.normal(size=500))


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .`")
    print(f"{'case':<62} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for label, name, inputs in cases():
        py_fn, c_fn = getattr(_pykernels, name), getattr(kernels.compiled_backend, name)
        t_py, r_py = _best(lambda: py_fn(*[np.array(x, copy=True) for x in inputs]), args.repeat)
        t_c, r_c = _best(lambda: c_fn(*[np.array(x, copy=True) for x in inputs]), args.repeat)
        if name != "tql_eigenvalues":
            assert np.array_equal(np.asarray(r_py), np.asarray(r_c)), label
        print(f"{label:<62} {t_py:>10.4f} {t_c:>11.5f} {t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
