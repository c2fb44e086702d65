"""Benchmark of the compiled kernels against the numpy fallback.

Times the three numeric kernels at several problem sizes, plus one
end-to-end pipeline run per backend. Run from the repository root after
building the extension:

    python setup.py build_ext --inplace
    python benchmarks/bench_kernels.py
"""
import time

import numpy as np

from hiertax._kernels import _pure

try:
    from hiertax._kernels import _speedups
except ImportError:
    _speedups = None


def timeit(fn, *args, repeat=5, number=200):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def fmt(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    return f"{seconds * 1e3:8.2f} ms"


def bench_row(name, pure_fn, native_fn, args, number):
    t_pure = timeit(pure_fn, *args, number=number)
    if native_fn is None:
        print(f"{name:42s} {fmt(t_pure)}        (no native build)")
        return
    t_native = timeit(native_fn, *args, number=number)
    speedup = t_pure / t_native
    print(f"{name:42s} {fmt(t_pure)} {fmt(t_native)} {speedup:7.1f}x")


def block_args(rng, size):
    counts = rng.integers(0, 60, size=size).astype(np.float64)
    alpha = np.ones(size)
    return counts, alpha


def main():
    rng = np.random.default_rng(0)
    native = _speedups is not None
    print(f"native kernels available: {native}")
    header = f"{'kernel':42s} {'numpy':>11s} {'native':>11s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))

    for size in (16, 64, 512, 4096):
        counts, alpha = block_args(rng, size)
        bench_row(
            f"log_md_core (block={size})",
            _pure.log_md_core,
            _speedups.log_md_core if native else None,
            (counts, alpha),
            number=500,
        )

    for size in (16, 64, 512, 4096):
        ca, alpha = block_args(rng, size)
        cb, _ = block_args(rng, size)
        bench_row(
            f"prefix_merge_deltas (eligible={size})",
            _pure.prefix_merge_deltas,
            _speedups.prefix_merge_deltas if native else None,
            (ca, cb, alpha),
            number=500,
        )

    for docs, feats, k in ((500, 50, 5), (2000, 50, 7), (2000, 1000, 10)):
        dense = rng.poisson(2.0, size=(docs, feats))
        indptr = np.zeros(docs + 1, dtype=np.int64)
        indices, data = [], []
        for i, row in enumerate(dense):
            nz = np.nonzero(row)[0]
            indices.extend(nz.tolist())
            data.extend(row[nz].tolist())
            indptr[i + 1] = len(indices)
        indices = np.asarray(indices, dtype=np.int64)
        data = np.asarray(data, dtype=np.float64)
        log_theta = np.ascontiguousarray(np.log(rng.dirichlet(np.ones(feats), size=k)))
        log_prior = np.log(np.ones(k) / k)
        bench_row(
            f"doc_cluster_scores ({docs}x{feats}, k={k})",
            _pure.doc_cluster_scores,
            _speedups.doc_cluster_scores if native else None,
            (indptr, indices, data, log_theta, log_prior),
            number=20,
        )

    print()
    bench_pipeline()


def bench_pipeline():
    """One full synthetic two-stage run per backend."""
    import os
    import subprocess
    import sys

    sys.stdout.flush()

    code = (
        "import time\n"
        "from hiertax import ModelConfig, FeaturePartition, select_k, build_hierarchy\n"
        "from hiertax.synth import STRUCTURE_1, StructureSpec, gen_params, sample\n"
        "from hiertax import kernel_backend\n"
        "spec = StructureSpec(shape=STRUCTURE_1, noise_alloc=(15, 21), docs_per_leaf=500,\n"
        "                     tokens_per_doc=100, seed=0)\n"
        "data, truth = sample(gen_params(spec), spec)\n"
        "config = ModelConfig(k_range=(3, 7), restarts=3, seed=0)\n"
        "t0 = time.perf_counter()\n"
        "flat = select_k(data, FeaturePartition.all_useful(50), config)\n"
        "dendro = build_hierarchy(flat, config)\n"
        "dt = time.perf_counter() - t0\n"
        "print(f'{kernel_backend():7s} pipeline (2000 docs, k 3..7, 3 restarts): '\n"
        "      f'{dt:6.2f}s  merges={len(dendro.merge_trace)}')\n"
    )
    for backend in ("pure", ""):
        env = dict(os.environ)
        if backend:
            env["HIERTAX_KERNELS"] = backend
        else:
            env.pop("HIERTAX_KERNELS", None)
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


if __name__ == "__main__":
    main()
