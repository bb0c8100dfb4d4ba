"""Time the compiled kernels against their pure-Python twins.

    python benchmarks/bench_kernels.py [--docs 300] [--repeat 3]

Both backends get identical inputs (a synthetic corpus's Gram matrix for
SMO, its term columns for the split scan) and must return identical results.
"""

import argparse
import time

import numpy as np

from wontfix import _ext
from wontfix.features import build_matrix, fit_corpus_vocabulary
from wontfix.synthetic import generate_corpus


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def split_inputs(matrix):
    sub = matrix.to_csr().tocsc()
    sub.sum_duplicates()
    cols = np.repeat(np.arange(sub.shape[1]), np.diff(sub.indptr))
    order = np.lexsort((sub.data, cols))
    y = (matrix.signs() > 0).astype(np.int64)
    return (sub.indptr.astype(np.int64), sub.data[order], y[sub.indices[order]],
            matrix.n_docs, int(y.sum()), 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    corpus = generate_corpus(args.docs, seed=1)
    matrix = build_matrix(corpus, fit_corpus_vocabulary(corpus))
    X = matrix.to_csr()
    K = (X @ X.T).toarray()
    y = matrix.signs()
    smo_args = (K, y, 1.0, 1e-3, 1e-12, 10_000, 0, False)
    scan_args = split_inputs(matrix)

    backends = _ext.backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the Python backend is available")
    print(f"{matrix.n_docs} documents, {matrix.n_terms} terms, default backend: {_ext.BACKEND}")
    print(f"{'kernel':<12}{'backend':<10}{'seconds':>10}{'speedup':>10}")
    for name, args_ in (("smo_solve", smo_args), ("scan_splits", scan_args)):
        results = {}
        for label, mod in backends.items():
            seconds, out = best_of(lambda: getattr(mod, name)(*args_), args.repeat)
            results[label] = (seconds, out)
        base = results["python"][0]
        for label, (seconds, _) in results.items():
            print(f"{name:<12}{label:<10}{seconds:10.4f}{base / seconds:9.1f}x")
        if len(results) == 2:
            a, b = results["python"][1], results["compiled"][1]
            same = all(np.array_equal(np.asarray(u), np.asarray(v)) for u, v in zip(a, b))
            print(f"{'':<12}identical results: {same}")


if __name__ == "__main__":
    main()
