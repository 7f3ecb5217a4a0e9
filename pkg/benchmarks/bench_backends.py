#!/usr/bin/env python3
"""Benchmark the hot kernels: Numba @njit build vs pure-NumPy fallback.

Builds a mid-size synthetic corpus, flattens the career+education graphs to
flow arrays, then times each kernel under both backends. Run:

    python3 benchmarks/bench_backends.py [--jobs 2000] [--courses 300]
                                         [--skills 800] [--repeat 5]

The same comparison at the whole-pipeline level: run the CLI twice with
SKILLGRAPH_NUMBA=0 and =1.
"""
from __future__ import annotations

import argparse
import tempfile
import time

import numpy as np

from skillgraph import ingest, kernels
from skillgraph.community import FlowGraph
from skillgraph.graph import GraphIndex, build_career_graph, build_education_graph, merge_graphs
from skillgraph.synth import generate_synthetic_corpus


def timeit(fn, repeat: int) -> float:
    fn()  # warm-up (and JIT compile for the numba build)
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=2000)
    parser.add_argument("--courses", type=int, default=300)
    parser.add_argument("--skills", type=int, default=800)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"numba available: {'numba' in kernels.BACKENDS}; "
          f"active backend: {kernels.ACTIVE_BACKEND}")
    with tempfile.TemporaryDirectory() as tmp:
        corpus = generate_synthetic_corpus(0, args.jobs, args.courses, args.skills,
                                           alignment=0.2, out_dir=tmp)
    courses = ingest.apply_skill_matching(corpus.courses, corpus.skills)
    education = build_education_graph(courses, corpus.enrollments, catalog=corpus.skills)
    career = build_career_graph(corpus.jobs)
    merged = merge_graphs(education, career)
    index = GraphIndex(merged)
    src, dst, wgt, dangling = index.combined_transition()
    fg = FlowGraph.from_graph(merged, 0.15)
    n = index.n
    print(f"graph: {n} nodes, {src.size} transition edges, "
          f"{fg.esrc.size} flow edges")

    rng = np.random.default_rng(0)
    raw = rng.integers(0, 12, size=fg.n_units)
    _, part_labels = np.unique(raw, return_inverse=True)
    part_labels = part_labels.astype(np.int64)
    scores = np.zeros(n)
    scores[rng.integers(0, n, size=20)] = 1.0 / 20
    mask = (rng.random(n) < 0.5).astype(np.float64)
    order = rng.permutation(fg.n_units).astype(np.int64)

    cases = {
        "power_iterate": lambda impl: impl(src, dst, wgt, dangling, n, 0.15, 1e-12, 10_000),
        "partition_cost": lambda impl: impl(part_labels, fg.visit, fg.tele, fg.size,
                                            fg.esrc, fg.edst, fg.eflow,
                                            float(fg.n_orig), fg.node_plogp_sum),
        "propagate_step": lambda impl: impl(scores, fg.esrc, fg.edst, fg.eflow, mask, n),
    }

    header = f"{'kernel':<18}" + "".join(f"{name:>12}" for name in kernels.BACKENDS)
    print(header)
    speedups = {}
    for case, runner in cases.items():
        times = {}
        for name, impls in kernels.BACKENDS.items():
            times[name] = timeit(lambda impls=impls: runner(impls[case]), args.repeat)
        row = f"{case:<18}" + "".join(f"{times[name] * 1e3:>10.2f}ms" for name in kernels.BACKENDS)
        print(row)
        if "numba" in times:
            speedups[case] = times["numpy"] / times["numba"]

    # the move sweep mutates state, so rebuild it per run
    times = {}
    for name, impls in kernels.BACKENDS.items():
        def run_sweep(impls=impls):
            labels = np.arange(fg.n_units, dtype=np.int64)
            state = fg.singleton_module_state()
            impls["local_move_pass"](
                order, labels, fg.visit, fg.tele, fg.size, fg.sout,
                fg.out_ptr, fg.out_idx, fg.out_flow, fg.in_ptr, fg.in_idx, fg.in_flow,
                state["mod_visit"], state["mod_tele"], state["mod_size"],
                state["mod_cross"], state["mod_exit"], state["exit_sum"],
                float(fg.n_orig), 1e-10)

        times[name] = timeit(run_sweep, args.repeat)
    print(f"{'local_move_pass':<18}"
          + "".join(f"{times[name] * 1e3:>10.2f}ms" for name in kernels.BACKENDS))
    if "numba" in times:
        speedups["local_move_pass"] = times["numpy"] / times["numba"]
    if speedups:
        print("speedups (numpy/numba): "
              + ", ".join(f"{k}={v:.1f}x" for k, v in speedups.items()))


if __name__ == "__main__":
    main()
