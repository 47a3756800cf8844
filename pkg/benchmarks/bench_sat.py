"""Benchmark the pure-Python SAT core against the compiled extension.

Two workloads:
  * random 3-SAT near the phase transition, growing sizes;
  * real forest-flip encodings from the bundled breast-cancer pipeline,
    solved across the same growing-box schedule the engine uses.

Run:  python3 benchmarks/bench_sat.py [--queries 40]
"""

import argparse
import pathlib
import random
import statistics
import sys
import time

REPO = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from forestcf import sat
from forestcf.counterfactual import CounterfactualQuery, find_min_counterfactual
from forestcf.data import load_csv, split
from forestcf.encoding import CnfFormula, ForestEncoder, extract_thresholds, make_box
from forestcf.forest import predict_forest
from forestcf.train import TrainConfig, train_forest

from helpers import random_3sat


def time_backend(backend: str, fn):
    import os

    os.environ["FORESTCF_SAT_BACKEND"] = backend
    try:
        start = time.perf_counter()
        out = fn()
        return time.perf_counter() - start, out
    finally:
        os.environ.pop("FORESTCF_SAT_BACKEND", None)


def bench_random_3sat():
    print("random 3-SAT at clause/var ratio 4.26")
    print(f"{'vars':>6} {'instances':>10} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}")
    for n_vars in (20, 40, 60, 80):
        rnd = random.Random(n_vars)
        formulas = [
            CnfFormula(n_vars=n_vars,
                       clauses=random_3sat(rnd, n_vars, int(4.26 * n_vars)),
                       var_meta={})
            for _ in range(30)
        ]

        def run_all():
            return [sat.solve(f).sat for f in formulas]

        t_pure, a = time_backend("pure", run_all)
        t_comp, b = time_backend("compiled", run_all)
        assert a == b, "backends disagree"
        print(f"{n_vars:>6} {len(formulas):>10} {t_pure:>10.3f} {t_comp:>13.3f} "
              f"{t_pure / t_comp:>7.1f}x")


def bench_forest_encodings(n_queries: int):
    raw = load_csv(REPO / "data" / "breast_cancer.csv", "diagnosis")
    train_d, test_d = split(raw, 0.5, seed=2024)
    forest = train_forest(train_d, TrainConfig(seed=2024))
    tmap = extract_thresholds(forest)

    # collect the exact formula sequence the engine would solve
    formulas = []
    for row in test_d.features[:n_queries]:
        x = tuple(float(v) for v in row)
        forbidden = predict_forest(forest, x)
        encoder = ForestEncoder(forest, tmap, forbidden)
        delta, prev = 0.01, None
        while True:
            box = make_box(x, delta, forest)
            profile = encoder.clamp_profile(box)
            if profile != prev:
                prev = profile
                formulas.append(encoder.encode_box(box))
                if sat.solve(formulas[-1]).sat:
                    break
            delta *= 1.01
            if delta > 1.0:
                break

    sizes = [len(f.clauses) for f in formulas]
    print(f"\nforest flip encodings: {len(formulas)} formulas from {n_queries} queries "
          f"(median {statistics.median(sizes):.0f} clauses)")

    def run_all():
        return [sat.solve(f).sat for f in formulas]

    t_pure, a = time_backend("pure", run_all)
    t_comp, b = time_backend("compiled", run_all)
    assert a == b, "backends disagree"
    print(f"{'pure':>10}: {t_pure:.3f}s  ({1000 * t_pure / len(formulas):.2f} ms/solve)")
    print(f"{'compiled':>10}: {t_comp:.3f}s  ({1000 * t_comp / len(formulas):.2f} ms/solve)")
    print(f"{'speedup':>10}: {t_pure / t_comp:.1f}x")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--queries", type=int, default=40,
                        help="test points to source flip encodings from")
    args = parser.parse_args()
    try:
        from forestcf.sat import _core  # noqa: F401
    except ImportError:
        print("compiled core is not built; install with `pip install -e .`",
              file=sys.stderr)
        return 1
    bench_random_3sat()
    bench_forest_encodings(args.queries)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
