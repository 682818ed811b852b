"""Benchmark grid over the synthetic scenarios.

Runs every method (plain boosting, confidence-weighted boosting, the
discard/flip preprocessing baselines at cutoffs 0.2/0.5/0.8, and a lone
stump) across noise levels 0/10/20/30%, then writes results.json and
results.csv per scenario. With default settings this reproduces the
benchmark tables the acceptance tests pin; expect a few minutes per
scenario at 30 repetitions with --jobs 4.

    python scripts/synthetic_benchmark.py --out-dir results --jobs 4
"""

import argparse
import json
import os

from cbboost.boost import BoostConfig
from cbboost.harness import ExperimentConfig, run_experiment, table_to_csv, table_to_json

METHODS = (
    "stump",
    "adaboost",
    "cb",
    "disc:0.2", "disc:0.5", "disc:0.8",
    "corr:0.2", "corr:0.5", "corr:0.8",
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--scenarios", default="normal,sine")
    ap.add_argument("--noise-levels", default="0,0.1,0.2,0.3")
    ap.add_argument("--methods", default=",".join(METHODS))
    ap.add_argument("--repetitions", type=int, default=30)
    ap.add_argument("--train-n", type=int, default=500)
    ap.add_argument("--test-n", type=int, default=10000)
    ap.add_argument("--iterations", type=int, default=200)
    ap.add_argument("--mode", choices=("weighted", "resample"), default="weighted")
    ap.add_argument("--confidence-method", choices=("knn", "bayes"), default="knn")
    ap.add_argument("--seed", type=int, default=20240501)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for scenario in args.scenarios.split(","):
        cfg = ExperimentConfig(
            scenario=scenario,
            train_n=args.train_n,
            test_n=args.test_n,
            noise_levels=tuple(float(x) for x in args.noise_levels.split(",")),
            methods=tuple(args.methods.split(",")),
            repetitions=args.repetitions,
            base_seed=args.seed,
            confidence_method=args.confidence_method,
            boost=BoostConfig(max_iterations=args.iterations, learner_mode=args.mode),
            jobs=args.jobs,
        )
        table = run_experiment(cfg)
        json_path = os.path.join(args.out_dir, f"{scenario}_{args.mode}.json")
        csv_path = os.path.join(args.out_dir, f"{scenario}_{args.mode}.csv")
        with open(json_path, "w") as fh:
            fh.write(table_to_json(table))
            fh.write("\n")
        with open(csv_path, "w", newline="") as fh:
            fh.write(table_to_csv(table))
        print(f"# {scenario} ({args.mode} mode, {args.repetitions} reps)")
        for (mspec, level), cell in sorted(table.cells.items()):
            mean = "....." if cell.mean is None else f"{cell.mean:.4f}"
            std = "....." if cell.std is None else f"{cell.std:.4f}"
            print(f"  {mspec:<10} @{level:>4} : {mean} +/- {std}")
        print(f"wrote {json_path} and {csv_path}")


if __name__ == "__main__":
    main()
