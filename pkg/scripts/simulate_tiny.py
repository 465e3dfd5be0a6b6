"""Block-length trend and randomization ablation on a tiny two-user code.

Runs the same rate point at n = 4 and n = 8, then repeats n = 8 with the
randomization rates halved, and prints error rates and equivocations.

    GMACWT_THREADS=4 python3 scripts/simulate_tiny.py --seed 0
"""

import argparse
import json
from dataclasses import replace

from gmacwt.simulator import ExperimentConfig, run_experiment


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--config", default="scripts/configs/tiny_collective.json")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    with open(args.config) as f:
        base = replace(ExperimentConfig.from_dict(json.load(f)), seed=args.seed)
    runs = {
        "n=4": replace(base, n=4),
        "n=8": replace(base, n=8),
        "n=8, R_x/2": replace(base, n=8, randomization_scale=0.5),
    }
    print(f"{'run':>12} {'sizes':>24} {'P_err':>8} {'95% CI':>18} {'D^I_K':>14} {'D^C_K':>14}")
    for name, cfg in runs.items():
        rep = run_experiment(cfg)
        full = str((1 << cfg.channel.num_users) - 1)
        di, dc = rep.equivocation["individual"][full], rep.equivocation["collective"][full]
        lo, hi = rep.p_err_ci
        print(f"{name:>12} {str(rep.code_sizes):>24} {rep.p_err:8.4f} [{lo:.4f}, {hi:.4f}]"
              f" {di['value']:.4f}+-{di['half_width']:.4f} {dc['value']:.4f}+-{dc['half_width']:.4f}")


if __name__ == "__main__":
    main()
