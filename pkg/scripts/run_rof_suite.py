#!/usr/bin/env python3
"""Run the full indicator-regression suite: both penalty variants at
eta in {0.1, 0.25} on the n=2 box, writing one run directory each."""

import argparse
import os

from jacreg.experiments import RofProblem, default_rof_config, run_rof


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs", help="parent output directory")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--iterations", type=int, default=20_000)
    ap.add_argument("--batch-size", type=int, default=2048)
    args = ap.parse_args()

    for eta in (0.1, 0.25):
        problem = RofProblem(n=2, eta=eta)
        for variant in ("exact_penalty", "hutchinson"):
            cfg = default_rof_config(problem, seed=args.seed,
                                     iterations=args.iterations,
                                     batch_size=args.batch_size)
            out = os.path.join(args.out, f"rof_n2_eta{eta}_{variant}")
            report, _ = run_rof(problem, variant, cfg, out_dir=out)
            s = report.summary
            print(f"{out}: objective {s['final_objective']:.5f} "
                  f"mae {s['final_mae']:.4f} plateau {s['plateau_mean']:.3f}")


if __name__ == "__main__":
    main()
