#!/usr/bin/env python3
"""Validate certified bounds against simulated trajectories.

Runs the bundled command-line interface once per analysis with a
representative configuration, producing per-analysis CSV traces and SVG
plots of the certified sqrt-bound against the measured error, and
checks the soundness exit code.

Usage:
    python3 scripts/run_soundness_experiment.py --horizon 150 \
        --trials 200 --outdir out/soundness
"""

import argparse
import json
import os
import subprocess
import sys

CONFIGS = {
    "exact_ogd": {"schedule": {"m": 1.0, "L": 10.0, "alpha": 0.1,
                               "sigma": 0.05, "U0": 1.0}},
    "inexact_ogd_abs": {"schedule": {"m": 1.0, "L": 10.0, "alpha": 0.1,
                                     "sigma": 0.05, "c": 0.2, "U0": 1.0}},
    "inexact_ogd_rel": {"schedule": {"m": 1.0, "L": 10.0, "alpha": 0.1,
                                     "sigma": 0.05, "delta": 0.1, "U0": 1.0}},
    "vi_ogd": {"schedule": {"m": 1.0, "L": 2.0, "alpha": 0.2, "sigma": 0.05,
                            "c": 0.2, "delta": 0.1, "U0": 1.0}},
    "stoch_ogd_iid": {"schedule": {"m": 1.0, "L": 10.0, "alpha": 0.1,
                                   "sigma": 0.03, "c": 0.3, "U0": 1.0}},
    "finite_sum:smooth": {"schedule": {"m": 1.0, "L": 10.0, "alpha": 0.008,
                                       "sigma": 0.02, "G": 0.5, "U0": 1.0}},
    "ip_ogd": {"schedule": {"m": 1.0, "L": 10.0, "alpha": 0.1, "sigma": 0.05,
                            "c": 0.1, "Lg": 0.5, "U0": 1.0}},
    "biased_sgd": {"schedule": {"m": 1.0, "L": 10.0, "alpha": 0.005,
                                "c": 0.1, "delta": 0.05, "G": 0.5,
                                "U0": 1.0}},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=int, default=150)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--outdir", default="out/soundness")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    failures = 0
    for name, doc in CONFIGS.items():
        doc = {"analysis": name, **doc, "seed": args.seed,
               "trials": args.trials}
        doc["schedule"]["horizon"] = args.horizon
        slug = name.replace(":", "_")
        cfg_path = os.path.join(args.outdir, slug + ".json")
        with open(cfg_path, "w") as fh:
            json.dump(doc, fh, indent=2)
        out = os.path.join(args.outdir, slug + ".csv")
        svg = os.path.join(args.outdir, slug + ".svg")
        proc = subprocess.run(
            [sys.executable, "-m", "trackbound", "simulate",
             "--config", cfg_path, "--out", out, "--svg", svg],
            capture_output=True, text=True)
        status = "sound" if proc.returncode == 0 else (
            f"VIOLATION (exit {proc.returncode})")
        failures += proc.returncode != 0
        print(f"{name:24s} {status}  -> {out}, {svg}")
        if proc.stderr:
            print(proc.stderr, end="", file=sys.stderr)
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
