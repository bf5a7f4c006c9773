#!/usr/bin/env python3
"""Cross-check the closed-form bounds against the numerical SDP solvers.

Draws random parameter sets for every analysis, solves one bound step
with the closed form, the reduced solver, and the generic solver, and
reports the worst relative gaps plus certificate feasibility residuals.

Usage:
    python3 scripts/run_oracle_crosscheck.py --draws 20 --seed 1 \
        --out out/oracle_crosscheck.csv
"""

import argparse
import csv
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))
from conftest import ALL_KIND_VARIANTS, draw_params  # noqa: E402

from trackbound import solve_step_generic, solve_step_reduced, step  # noqa: E402
from trackbound.lmi import build  # noqa: E402
from trackbound.sdp_oracle import _lmi_data_scale  # noqa: E402
from trackbound.smallmat import max_eig  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="out/oracle_crosscheck.csv")
    args = ap.parse_args()
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    rng = np.random.default_rng(args.seed)

    rows = []
    for kind in ALL_KIND_VARIANTS:
        worst_gen = worst_red = worst_resid = 0.0
        for _ in range(args.draws):
            U, p = draw_params(kind, rng)
            closed = step(kind, U, p)
            gen = solve_step_generic(kind, U, p, seed=args.seed)
            worst_gen = max(worst_gen,
                            abs(gen.U_next - closed) / max(1.0, closed))
            scale = _lmi_data_scale(kind, p, gen.cert.lambdas)
            worst_resid = max(worst_resid,
                              max_eig(build(kind, p, gen.cert).entries)
                              / scale)
            red = solve_step_reduced(kind, U, p)
            if red is not None:
                worst_red = max(worst_red,
                                abs(red.U_next - closed) / max(1.0, closed))
        rows.append([str(kind), args.draws, repr(worst_gen), repr(worst_red),
                     repr(worst_resid)])
        print(f"{str(kind):28s} worst generic gap {worst_gen:.3e}  "
              f"worst reduced gap {worst_red:.3e}  "
              f"worst cert residual {worst_resid:.3e}")

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["analysis", "draws", "worst_generic_gap",
                    "worst_reduced_gap", "worst_cert_residual"])
        w.writerows(rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
