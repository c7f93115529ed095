#!/usr/bin/env python3
"""Write configs for every simulation and empirical table cell, and optionally run them.

    scripts/sweep.py --out sweep/                  # configs only
    scripts/sweep.py --out sweep/ --run --cli build/tools/qcsa --threads 8
    scripts/sweep.py --out sweep/ --run --only rho   # one table family

Empirical cells are written only when --stock / --wage point at CSV files.
"""

import argparse
import json
import pathlib
import subprocess
import sys

METHODS = ["CSA", "JMA", "L1QR", "BAG", "L2QR"]
GRID9 = [round(0.1 * i, 1) for i in range(1, 10)]


def simulation_cells(R):
    def cell(name, **design):
        base = {"family": "misspecified", "R2": 0.5, "tau": 0.5, "rho_x": 0.9, "n_test": 100, "R": R}
        base.update(design)
        return name, {"design": base, "methods": METHODS}

    for tau in (0.5, 0.1):
        for n in (50, 150):
            for r2 in GRID9:
                yield "r2", cell(f"r2_tau{tau}_n{n}_R2{r2}", n=n, R2=r2, tau=tau)
    for n in (50, 150):
        for tau in GRID9:
            yield "tau", cell(f"tau_n{n}_tau{tau}", n=n, tau=tau)
        for rho in [round(0.1 * i, 1) for i in range(10)]:
            yield "rho", cell(f"rho_n{n}_rho{rho}", n=n, rho_x=rho)
    for signal in ("decreasing", "constant", "sparse"):
        for n, ks in ((50, (5, 15)), (150, (10, 20))):
            for K in ks:
                yield "correct", cell(f"correct_{signal}_n{n}_K{K}", family="correct", signal=signal, n=n, K=K)


def empirical_cells(stock, wage):
    if stock:
        for tau in (0.05, 0.5):
            for T1 in (48, 60, 72, 96, 120, 144, 180):
                yield "stock", f"stock_tau{tau}_T1{T1}", "forecast-rolling", {
                    "data": {"path": str(stock), "outcome": "excess_return"},
                    "T1": T1, "tau": tau, "methods": METHODS}
    if wage:
        for tau in (0.05, 0.5):
            for n1 in (50, 100, 150, 200):
                yield "wage", f"wage_tau{tau}_n1{n1}", "eval-split", {
                    "data": {"path": str(wage), "outcome": "lwage",
                             "regressors": ["profocc", "educ", "tenure", "female", "servocc", "married",
                                            "trade", "smsa", "services", "clerocc"]},
                    "n1": n1, "reps": 200, "tau": tau, "methods": METHODS}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=pathlib.Path, required=True)
    ap.add_argument("--R", type=int, default=1000, help="replications per simulation cell")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--stock", type=pathlib.Path)
    ap.add_argument("--wage", type=pathlib.Path)
    ap.add_argument("--only", action="append", help="table family: r2, tau, rho, correct, stock, wage")
    ap.add_argument("--run", action="store_true")
    ap.add_argument("--cli", default="build/tools/qcsa")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    jobs = []
    for family, (name, cfg) in simulation_cells(args.R):
        jobs.append((family, name, "simulate", cfg))
    jobs.extend(empirical_cells(args.stock, args.wage))
    if args.only:
        jobs = [j for j in jobs if j[0] in args.only]

    for family, name, command, cfg in jobs:
        cell_dir = args.out / name
        cell_dir.mkdir(parents=True, exist_ok=True)
        cfg = dict(cfg, seed=args.seed)
        (cell_dir / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")
        if not args.run:
            continue
        if (cell_dir / "summary.json").exists():
            print(f"skip {name} (done)", file=sys.stderr)
            continue
        print(f"run {name}", file=sys.stderr)
        subprocess.run([args.cli, command, "--config", str(cell_dir / "config.json"),
                        "--threads", str(args.threads), "--out-dir", str(cell_dir)], check=True)
    print(f"{len(jobs)} cells under {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
