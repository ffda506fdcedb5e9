#!/usr/bin/env python3
"""Errata ledger for a few coin angles and initial states.

    python3 scripts/run_audit.py [--out results/audit_sweep]
"""
import argparse
import os

from dtqw_wigner import cli

STATES = ("packet", "localized", "plane_wave", "random")
THETAS = (0.0, 0.15, 0.3, 0.7, 1.2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/audit_sweep")
    args = ap.parse_args()
    print(f"{'state':<11} {'theta':>6}  exit")
    for state in STATES:
        for theta in THETAS:
            out = os.path.join(args.out, f"{state}_theta{theta:g}")
            cfg = os.path.join(out, "config.json")
            os.makedirs(out, exist_ok=True)
            with open(cfg, "w") as fh:
                fh.write(f'{{"state": "{state}"}}\n')
            code = cli.main(["audit", "--config", cfg, "--theta", str(theta), "--out", out])
            print(f"{state:<11} {theta:>6g}  {code}")


if __name__ == "__main__":
    main()
