#!/usr/bin/env python3
"""Continuum-limit convergence table for the default scaling family.

    python3 scripts/run_convergence.py [--jobs 4] [--mass 1.0]
"""
import argparse

from dtqw_wigner import continuum


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--mass", type=float, default=1.0)
    args = ap.parse_args()
    family = continuum.ScalingFamily(m=args.mass)
    result = continuum.run_family(family, args.jobs)
    print(f"{'eps':>9} {'variant':<20} corr  residual")
    for r in result["rows"]:
        print(f"{r['eps']:9.5f} {r['variant']:<20} {r['with_correction']:>4}  {r['residual_norm']:.4e}")
    print()
    for key, fit in continuum.slope_table(result).items():
        print(f"{key:<24} slope {fit.get('slope', float('nan')):7.3f}  r2 {fit.get('r2', float('nan')):.6f}")
    checks = continuum.convergence_checks(continuum.slope_table(result))
    for name, ok in checks.notes["checks"].items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")


if __name__ == "__main__":
    main()
