#!/usr/bin/env python3
"""Remainder of the second-order spectral-derivative expansion against eps."""
from dtqw_wigner import suites


def main():
    eps = (0.4, 0.2, 0.1, 0.05, 0.025)
    for name, res in suites.expansion_slopes(eps).items():
        print(f"{name:<42} slope {res['slope']:.3f}")
        for e, r in res["points"]:
            print(f"    eps={e:<6g} remainder={r:.3e}")


if __name__ == "__main__":
    main()
