#!/usr/bin/env python3
"""Writes a synthetic grid carbon-intensity trace with a solar "duck" dip."""
import argparse
import math
import random


def intensity(hour, rng):
    h = hour % 24.0
    evening = 110.0 * math.exp(-((h - 19.5) ** 2) / 8.0)
    solar = 170.0 * math.exp(-((h - 13.0) ** 2) / 9.0)
    night = 30.0 * math.cos(2.0 * math.pi * (h - 2.0) / 24.0)
    return max(40.0, 300.0 + evening - solar + night + rng.gauss(0.0, 6.0))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hours", type=float, default=48.0)
    ap.add_argument("--step-s", type=int, default=300)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="data/traces/duck_48h.csv")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    steps = int(args.hours * 3600 / args.step_s)
    with open(args.out, "w") as f:
        f.write("timestamp_s,gco2_per_kwh\n")
        for k in range(steps):
            t = k * args.step_s
            f.write(f"{t},{intensity(t / 3600.0, rng):.1f}\n")


if __name__ == "__main__":
    main()
