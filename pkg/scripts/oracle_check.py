#!/usr/bin/env python3
"""Compare random matrix moment estimates with the semicircle and free Poisson laws."""

from __future__ import annotations

import argparse
import time

from freechaos.oracle import SimConfig, estimate_moments


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=400)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lam", type=float, nargs="+", default=[1.0, 0.5])
    p.add_argument("--max-order", type=int, default=6)
    p.add_argument("--threads", type=int, default=4)
    a = p.parse_args(argv)

    orders = tuple(range(1, a.max_order + 1))
    runs = [SimConfig(a.N, a.trials, a.seed, "semicircle", 1.0, orders, a.threads)]
    runs += [SimConfig(a.N, a.trials, a.seed, "free_poisson", lam, orders, a.threads) for lam in a.lam]
    for cfg in runs:
        start = time.perf_counter()
        est = estimate_moments(cfg)
        label = cfg.model if cfg.model == "semicircle" else f"free_poisson(lam={cfg.lam:g})"
        print(f"{label}  [{time.perf_counter() - start:.1f}s]")
        print(f"  {'k':>2} {'estimate':>12} {'stderr':>10} {'target':>10} {'z':>6}")
        for e in est:
            print(f"  {e.order:>2} {e.estimate:>12.5f} {e.stderr:>10.5f} {e.target:>10.4f} {e.z():>6.2f}")


if __name__ == "__main__":
    main()
