#!/usr/bin/env python3
"""
Poisson chaos of order two: spreading the kernel support kills the star
contraction at rate 1/n, and the fourth moment approaches its free Poisson
target at the same rate.  A semicircular sequence with the same variance is
shown for contrast.
"""

from __future__ import annotations

import argparse

from freechaos.chaos import poisson_moment, wigner_moment
from freechaos.distributions import free_poisson_moment_single
from freechaos.harness import family_counterexample, family_poisson_spread
from freechaos.kernels import norm, star_contract


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--lam", type=int, default=1)
    p.add_argument("--n", type=int, nargs="+", default=[1, 2, 4, 8, 16, 32, 64])
    a = p.parse_args(argv)

    spread = family_poisson_spread({1: a.lam}, q=2)
    contrast = family_counterexample(lam=a.lam)
    t4 = float(free_poisson_moment_single(a.lam, 4))
    print(f"target fourth moment {t4:g}")
    print(f"{'n':>4} {'|f*f|^2':>10} {'lam/n':>8} {'poisson m4 err':>15} {'wigner m4 err':>14}")
    for n in a.n:
        f = spread.kernel(n, 1)
        s2 = norm(star_contract(f, f, 2)) ** 2
        e_p = abs(poisson_moment([f] * 4) - t4)
        e_w = abs(wigner_moment([contrast.kernel(n, 1)] * 4) - t4)
        print(f"{n:>4} {s2:>10.5f} {a.lam / n:>8.5f} {e_p:>15.5f} {e_w:>14.5f}")


if __name__ == "__main__":
    main()
