"""Measure ||M(f)||_q / ||f||_q over a corpus and print the constants to store in lemmas.py.

The stored constant is twice the largest ratio seen.
"""

import argparse

import numpy as np

from nsbgk.fields import DistributionField
from nsbgk.grid import PhaseGrid
from nsbgk.initial import gaussian
from nsbgk.lemmas import maxwellian_domination_ratio
from nsbgk.validation import lemma_corpus


def structured(dim):
    grid = PhaseGrid.build(dim, 2, 64 if dim == 1 else 32, 8.0)
    e1 = np.zeros(dim)
    for s in np.linspace(0.0, 3.0, 7):
        for T in (0.3, 1.0, 2.0):
            e1[0] = s
            yield DistributionField(grid, 0.5 * gaussian(grid, 1.0, e1, T) + 0.5 * gaussian(grid, 1.0, -e1, T))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()
    for dim in (1, 2):
        n = args.samples if dim == 1 else args.samples // 5
        fields = list(lemma_corpus(n, dim, args.seed)) + list(structured(dim))
        for q in (0.0, 6.0):
            ratios = np.array([maxwellian_domination_ratio(f, q) for f in fields])
            print(f"dim={dim} q={q}: n={len(ratios)} max={ratios.max():.6g} median={np.median(ratios):.6g} "
                  f"-> constant {2 * ratios.max():.4g}")


if __name__ == "__main__":
    main()
