"""Picard iteration counts and contraction ratios of the first reference step for several dt."""

import argparse

from nsbgk.validation import longest_run_below, picard_contraction


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dts", type=float, nargs="+", default=[1e-2, 5e-3, 2e-3, 1e-3])
    ap.add_argument("--tol", type=float, default=1e-14)
    ap.add_argument("--max-iter", type=int, default=12)
    args = ap.parse_args()
    # the first ratio is the clean contraction rate; later ones sit near round-off
    print(f"{'dt':>8} {'iters':>5} {'1st ratio':>10} {'max ratio':>10} {'run<0.5':>7}  ratios")
    for dt in args.dts:
        norms, ratios = picard_contraction(dt, args.tol, args.max_iter)
        shown = " ".join(f"{r:.2e}" for r in ratios[:8])
        first = ratios[0] if ratios else 0.0
        print(f"{dt:8.1e} {len(norms):5d} {first:10.3e} {max(ratios, default=0):10.3e} {longest_run_below(ratios):7d}  {shown}")


if __name__ == "__main__":
    main()
