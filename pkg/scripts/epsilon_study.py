"""Energy remnant and budget residual of the reference problem as epsilon shrinks.

Also reports the residual with the regularization switched off.
"""

import argparse
import json

from nsbgk.validation import epsilon_study, unregularized_budget


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--t-final", type=float, default=0.2)
    ap.add_argument("--dt", type=float, default=2e-3)
    ap.add_argument("--json", action="store_true", help="one JSON object per row")
    args = ap.parse_args()
    rows = epsilon_study(tuple(args.epsilons), t_final=args.t_final, dt=args.dt)
    if not args.json:
        print(f"{'eps':>6} {'max|remnant|':>13} {'max|residual|':>14} {'5dt^2E0':>10} {'momentum':>10}")
    for r in rows:
        bound = 5 * args.dt**2 * r["E0"]
        if args.json:
            print(json.dumps({**r, "failure": None if r["failure"] is None else str(r["failure"]), "bound": bound}))
        else:
            print(
                f"{r['epsilon']:6.3f} {r['max_remnant']:13.3e} {r['max_residual']:14.3e}"
                f" {bound:10.3e} {r['momentum_drift']:10.2e}"
            )
    traj, res, E0 = unregularized_budget(args.t_final, args.dt)
    print(f"unregularized: max|residual| = {res:.3e} (bound {5 * args.dt**2 * E0:.3e}), ok={traj.ok}")


if __name__ == "__main__":
    main()
