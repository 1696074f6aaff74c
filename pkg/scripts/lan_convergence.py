"""Empirical mean and variance of the log-likelihood ratio under the null
for growing n, against the LAN limit N(-sigma2/2, sigma2).

    python scripts/lan_convergence.py --model delta --ns 1000 10000 100000
"""

import argparse
from pathlib import Path

from gpptest import mc
from gpptest.config import load_config
from gpptest.errors import GPPTestError

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--model", choices=["delta", "expfam"], default="delta")
    ap.add_argument("--ns", type=int, nargs="+", default=[10**3, 10**4, 10**5, 10**6])
    ap.add_argument("--xi", type=float, default=1.0)
    ap.add_argument("--replications", type=int, default=5000)
    args = ap.parse_args()

    base = load_config(ROOT / "configs" / f"{args.model}_lan.yaml")
    print(f"{'n':>9} {'c_n':>9} {'theta_n':>9} {'mean':>9} {'var':>8} {'limit mean':>10} {'limit var':>9}")
    for n in args.ns:
        cfg = base.with_overrides(n=n, xi=args.xi, replications=args.replications)
        try:
            res = mc.lan_empirical_check(cfg)
        except GPPTestError as exc:  # e.g. theta_n outside the valid range at small n
            print(f"{n:9d} skipped: {exc}")
            continue
        print(f"{n:9d} {res.c:9.5f} {res.theta_n:9.4f} {res.mean:9.4f} {res.variance:8.4f} "
              f"{res.predicted_mean:10.4f} {res.predicted_variance:9.4f}")


if __name__ == "__main__":
    main()
