"""Reference exact designs for spring balance weighing (m = 6) from a
multi-start exchange search on the true criterion.

The search is independent of the package (plain numpy, see
tests/oracles.py). Its values are lower bounds on the exact optimum and
serve as the denominator of exact-design efficiency in the tests.

    python3 scripts/reference_designs.py --out tests/data/spring_balance_reference.csv
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import crit_value, exchange_best  # noqa: E402


def regressors(m):
    return np.array([[(i >> (m - 1 - j)) & 1 for j in range(m)] for i in range(2**m)], dtype=float)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="spring_balance_reference.csv")
    ap.add_argument("--n-min", type=int, default=6)
    ap.add_argument("--n-max", type=int, default=35)
    ap.add_argument("--starts-d", type=int, default=100)
    ap.add_argument("--starts-a", type=int, default=300)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    m = 6
    F = regressors(m)
    I, J = np.eye(m), np.ones((m, m))
    rows = []
    for crit, starts in (("D", args.starts_d), ("A", args.starts_a)):
        for N in range(args.n_min, args.n_max + 1):
            t0 = time.perf_counter()
            v, x = exchange_best(F, N, crit, starts=starts, seed=args.seed + N)
            Mstar = 2 * N / 7 * (I + J) if crit == "D" else 3 * N / 10 * I + 2 * N / 10 * J
            vstar = float(crit_value(Mstar, crit))
            eff = np.exp(v - vstar) if crit == "D" else vstar / v
            rows.append({
                "criterion": crit, "N": N, "value": repr(float(v)), "ad_efficiency": f"{eff:.6f}",
                "starts": starts, "design": " ".join(f"{i}:{int(k)}" for i, k in enumerate(x) if k),
            })
            print(f"{crit} N={N} value={v:.6f} ad_eff={eff:.4f} t={time.perf_counter() - t0:.1f}s", flush=True)
    with open(args.out, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=list(rows[0]))
        wr.writeheader()
        wr.writerows(rows)


if __name__ == "__main__":
    main()
