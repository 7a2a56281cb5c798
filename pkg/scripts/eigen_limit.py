"""Limit of (1 - xi_k(j)) / (1 - xi_k(1)) as k grows, against both candidate limits.

j(j + 2 lam) / (2 lam + 1) and j(j + 2 lam) / (2 lam) are the two values in
circulation; the table shows which one the multipliers approach.

    python3 scripts/eigen_limit.py --n 3 --k-list 16,64,256,1024
"""

import argparse
import math

from capjackson.analysis import eigen_ratio_table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--s", type=int, default=3)
    ap.add_argument("--gamma", type=float, default=math.pi / 2)
    ap.add_argument("--k-list", default="16,64,256,1024")
    ap.add_argument("--j-top", type=int, default=6)
    args = ap.parse_args(argv)
    ks = [int(k) for k in args.k_list.split(",")]
    print("m,k,j,ratio,limit_2lam_plus_1,limit_2lam,rel_dev_2lam_plus_1,rel_dev_2lam")
    for m in (1, 9):
        for k in ks:
            for j, r, a, b in eigen_ratio_table(k, args.s, m, args.n, args.gamma, args.j_top):
                if j == 1:
                    continue
                print(f"{m},{k},{j},{r:.6f},{a:.6f},{b:.6f},{abs(r - a) / a:.6f},{abs(r - b) / b:.6f}")


if __name__ == "__main__":
    main()
