"""Local log-log slopes over successive k doublings, beyond the default k range.

Shows how the saturation, converse and beta = 3 moment slopes drift toward
their asymptotic values as k grows. Writes CSVs to --out.

    python3 scripts/asymptotic_regime.py --k-max 2048 --out out/asymptotic
"""

import argparse
import csv
import math
import warnings
from pathlib import Path

import numpy as np

from capjackson.analysis import approximation_errors, moduli_at
from capjackson.corpus import bump, degree_component
from capjackson.harmonic import CapGeometry, expand
from capjackson.kernel import kernel_moment, kernel_normalize, kernel_tail_mass

GAMMA = math.pi / 2


def local_slopes(ks, vals):
    x, y = np.log(ks), np.log(vals)
    return list(np.diff(y) / np.diff(x))


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k-max", type=int, default=2048)
    ap.add_argument("--jmax", type=int, default=768)
    ap.add_argument("--out", default="out/asymptotic")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ks = [2**i for i in range(4, int(math.log2(args.k_max)) + 1)]
    geom = CapGeometry.north(3, GAMMA)

    specs = [kernel_normalize(k, 3, GAMMA, 0.5) for k in ks]
    rows = []
    for beta in (1, 2, 3, 4):
        with warnings.catch_warnings():
            # beta = 4 is outside the moment-order range on purpose
            warnings.simplefilter("ignore", RuntimeWarning)
            vals = [kernel_moment(s, beta) for s in specs]
        sl = local_slopes(ks, vals)
        rows += [(beta, k, v, s) for k, v, s in zip(ks, vals, [float("nan")] + sl)]
        print(f"moment beta={beta}: local slopes " + " ".join(f"{s:.3f}" for s in sl))
    write(out / "moments.csv", ["beta", "k", "value", "local_slope"], rows)

    tail = [kernel_tail_mass(s, GAMMA / 2) for s in specs]
    print("tail mass on [gamma/2, gamma]: local slopes " + " ".join(f"{s:.3f}" for s in local_slopes(ks, tail)))

    inputs = {
        "bump_rho=gamma/2": expand(bump(geom, GAMMA / 2), args.jmax),
        "bump_rho=3gamma/4": expand(bump(geom, 3 * GAMMA / 4), args.jmax),
        "degree_3": degree_component(geom, 3),
    }
    rows = []
    for name, e in inputs.items():
        for m in (1, 9):
            errs = approximation_errors(e, ks, 3, m, 2, args.jmax)
            sl = local_slopes(ks, errs)
            rows += [(name, m, k, v, s) for k, v, s in zip(ks, errs, [float("nan")] + sl)]
            print(f"saturation {name} m={m}: local slopes " + " ".join(f"{s:.3f}" for s in sl))
    write(out / "saturation.csv", ["function", "m", "k", "error", "local_slope"], rows)

    rows = []
    for name in ("bump_rho=gamma/2", "bump_rho=3gamma/4"):
        e = inputs[name]
        vs = ks + [2 * ks[-1], 4 * ks[-1]]
        errs = dict(zip(vs, approximation_errors(e, vs, 3, 9, 2, args.jmax)))
        mods = moduli_at(e, [1.0 / k for k in ks], 2, args.jmax)
        ratio = [md / max(errs[v] for v in vs if k <= v <= 4 * k) for k, md in zip(ks, mods)]
        sl = local_slopes(ks, ratio)
        rows += [(name, k, r, s) for k, r, s in zip(ks, ratio, [float("nan")] + sl)]
        print(f"converse {name} m=9: ratio " + " ".join(f"{r:.3g}" for r in ratio)
              + " | local slopes " + " ".join(f"{s:.3f}" for s in sl))
    write(out / "converse.csv", ["function", "k", "ratio", "local_slope"], rows)


if __name__ == "__main__":
    main()
