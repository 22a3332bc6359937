"""Total quadrature node counts over the published (h, T) and (tol, alpha) grids.

Prints one CSV row per cell: the certified count (per-panel budget tol/(3J),
g-1 denominator), the count with an unsplit per-panel budget tol/3 and a g
denominator, and the published count.
"""
import argparse
import csv
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from reference_counts import all_cells  # noqa: E402

from fastcq.rk import get_method  # noqa: E402
from fastcq.weight_quad import select_parameters  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["method", "alpha", "h", "T", "tol", "published", "certified", "unsplit", "J"])
    for method, alpha, h, T, tol, expected in all_cells():
        m = get_method(method)
        p = select_parameters(m, alpha, h, T, 5, tol)
        loose = select_parameters(m, alpha, h, T, 5, tol, denom_minus_one=False, split_panel_tol=False)
        w.writerow([method, alpha, "%g" % h, T, "%g" % tol, expected, p.n_nodes, loose.n_nodes, p.J])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
