"""Write the region CSVs for P = (10, 5), delta in {0.01, 0.5, 1}, h in {0.1, 0.5, 0.9}.

Also prints a one-line summary per panel (sum intercepts and areas), which
is handy when comparing against published plots.

    python3 scripts/reproduce_figures.py --out figures
"""

import argparse

import numpy as np

from gmacwt import regions as rg
from gmacwt.channel import StandardChannel
from gmacwt.cli import FigureRequest, make_figures


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="figures")
    p.add_argument("--resolution", type=int, default=rg.TDMA_SAMPLES)
    args = p.parse_args()
    req = FigureRequest(out=args.out, resolution=args.resolution)
    paths = make_figures(req)
    print(f"wrote {len(paths)} CSVs to {args.out}/")
    print(f"{'h':>4} {'delta':>6} {'sum G^I':>9} {'sum G^C':>9} {'sum TDMA':>9} {'area hull':>10} {'area TDMA':>10}")
    for h in req.hs:
        ch = StandardChannel(req.powers, h)
        for d in req.deltas:
            ind = rg.boundary_polygon_2d(rg.individual_region(ch, d))
            col = rg.boundary_polygon_2d(rg.collective_region(ch, d))
            tdma = rg.tdma_polygon_2d(ch, d, req.resolution)
            hull = rg.union_region_hull_2d(ch, d, req.resolution)
            s = [max(x + y for x, y in poly.vertices) for poly in (ind, col, tdma)]
            print(f"{h:4g} {d:6g} {s[0]:9.6f} {s[1]:9.6f} {s[2]:9.6f} "
                  f"{hull.area():10.6f} {tdma.area():10.6f}")


if __name__ == "__main__":
    main()
