"""Secrecy sum capacity against delta for a few wiretap gains, as CSV on stdout.

    python3 scripts/sumcap_sweep.py --powers 10,5 --h 0.1,0.5,0.9 > sumcap.csv
"""

import argparse
import sys

import numpy as np

from gmacwt import regions as rg
from gmacwt.channel import StandardChannel


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--powers", default="10,5")
    p.add_argument("--h", default="0.1,0.5,0.9")
    p.add_argument("--points", type=int, default=101)
    args = p.parse_args()
    powers = tuple(float(v) for v in args.powers.split(","))
    hs = [float(v) for v in args.h.split(",")]
    chans = [StandardChannel(powers, h) for h in hs]
    w = sys.stdout.write
    w("delta," + ",".join(f"h={h:g}" for h in hs) + "\n")
    for d in np.linspace(0.0, 1.0, args.points):
        w(f"{d:.6g}," + ",".join(f"{rg.sum_capacity(ch, float(d)).value:.9g}" for ch in chans) + "\n")
    for ch in chans:
        print(f"# h={ch.h:g}: secrecy is free for delta <= {rg.secrecy_threshold(ch):.6f}",
              file=sys.stderr)


if __name__ == "__main__":
    main()
