"""Command-line front end.

    gmacwt standardize --config chan.json
    gmacwt region --kind collective --delta 1 --powers 10,5 --h 0.5 --out out/
    gmacwt figures --out figs/
    gmacwt sumcap --powers 10,5 --h 0.5 --sweep
    gmacwt simulate --config experiment.json --trials 10000

Exit codes: 0 success, 1 parse/input error, 2 channel-model violation,
3 unsupported dimension, 4 simulator enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import regions as rg
from .channel import (ChannelModelError, ConfigError, RawChannelConfig, StandardChannel,
                      load_channel, standardize, to_degraded_standard)
from .export import dumps, polygon_csv, region_json, write_atomic
from .simulator import CapExceeded, ExperimentConfig, Infeasible, run_experiment

EXIT_PARSE = 1
EXIT_CHANNEL = 2
EXIT_DIMENSION = 3
EXIT_CAP = 4

REGION_KINDS = ("individual", "collective", "tdma", "union", "gmac")
FIGURE_POWERS = (10.0, 5.0)
FIGURE_DELTAS = (0.01, 0.5, 1.0)
FIGURE_HS = (0.1, 0.5, 0.9)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _read_json(path: str):
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(path, str(exc)) from exc


def _channel(args) -> StandardChannel:
    if args.config:
        return load_channel(_read_json(args.config))
    if args.powers is None or args.h is None:
        raise ConfigError("--config", "give --config PATH or both --powers and --h")
    return StandardChannel(args.powers, args.h[0])


def tag(x: float) -> str:
    return f"{x:g}"


def region_filename(kind: str, delta: float, h: float, ext: str = "csv") -> str:
    return f"region_{kind}_d{tag(delta)}_h{tag(h)}.{ext}"


def region_outputs(ch: StandardChannel, kind: str, delta: float,
                   resolution: int = rg.TDMA_SAMPLES) -> tuple[str, str]:
    """(CSV polygon, JSON document) for one region kind."""
    if kind in ("individual", "collective", "gmac"):
        region = {"individual": rg.individual_region, "collective": rg.collective_region}.get(
            kind, lambda c, d: rg.gmac_region(c))(ch, delta)
        return polygon_csv(rg.boundary_polygon_2d(region)), region_json(region)
    if kind == "tdma":
        poly = rg.tdma_polygon_2d(ch, delta, resolution)
        doc = {"kind": "tdma", "delta": delta, "h": ch.h,
               "schedule": list(rg.tdma_optimal_schedule(ch).alphas),
               "max_sum_rate": rg.tdma_max_sum_rate(ch, delta),
               "vertices": [list(v) for v in poly.vertices]}
        return polygon_csv(poly), dumps(doc)
    if kind == "union":
        poly = rg.union_region_hull_2d(ch, delta, resolution)
        doc = {"kind": "union", "delta": delta, "h": ch.h,
               "vertices": [list(v) for v in poly.vertices]}
        return polygon_csv(poly), dumps(doc)
    raise ConfigError("--kind", f"unknown region kind {kind!r}")


# ------------------------------------------------------------------ commands

def cmd_standardize(args) -> int:
    raw = RawChannelConfig.from_dict(_read_json(args.config))
    users = standardize(raw)
    ch = to_degraded_standard(users)
    doc = {**ch.to_dict(),
           "users": [{"scale": u.scale, "power": u.power, "h": u.wiretap_gain} for u in users]}
    sys.stdout.write(dumps(doc))
    return 0


def cmd_region(args) -> int:
    ch = _channel(args)
    if ch.num_users != 2:
        raise rg.UnsupportedDimension(f"polygon output needs K = 2, got K = {ch.num_users}")
    delta = args.delta[0]
    csv, doc = region_outputs(ch, args.kind, delta, args.resolution)
    if args.out is None:
        sys.stdout.write(csv)
        return 0
    out = Path(args.out)
    for text, ext in ((csv, "csv"), (doc, "json")):
        path = write_atomic(out / region_filename(args.kind, delta, ch.h, ext), text)
        print(path)
    return 0


@dataclass(frozen=True)
class FigureRequest:
    powers: tuple[float, float] = FIGURE_POWERS
    deltas: tuple[float, ...] = FIGURE_DELTAS
    hs: tuple[float, ...] = FIGURE_HS
    out: str = "figures"
    resolution: int = rg.TDMA_SAMPLES
    kinds: tuple[str, ...] = REGION_KINDS

    def __post_init__(self) -> None:
        if len(self.powers) != 2:
            raise rg.UnsupportedDimension("figures are two-user only")
        if any(not 0.0 <= d <= 1.0 for d in self.deltas):
            raise ConfigError("--delta", "values must lie in [0, 1]")
        if any(not 0.0 < h < 1.0 for h in self.hs):
            raise ConfigError("--h", "values must lie in (0, 1)")
        if self.resolution < 2:
            raise ConfigError("--resolution", "need at least 2 samples")


def make_figures(req: FigureRequest) -> list[Path]:
    """Write one CSV per (kind, delta, h); returns the paths in write order."""
    written = []
    for h in req.hs:
        ch = StandardChannel(req.powers, h)
        for delta in req.deltas:
            for kind in req.kinds:
                csv, _ = region_outputs(ch, kind, delta, req.resolution)
                written.append(write_atomic(Path(req.out) / region_filename(kind, delta, h), csv))
    return written


def cmd_figures(args) -> int:
    req = FigureRequest(
        powers=args.powers or FIGURE_POWERS,
        deltas=args.delta or FIGURE_DELTAS,
        hs=args.h or FIGURE_HS,
        out=args.out or "figures",
        resolution=args.resolution,
    )
    for path in make_figures(req):
        print(path)
    return 0


def sumcap_doc(ch: StandardChannel, delta: float) -> dict:
    c = rg.sum_capacity(ch, delta)
    return {"delta": delta, "value": c.value, "branch": c.branch, "threshold": c.threshold}


def cmd_sumcap(args) -> int:
    ch = _channel(args)
    if args.sweep:
        deltas = np.linspace(0.0, 1.0, args.resolution)
        doc = {"channel": ch.to_dict(), "threshold": rg.secrecy_threshold(ch),
               "sweep": [sumcap_doc(ch, float(d)) for d in deltas]}
    else:
        if not args.delta:
            raise ConfigError("--delta", "give --delta F or --sweep")
        doc = {"channel": ch.to_dict(), **sumcap_doc(ch, args.delta[0])}
    text = dumps(doc)
    if args.out:
        print(write_atomic(args.out, text))
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_dict(_read_json(args.config))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    text = run_experiment(cfg).to_json()
    if args.out:
        print(write_atomic(args.out, text))
    else:
        sys.stdout.write(text)
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gmacwt", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def channel_args(sp):
        sp.add_argument("--config", help="raw channel JSON")
        sp.add_argument("--powers", type=_floats, help="standard-form powers, e.g. 10,5")
        sp.add_argument("--h", type=_floats, help="wiretap gain(s)")

    sp = sub.add_parser("standardize", help="reduce a raw channel to standard form")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=cmd_standardize)

    sp = sub.add_parser("region", help="export one region polygon and its bounds")
    channel_args(sp)
    sp.add_argument("--kind", choices=REGION_KINDS, required=True)
    sp.add_argument("--delta", type=_floats, required=True)
    sp.add_argument("--out")
    sp.add_argument("--resolution", type=int, default=rg.TDMA_SAMPLES)
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("figures", help="region CSVs for a grid of (delta, h)")
    sp.add_argument("--powers", type=_floats)
    sp.add_argument("--delta", type=_floats)
    sp.add_argument("--h", type=_floats)
    sp.add_argument("--out")
    sp.add_argument("--resolution", type=int, default=rg.TDMA_SAMPLES)
    sp.set_defaults(func=cmd_figures)

    sp = sub.add_parser("sumcap", help="secrecy sum capacity")
    channel_args(sp)
    sp.add_argument("--delta", type=_floats)
    sp.add_argument("--sweep", action="store_true")
    sp.add_argument("--resolution", type=int, default=101)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sumcap)

    sp = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ChannelModelError as exc:
        print(f"error: channel model: {exc}", file=sys.stderr)
        return EXIT_CHANNEL
    except rg.UnsupportedDimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (Infeasible, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
