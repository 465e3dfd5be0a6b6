"""delta-secret achievable rate regions, TDMA, and the secrecy sum capacity.

A region produced by superposition coding is a polytope

    { R >= 0 : R_S <= b_S  for every nonempty S }

with b_S = max(0, min(C^M_S, (C^M_S - leak_S) / delta)), where the leakage
term is sum_{k in S} C^W_k under individual secrecy and C~^W_S under
collective secrecy.  delta = 0 drops the secrecy term (plain GMAC region).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rates
from .channel import StandardChannel
from .geometry import Polygon2D, merge_close

KINDS = ("individual", "collective", "gmac-baseline")

TDMA_SAMPLES = 2048
ALPHA_TOL = 1e-10


class UnsupportedDimension(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RegionSpec:
    """Subset-indexed bounds of a rate region.

    ``bounds`` holds the clamped b_S keyed by bitmask; ``raw_bounds`` keeps
    the unclamped minimum for diagnostics (negative means the scheme cannot
    support any rate in that direction).
    """

    kind: str
    delta: float
    num_users: int
    bounds: dict[int, float] = field(repr=False)
    raw_bounds: dict[int, float] = field(repr=False)

    def bound(self, S: int) -> float:
        return self.bounds[S]

    def contains(self, R: Sequence[float], tol: float = 1e-9) -> bool:
        return region_contains(self, R, tol)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "delta": self.delta,
            "bounds": {str(S): b for S, b in sorted(self.bounds.items())},
        }


def _build(ch: StandardChannel, delta: float, kind: str,
           leak: Callable[[StandardChannel, int], float]) -> RegionSpec:
    delta = rates.check_delta(delta)
    raw = {}
    for S in rates.iter_subsets(ch):
        first = rates.cm(ch, S)
        if delta == 0.0:
            raw[S] = first
        else:
            raw[S] = min(first, (first - leak(ch, S)) / delta)
    bounds = {S: max(0.0, b) for S, b in raw.items()}
    return RegionSpec(kind, delta, ch.num_users, bounds, raw)


def individual_region(ch: StandardChannel, delta: float) -> RegionSpec:
    """Superposition-coding region under individual secrecy constraints."""
    return _build(ch, delta, "individual", rates.cw_individual_sum)


def collective_region(ch: StandardChannel, delta: float) -> RegionSpec:
    """Superposition-coding region under collective secrecy constraints."""
    return _build(ch, delta, "collective", rates.cw_tilde)


def gmac_region(ch: StandardChannel) -> RegionSpec:
    """Capacity region of the GMAC without secrecy."""
    return _build(ch, 0.0, "gmac-baseline", rates.cw_tilde)


def _as_rates(R: Sequence[float] | np.ndarray, K: int) -> np.ndarray:
    arr = np.asarray(R, dtype=float)
    if arr.shape[-1] != K:
        raise DimensionMismatch(f"rate point has {arr.shape[-1]} users, region has {K}")
    return arr


def region_contains_many(region: RegionSpec, R: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vectorised membership for an (N, K) array of rate points."""
    pts = np.atleast_2d(_as_rates(R, region.num_users))
    A = rates.incidence(region.num_users)
    b = np.array([region.bounds[S] for S in rates.subsets(region.num_users)])
    ok = (pts @ A.T <= b + tol).all(axis=1)
    return ok & (pts >= -tol).all(axis=1)


def region_contains(region: RegionSpec, R: Sequence[float], tol: float = 1e-9) -> bool:
    """True iff R_S <= b_S + tol for every nonempty S (and R >= -tol)."""
    return bool(region_contains_many(region, np.asarray(R, dtype=float)[None, :], tol)[0])


# --------------------------------------------------------------------- TDMA

def _tdma_bound(P, h: float, delta: float, alpha):
    alpha = np.asarray(alpha, dtype=float)
    P = np.asarray(P, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        decode = 0.5 * alpha * np.log2(1.0 + P / alpha)
        if delta == 0.0:
            out = decode
        else:
            secret = alpha / (2.0 * delta) * np.log2((alpha + P) / (alpha + h * P))
            out = np.minimum(secret, decode)
    return np.where(alpha > 0.0, out, 0.0)


def tdma_user_bound(ch: StandardChannel, delta: float, alpha, k: int):
    """Largest rate user ``k`` (zero-based) supports with airtime ``alpha``.

    Accepts scalar or array ``alpha``; alpha = 0 gives 0.
    """
    delta = rates.check_delta(delta)
    out = _tdma_bound(ch.powers[k], ch.h, delta, alpha)
    return float(out) if out.ndim == 0 else out


def tdma_sum_rate(ch: StandardChannel, delta: float, alphas) -> np.ndarray | float:
    """Sum of the per-user TDMA bounds for schedule(s) ``alphas`` (..., K)."""
    delta = rates.check_delta(delta)
    a = np.asarray(alphas, dtype=float)
    total = sum(_tdma_bound(ch.powers[k], ch.h, delta, a[..., k]) for k in range(ch.num_users))
    return float(total) if np.ndim(total) == 0 else total


@dataclass(frozen=True)
class TdmaSchedule:
    alphas: tuple[float, ...]

    def __post_init__(self) -> None:
        a = tuple(float(x) for x in self.alphas)
        if any(x < 0.0 or x > 1.0 for x in a):
            raise ValueError(f"time-sharing fractions must lie in [0, 1]: {a}")
        if abs(math.fsum(a) - 1.0) > 1e-12:
            raise ValueError(f"time-sharing fractions must sum to 1: {a}")
        object.__setattr__(self, "alphas", a)

    def user_bounds(self, ch: StandardChannel, delta: float) -> tuple[float, ...]:
        return tuple(tdma_user_bound(ch, delta, a, k) for k, a in enumerate(self.alphas))


def tdma_optimal_schedule(ch: StandardChannel) -> TdmaSchedule:
    """Airtime proportional to power, which maximises the TDMA sum rate."""
    total = ch.total_power
    alphas = [p / total for p in ch.powers]
    # absorb rounding into the largest share so the sum is exactly 1
    i = max(range(len(alphas)), key=alphas.__getitem__)
    alphas[i] = 1.0 - math.fsum(alphas[:i] + alphas[i + 1:])
    return TdmaSchedule(tuple(alphas))


def tdma_max_sum_rate(ch: StandardChannel, delta: float) -> float:
    delta = rates.check_delta(delta)
    K = rates.full_set(ch.num_users)
    first = rates.cm(ch, K)
    if delta == 0.0:
        return first
    return min(first, (first - rates.cw(ch, K)) / delta)


def tdma_min_airtime(ch: StandardChannel, delta: float, rate: float, k: int,
                     tol: float = 1e-9) -> float:
    """Smallest alpha with bound(alpha) >= rate - tol; ``inf`` if even alpha = 1 falls short.

    Bisection on [0, 1] down to an interval of width 1e-10; the bound is
    strictly increasing in alpha.
    """
    target = rate - tol
    if target <= 0.0:
        return 0.0
    if tdma_user_bound(ch, delta, 1.0, k) < target:
        return math.inf
    lo, hi = 0.0, 1.0
    while hi - lo > ALPHA_TOL:
        mid = 0.5 * (lo + hi)
        if tdma_user_bound(ch, delta, mid, k) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def tdma_contains(ch: StandardChannel, delta: float, R: Sequence[float], tol: float = 1e-9) -> bool:
    """Is R achievable by some TDMA schedule?"""
    R = _as_rates(R, ch.num_users)
    if (R < -tol).any():
        return False
    total = math.fsum(tdma_min_airtime(ch, delta, r, k, tol) for k, r in enumerate(R))
    return total <= 1.0 + tol


# ------------------------------------------------------------ sum capacity

@dataclass(frozen=True)
class SumCapacity:
    value: float
    branch: int  # 1: decodability-limited, 2: secrecy-limited
    threshold: float


def secrecy_threshold(ch: StandardChannel) -> float:
    """Largest delta for which secrecy costs nothing in sum rate."""
    P = ch.total_power
    return 1.0 - math.log2(1.0 + ch.h * P) / math.log2(1.0 + P)


def sum_capacity(ch: StandardChannel, delta: float) -> SumCapacity:
    """delta-secrecy sum capacity in its piecewise form."""
    delta = rates.check_delta(delta)
    P = ch.total_power
    thr = secrecy_threshold(ch)
    if delta <= thr:
        return SumCapacity(0.5 * math.log2(1.0 + P), 1, thr)
    return SumCapacity(0.5 / delta * math.log2((1.0 + P) / (1.0 + ch.h * P)), 2, thr)


# ----------------------------------------------------------- 2-user polygons

def _need_two(K: int) -> None:
    if K != 2:
        raise UnsupportedDimension(f"polygon output needs K = 2, got K = {K}")


def boundary_polygon_2d(region: RegionSpec) -> Polygon2D:
    """Vertices of a two-user region, counterclockwise from the origin."""
    _need_two(region.num_users)
    b1, b2, b12 = region.bounds[1], region.bounds[2], region.bounds[3]
    b1 = min(b1, b12)
    b2 = min(b2, b12)
    s = min(b12, b1 + b2)
    raw = [(0.0, 0.0), (b1, 0.0), (b1, s - b1), (s - b2, b2), (0.0, b2)]
    return Polygon2D(tuple(merge_close(raw)))


def tdma_boundary_2d(ch: StandardChannel, delta: float, samples: int = TDMA_SAMPLES) -> np.ndarray:
    """(samples, 2) points of the TDMA boundary curve, alpha_1 swept over [0, 1]."""
    _need_two(ch.num_users)
    a = np.linspace(0.0, 1.0, samples)
    return np.column_stack([
        tdma_user_bound(ch, delta, a, 0),
        tdma_user_bound(ch, delta, 1.0 - a, 1),
    ])


def tdma_polygon_2d(ch: StandardChannel, delta: float, samples: int = TDMA_SAMPLES) -> Polygon2D:
    pts = tdma_boundary_2d(ch, delta, samples)
    return Polygon2D.from_points(np.vstack([pts, [[0.0, 0.0]]]))


def union_region_hull_2d(ch: StandardChannel, delta: float,
                         samples: int = TDMA_SAMPLES) -> Polygon2D:
    """Convex hull of the individual-secrecy region and the TDMA region."""
    _need_two(ch.num_users)
    ind = boundary_polygon_2d(individual_region(ch, delta))
    pts = np.vstack([np.asarray(ind.vertices), tdma_boundary_2d(ch, delta, samples), [[0.0, 0.0]]])
    return Polygon2D.from_points(pts)


# --------------------------------------------------------- entropy-gap bound

def phi(xi, h: float):
    """Entropy-power lower bound on h(Z)/n given h(Y)/n = xi (bits)."""
    xi = np.asarray(xi, dtype=float)
    out = 0.5 * np.log2(2.0 * math.pi * math.e * (1.0 - h) + h * np.exp2(2.0 * xi))
    return float(out) if out.ndim == 0 else out


def entropy_gap(xi, h: float):
    """Per-symbol upper bound xi - phi(xi) on (h(Y) - h(Z)) / n."""
    out = np.asarray(xi, dtype=float) - phi(xi, h)
    return float(out) if np.ndim(out) == 0 else out


def gaussian_xi(ch: StandardChannel) -> float:
    """Per-symbol differential entropy of Y under full-power Gaussian inputs."""
    return 0.5 * math.log2(2.0 * math.pi * math.e * (1.0 + ch.total_power))


def entropy_gap_bound(ch: StandardChannel) -> float:
    K = rates.full_set(ch.num_users)
    return rates.cm(ch, K) - rates.cw(ch, K)
