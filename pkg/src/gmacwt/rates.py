"""Subset-indexed capacity quantities.

User subsets are integer bitmasks: bit ``k`` set means user ``k + 1`` is in
the set.  All logarithms are base 2, so every rate is in bits per channel use.
"""

from __future__ import annotations

import math
from typing import Iterator, Sequence

import numpy as np

from .channel import MAX_USERS, StandardChannel

UserSet = int


def full_set(K: int) -> UserSet:
    return (1 << K) - 1


def subsets(K: int) -> range:
    """Nonempty subsets of {1..K} in increasing bitmask order."""
    if not 1 <= K <= MAX_USERS:
        raise ValueError(f"K must be in 1..{MAX_USERS}, got {K}")
    return range(1, 1 << K)


def members(S: UserSet) -> list[int]:
    """Zero-based user indices in ``S``."""
    return [k for k in range(S.bit_length()) if S >> k & 1]


def user_set(users: Sequence[int]) -> UserSet:
    """Bitmask from one-based user numbers, e.g. ``user_set([1, 2]) == 0b11``."""
    S = 0
    for u in users:
        if u < 1:
            raise ValueError("users are numbered from 1")
        S |= 1 << (u - 1)
    return S


def complement(S: UserSet, K: int) -> UserSet:
    return full_set(K) & ~S


def label(S: UserSet) -> str:
    """Human-readable label: ``{1,2}``."""
    return "{" + ",".join(str(k + 1) for k in members(S)) + "}"


def incidence(K: int) -> np.ndarray:
    """(2^K - 1, K) 0/1 matrix; row ``S - 1`` marks the members of ``S``."""
    masks = np.arange(1, 1 << K)[:, None]
    return ((masks >> np.arange(K)) & 1).astype(float)


def check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"secrecy level must lie in [0, 1], got {delta}")
    return delta


def _check(ch: StandardChannel, S: UserSet) -> None:
    if S < 0 or S >> ch.num_users:
        raise ValueError(f"subset {S:#b} not contained in {{1..{ch.num_users}}}")


def subset_power(ch: StandardChannel, S: UserSet) -> float:
    _check(ch, S)
    return math.fsum(ch.powers[k] for k in members(S))


def cm(ch: StandardChannel, S: UserSet) -> float:
    """Main-channel sum capacity of ``S``: 1/2 log(1 + P_S)."""
    return 0.5 * math.log2(1.0 + subset_power(ch, S))


def cw(ch: StandardChannel, S: UserSet) -> float:
    """Wiretapper's capacity for ``S`` alone: 1/2 log(1 + h P_S)."""
    return 0.5 * math.log2(1.0 + ch.h * subset_power(ch, S))


def cw_tilde(ch: StandardChannel, S: UserSet) -> float:
    """Wiretapper's capacity for ``S`` with the other users acting as noise."""
    Sc = complement(S, ch.num_users)
    return 0.5 * math.log2(1.0 + ch.h * subset_power(ch, S) / (1.0 + ch.h * subset_power(ch, Sc)))


def cw_individual_sum(ch: StandardChannel, S: UserSet) -> float:
    """Sum over k in S of the single-user wiretap capacities."""
    return math.fsum(cw(ch, 1 << k) for k in members(S))


def iter_subsets(ch: StandardChannel) -> Iterator[UserSet]:
    return iter(subsets(ch.num_users))
