"""Desk-scale Monte Carlo realisation of the superposition wiretap code.

Each user k splits its rate into a secret part R_ks, an open part R_k0 and a
randomization part R_kx, draws one Gaussian codebook per part, and sends the
sum of the three selected codewords.  The randomization index is chosen
uniformly at random and carries no message.

Codebooks are small enough (at most ``MAX_COMPOSITES`` joint codewords) that
the receiver's ML decoder and the eavesdropper's posterior over the messages
can be computed exactly by enumeration.  Noise and messages are sampled, so
error probabilities and equivocations come with 95% confidence intervals.

Random streams
--------------
All randomness comes from Philox generators keyed by
``SeedSequence(seed, spawn_key=(stream, *key))``.  Stream ids:

    0 codebook       key = (user, part, draw)    part: 0 secret, 1 open, 2 randomization
    1 messages       key = (purpose, draw, chunk)
    2 randomization  key = (purpose, draw, chunk)
    3 noise          key = (purpose, draw, chunk)

``draw`` numbers independent codebook draws of one experiment, ``purpose``
is 0 for decoding trials and 1 for eavesdropper samples, and chunks hold
``CHUNK`` draws each, so results do not depend on how chunks are
scheduled across threads.  Messages and randomization indices are drawn as
``floor(u * M)`` from uniforms, which keeps runs that differ only in code
sizes paired on the same underlying draws.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from . import rates
from .channel import ConfigError, StandardChannel, load_channel
from .regions import collective_region, individual_region

log = logging.getLogger(__name__)

MAX_COMPOSITES = 4096
POWER_MARGIN = 0.01
LAMBDA_FLOOR = 0.05
CHUNK = 1024
Z95 = 1.959963984540054

MODES = ("individual", "collective")
_STREAMS = {"codebook": 0, "messages": 1, "randomization": 2, "noise": 3}
PURPOSE_DECODE = 0
PURPOSE_EVE = 1


class Infeasible(ValueError):
    """No rate split satisfies the coding constraints; ``subset`` is the violated set."""

    def __init__(self, message: str, subset: int | None = None):
        super().__init__(message)
        self.subset = subset


class CapExceeded(RuntimeError):
    pass


def stream(seed: int, name: str, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_STREAMS[name], *key))
    return np.random.Generator(np.random.Philox(ss))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("GMACWT_THREADS", "1")))
    except ValueError:
        return 1


# ------------------------------------------------------------------ rates

@dataclass(frozen=True)
class UserSplit:
    secret: float
    open: float
    randomization: float
    mu: float

    @property
    def message(self) -> float:
        return self.secret + self.open

    @property
    def total(self) -> float:
        return self.secret + self.open + self.randomization


@dataclass(frozen=True)
class SplitRates:
    mode: str
    delta: float
    users: tuple[UserSplit, ...]

    @property
    def num_users(self) -> int:
        return len(self.users)

    def scaled_randomization(self, factor: float) -> "SplitRates":
        """Same split with every R_kx multiplied by ``factor`` (control runs)."""
        return SplitRates(self.mode, self.delta, tuple(
            UserSplit(u.secret, u.open, u.randomization * factor, u.mu) for u in self.users))


def _check_inside(region, R: np.ndarray, margin: float) -> None:
    A = rates.incidence(region.num_users)
    for row, S in zip(A, rates.subsets(region.num_users)):
        RS = float(row @ R)
        if RS > 0.0 and RS > region.bounds[S] - margin:
            raise Infeasible(
                f"R_S = {RS:.6g} is not inside the {region.kind} region "
                f"(b_S = {region.bounds[S]:.6g}) for S = {rates.label(S)}", S)


def split_rates(ch: StandardChannel, delta: float, R: Sequence[float], mode: str,
                margin: float = 1e-6) -> SplitRates:
    """Split each user's rate into secret, open and randomization parts.

    Starts from mu_k = delta and raises the secret fraction only as far as
    needed to keep every randomization rate nonnegative.  Individual mode
    sets R_k0 + R_kx = C^W_k per user; collective mode sets
    sum_k (R_k0 + R_kx) = C^W_K and spreads the randomization over users in
    proportion to power (greedily if that breaks a decodability constraint).
    delta = 0 asks for no secrecy and returns a plain split (all rate open,
    no randomization).

    Each mu_k is already the smallest the equalities allow, so Infeasible
    can be raised for points inside the region: the region is stated for
    the optimal scheme, while the fixed equalities cost some rate when a
    user's rate is below its own wiretap capacity.
    """
    delta = rates.check_delta(delta)
    R = np.asarray(R, dtype=float)
    K = ch.num_users
    if R.shape != (K,) or (R < 0).any():
        raise ValueError(f"need {K} nonnegative rates, got {R}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    region = individual_region if mode == "individual" else collective_region
    _check_inside(region(ch, delta), R, margin)
    if delta == 0.0:
        # no secrecy demanded: a plain multiple-access code reaches the whole region
        return SplitRates(mode, 0.0, tuple(UserSplit(0.0, float(r), 0.0, 0.0) for r in R))
    if mode == "individual":
        return _split_individual(ch, delta, R)
    return _split_collective(ch, delta, R)


def _split_individual(ch: StandardChannel, delta: float, R: np.ndarray) -> SplitRates:
    K = ch.num_users
    users = []
    for k in range(K):
        cwk = rates.cw(ch, 1 << k)
        mu = delta
        if R[k] > 0.0:
            mu = min(1.0, max(delta, 1.0 - cwk / R[k]))
        secret, open_ = mu * R[k], (1.0 - mu) * R[k]
        users.append(UserSplit(secret, open_, max(0.0, cwk - open_), mu))
    for S in rates.subsets(K):
        ks = rates.members(S)
        secret = math.fsum(users[k].secret for k in ks)
        if secret > rates.cm(ch, S) - rates.cw_individual_sum(ch, S) + 1e-12:
            raise Infeasible(f"secret rates exceed the secrecy budget of {rates.label(S)}", S)
        if math.fsum(users[k].total for k in ks) > rates.cm(ch, S) + 1e-12:
            raise Infeasible(f"total rates not decodable for {rates.label(S)}", S)
    return SplitRates("individual", delta, tuple(users))


def _split_collective(ch: StandardChannel, delta: float, R: np.ndarray) -> SplitRates:
    K = ch.num_users
    full = rates.full_set(K)
    budget_w = rates.cw(ch, full)
    RK = math.fsum(R)
    mu = delta
    if (1.0 - delta) * RK > budget_w:
        mu = 1.0 - budget_w / RK
    budget = max(0.0, budget_w - (1.0 - mu) * RK)
    for S in rates.subsets(K):
        RS = math.fsum(R[k] for k in rates.members(S))
        if mu * RS > rates.cm(ch, S) - rates.cw_tilde(ch, S) + 1e-12:
            raise Infeasible(f"secret rates exceed the secrecy budget of {rates.label(S)}", S)

    def fits(x: Sequence[float]) -> int | None:
        for S in rates.subsets(K):
            ks = rates.members(S)
            if math.fsum(R[k] + x[k] for k in ks) > rates.cm(ch, S) + 1e-12:
                return S
        return None

    x = [budget * p / ch.total_power for p in ch.powers]
    if fits(x) is not None:
        x = [0.0] * K
        left = budget
        for k in range(K):
            room = min(
                rates.cm(ch, S) - math.fsum(R[j] + x[j] for j in rates.members(S))
                for S in rates.subsets(K) if S >> k & 1)
            x[k] = max(0.0, min(left, room))
            left -= x[k]
        if left > 1e-12 or (bad := fits(x)) is not None:
            raise Infeasible("randomization budget does not fit under the decodability "
                             "constraints", full if left > 1e-12 else bad)
    users = tuple(UserSplit(mu * R[k], (1.0 - mu) * R[k], x[k], mu) for k in range(K))
    return SplitRates("collective", delta, users)


# -------------------------------------------------------------- codebooks

def codebook_size(n: int, rate: float) -> int:
    """2^ceil(n R), never below 1; n R within 1e-9 of an integer is not rounded up."""
    return 1 << max(0, math.ceil(n * rate - 1e-9))


def default_lambdas(sizes: Sequence[int]) -> tuple[float, float, float]:
    """Power split proportional to codebook bits, floored at 0.05 when populated."""
    bits = [math.log2(m) for m in sizes]
    total = sum(bits)
    if total == 0:
        return (1.0, 0.0, 0.0)
    lam = [max(b / total, LAMBDA_FLOOR) if m > 1 else 0.0 for b, m in zip(bits, sizes)]
    s = sum(lam)
    return tuple(x / s for x in lam)


@dataclass(frozen=True, eq=False)
class CodebookSet:
    """Three Gaussian codebooks per user: secret, open, randomization.

    ``books[k][j]`` is an (M, n) array.  Joint codewords are indexed in
    C order over the axes (M_1s, M_10, M_1x, M_2s, ...).
    """

    n: int
    powers: tuple[float, ...]
    sizes: tuple[tuple[int, int, int], ...]
    lambdas: tuple[tuple[float, float, float], ...]
    books: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...] = field(repr=False)
    seed: int
    power_margin: float = POWER_MARGIN
    power_violations: int = 0

    @property
    def num_users(self) -> int:
        return len(self.sizes)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m for s in self.sizes for m in s)

    @property
    def num_composites(self) -> int:
        return math.prod(self.dims)

    def user_codewords(self, k: int) -> np.ndarray:
        """(M_ks M_k0 M_kx, n) transmitted codewords of user ``k``."""
        s, o, x = self.books[k]
        return (s[:, None, None, :] + o[None, :, None, :] + x[None, None, :, :]).reshape(-1, self.n)

    @cached_property
    def composite(self) -> np.ndarray:
        """(num_composites, n) sum of all users' codewords for every index tuple."""
        if self.num_composites > MAX_COMPOSITES:
            raise CapExceeded(f"{self.num_composites} joint codewords > cap {MAX_COMPOSITES}")
        total = np.zeros((1, self.n))
        for k in range(self.num_users):
            cw = self.user_codewords(k)
            total = (total[:, None, :] + cw[None, :, :]).reshape(-1, self.n)
        return total

    @cached_property
    def composite_energy(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.composite, self.composite)

    def message_bits(self, S: int) -> float:
        """H(W_S) in bits for uniform messages."""
        return math.fsum(math.log2(self.sizes[k][0] * self.sizes[k][1]) for k in rates.members(S))

    def effective_rates(self) -> list[dict[str, float]]:
        return [{"secret": math.log2(s) / self.n, "open": math.log2(o) / self.n,
                 "randomization": math.log2(x) / self.n} for s, o, x in self.sizes]


def generate_codebooks(ch: StandardChannel, split: SplitRates, n: int, seed: int,
                       lambdas: Sequence[Sequence[float]] | Sequence[float] | None = None,
                       power_margin: float = POWER_MARGIN,
                       cap: int | None = MAX_COMPOSITES, draw: int = 0) -> CodebookSet:
    """Draw the per-user codebooks for block length ``n``.

    Components are i.i.d. N(0, lambda P_k (1 - power_margin)).  ``cap`` bounds
    the number of joint codewords (pass None to skip the check when exact
    enumeration is not needed).
    """
    if n < 1:
        raise ValueError("block length must be >= 1")
    if split.num_users != ch.num_users:
        raise ValueError("split and channel disagree on the number of users")
    sizes = tuple(
        (codebook_size(n, u.secret), codebook_size(n, u.open), codebook_size(n, u.randomization))
        for u in split.users)
    total = math.prod(m for s in sizes for m in s)
    if cap is not None and total > cap:
        raise CapExceeded(f"{total} joint codewords > cap {cap}")
    if lambdas is None:
        lams = tuple(default_lambdas(s) for s in sizes)
    else:
        arr = np.asarray(lambdas, dtype=float)
        arr = np.broadcast_to(arr, (ch.num_users, 3))
        if (arr < 0).any() or not np.allclose(arr.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("each user's power split must be nonnegative and sum to 1")
        lams = tuple(tuple(float(v) for v in row) for row in arr)
    books = []
    violations = 0
    for k, (P, size, lam) in enumerate(zip(ch.powers, sizes, lams)):
        user = []
        for j, (m, l) in enumerate(zip(size, lam)):
            var = max(0.0, l * P * (1.0 - power_margin))
            g = stream(seed, "codebook", k, j, draw)
            user.append(g.standard_normal((m, n)) * math.sqrt(var))
        books.append(tuple(user))
        s, o, x = user
        energy = ((s[:, None, None, :] + o[None, :, None, :] + x[None, None, :, :]) ** 2).mean(-1)
        violations += int((energy > P).sum())
    if violations:
        log.info("%d transmitted codewords exceed their power constraint", violations)
    return CodebookSet(n, tuple(ch.powers), sizes, lams, tuple(books), seed,
                       power_margin, violations)


# ------------------------------------------------------------ channel use

@dataclass(frozen=True, eq=False)
class Transmission:
    indices: np.ndarray  # (T, K, 3): secret, open, randomization index per user
    y: np.ndarray
    z: np.ndarray


def draw_messages(cb: CodebookSet, count: int, seed: int, *key: int) -> np.ndarray:
    """(count, K, 2) uniform (secret, open) message indices."""
    sizes = np.array([s[:2] for s in cb.sizes])
    u = stream(seed, "messages", *key).random((count, cb.num_users, 2))
    return np.minimum((u * sizes).astype(np.int64), sizes - 1)


def transmit(cb: CodebookSet, ch: StandardChannel, messages: np.ndarray, seed: int,
             *key: int, noise_var: float = 1.0) -> Transmission:
    """Send ``messages`` (T, K, 2) through the channel.

    Randomization indices are drawn uniformly.  Y = sum_k X_k + N_M with
    N_M ~ N(0, noise_var); Z = sqrt(h) Y + N_MW with N_MW ~ N(0, 1 - h).
    """
    messages = np.asarray(messages, dtype=np.int64)
    T = messages.shape[0]
    K = cb.num_users
    mx = np.array([s[2] for s in cb.sizes])
    u = stream(seed, "randomization", *key).random((T, K))
    rand = np.minimum((u * mx).astype(np.int64), mx - 1)
    idx = np.concatenate([messages, rand[..., None]], axis=2)
    sizes = np.array(cb.sizes)
    if (idx < 0).any() or (idx >= sizes).any():
        raise IndexError("message index out of range")
    x = np.zeros((T, cb.n))
    for k in range(K):
        for j in range(3):
            x += cb.books[k][j][idx[:, k, j]]
    g = stream(seed, "noise", *key)
    n_main = g.standard_normal((T, cb.n))
    n_mw = g.standard_normal((T, cb.n))
    y = x + math.sqrt(noise_var) * n_main
    z = math.sqrt(ch.h) * y + math.sqrt(1.0 - ch.h) * n_mw
    return Transmission(idx, y, z)


def _flat_to_indices(cb: CodebookSet, flat: np.ndarray) -> np.ndarray:
    return np.stack(np.unravel_index(flat, cb.dims), axis=-1).reshape(-1, cb.num_users, 3)


def ml_decode(cb: CodebookSet, y: np.ndarray) -> np.ndarray:
    """Exhaustive ML decoding; returns (T, K, 3) index tuples.

    Minimises ||y - c||^2 over all joint codewords; ties go to the lowest
    joint index.
    """
    y = np.atleast_2d(y)
    C = cb.composite
    score = cb.composite_energy[None, :] - 2.0 * (y @ C.T)
    return _flat_to_indices(cb, np.argmin(score, axis=1))


# ----------------------------------------------------------- equivocation

def _posterior_logits(cb: CodebookSet, h: float, z: np.ndarray) -> np.ndarray:
    """Log-likelihood of z for every joint codeword, shaped (T, *dims)."""
    a = math.sqrt(h)
    ll = a * (z @ cb.composite.T) - 0.5 * h * cb.composite_energy[None, :]
    return ll.reshape((z.shape[0],) + cb.dims)


def _entropy_bits(logp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Entropy (bits) of each row of unnormalised log-probabilities, and |sum p - 1|."""
    logp = logp - logsumexp(logp, axis=1, keepdims=True)
    p = np.exp(logp)
    with np.errstate(invalid="ignore"):
        H = -np.where(p > 0, p * logp, 0.0).sum(axis=1) / math.log(2.0)
    return H, np.abs(p.sum(axis=1) - 1.0)


def posterior_entropy(cb: CodebookSet, h: float, z: np.ndarray, indices: np.ndarray,
                      S: int, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """H(W_S | z) (collective) or H(W_S | z, x_{S^c}) (individual), per sample.

    Returns (entropies in bits, normalisation error of each posterior).
    """
    z = np.atleast_2d(z)
    ll = _posterior_logits(cb, h, z)
    T = z.shape[0]
    K = cb.num_users
    inside = set(rates.members(S))
    if mode == "individual" and len(inside) < K:
        sel: list[Any] = [np.arange(T)]
        for k in range(K):
            for j in range(3):
                sel.append(slice(None) if k in inside else indices[:, k, j])
        ll = ll[tuple(sel)]
        axes = [(k, j) for k in range(K) if k in inside for j in range(3)]
    elif mode in MODES:
        axes = [(k, j) for k in range(K) for j in range(3)]
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    drop = tuple(1 + i for i, (k, j) in enumerate(axes) if k not in inside or j == 2)
    if drop:
        ll = logsumexp(ll, axis=drop)
    return _entropy_bits(ll.reshape(T, -1))


@dataclass(frozen=True)
class EquivocationEstimate:
    value: float
    half_width: float
    samples: int
    message_bits: float
    degenerate: bool = False
    max_norm_error: float = 0.0
    entropy_in_range: bool = True

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _summarise(ratios: np.ndarray, bits: float, norm_err: float, in_range: bool
               ) -> EquivocationEstimate:
    N = ratios.size
    if bits == 0.0:
        return EquivocationEstimate(1.0, 0.0, N, 0.0, True, norm_err, in_range)
    if N == 0:
        return EquivocationEstimate(math.nan, math.nan, 0, bits, False, norm_err, in_range)
    sd = float(ratios.std(ddof=1)) if N > 1 else 0.0
    return EquivocationEstimate(float(ratios.mean()), Z95 * sd / math.sqrt(N), N, bits,
                                False, norm_err, in_range)


def _eve_chunk(cb: CodebookSet, ch: StandardChannel, seed: int, key: tuple[int, ...],
               count: int, requests: Sequence[tuple[str, int]]) -> dict[tuple[str, int], tuple]:
    msgs = draw_messages(cb, count, seed, PURPOSE_EVE, *key)
    tx = transmit(cb, ch, msgs, seed, PURPOSE_EVE, *key)
    out = {}
    cache: dict[int, tuple] = {}
    full = rates.full_set(cb.num_users)
    for mode, S in requests:
        key = S if (mode == "collective" or S == full) else -S
        if key not in cache:
            cache[key] = posterior_entropy(cb, ch.h, tx.z, tx.indices, S, mode)
        out[(mode, S)] = cache[key]
    return out


def equivocations(cb: CodebookSet, ch: StandardChannel, requests: Iterable[tuple[str, int]],
                  num_z_samples: int, seed: int, *, draw: int = 0,
                  return_samples: bool = False):
    """Estimate several (mode, S) equivocations from one shared set of Z samples.

    All requests see the same messages, codewords and noise, so differences
    between them are paired.
    """
    requests = list(requests)
    for _, S in requests:
        if S <= 0 or S >> cb.num_users:
            raise ValueError(f"bad subset {S}")
    cb.composite  # raises CapExceeded early
    chunks = [(c, min(CHUNK, num_z_samples - c * CHUNK))
              for c in range(math.ceil(num_z_samples / CHUNK))]

    def work(item):
        c, count = item
        return _eve_chunk(cb, ch, seed, (draw, c), count, requests)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        parts = list(pool.map(work, chunks))
    results = {}
    samples = {}
    for req in requests:
        S = req[1]
        bits = cb.message_bits(S)
        H = np.concatenate([p[req][0] for p in parts]) if parts else np.zeros(0)
        err = np.concatenate([p[req][1] for p in parts]) if parts else np.zeros(0)
        in_range = bool(((H >= -1e-9) & (H <= bits + 1e-9)).all())
        ratios = H / bits if bits > 0 else np.ones_like(H)
        samples[req] = ratios
        results[req] = _summarise(ratios, bits, float(err.max(initial=0.0)), in_range)
    return (results, samples) if return_samples else results


def estimate_equivocation(cb: CodebookSet, ch: StandardChannel, S: int, mode: str,
                          num_z_samples: int, seed: int) -> EquivocationEstimate:
    """Monte Carlo estimate of H(W_S | Z [, X_{S^c}]) / H(W_S) with a 95% CI."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return equivocations(cb, ch, [(mode, S)], num_z_samples, seed)[(mode, S)]


# -------------------------------------------------------------- experiment

def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = errors / trials
    z2 = Z95 ** 2
    centre = (p + z2 / (2 * trials)) / (1 + z2 / trials)
    half = Z95 * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials ** 2)) / (1 + z2 / trials)
    # exact endpoints at 0 and all errors; the formula leaves O(1e-18) residue there
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return (lo, hi)


def _channel_from_doc(doc: Any) -> StandardChannel:
    if isinstance(doc, Mapping) and "powers" in doc:
        try:
            return StandardChannel(tuple(float(p) for p in doc["powers"]), float(doc["h"]))
        except (KeyError, TypeError) as exc:
            raise ConfigError("channel", f"bad standard-form channel: {exc}") from exc
    return load_channel(doc)


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulator run.

    ``trials`` decoding trials and ``z_samples`` eavesdropper samples are
    spread evenly over ``codebooks`` independent codebook draws, so the
    estimates average over the random-code ensemble as well as over noise.
    ``randomization_scale`` multiplies every R_kx after the split (1.0 keeps
    the equality the secrecy argument needs; 0.5 is the halved control).
    """

    channel: StandardChannel
    delta: float
    rates: tuple[float, ...]
    mode: str = "collective"
    n: int = 4
    trials: int = 10_000
    z_samples: int = 10_000
    seed: int = 0
    codebooks: int = 1
    subsets: tuple[int, ...] | None = None
    randomization_scale: float = 1.0
    lambdas: tuple[tuple[float, float, float], ...] | None = None
    cap: int = MAX_COMPOSITES

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n < 1 or self.trials < 0 or self.z_samples < 0 or self.seed < 0:
            raise ValueError("n >= 1, trials >= 0, z_samples >= 0, seed >= 0 required")
        if self.codebooks < 1:
            raise ValueError("codebooks must be >= 1")
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("<root>", "expected a JSON object")
        for key in ("channel", "delta", "rates"):
            if key not in doc:
                raise ConfigError(key, "missing")
        if not isinstance(doc["rates"], list):
            raise ConfigError("rates", "expected a list of numbers")
        kwargs: dict[str, Any] = {
            "channel": _channel_from_doc(doc["channel"]),
            "delta": doc["delta"],
            "rates": tuple(doc["rates"]),
        }
        for key in ("mode", "n", "trials", "z_samples", "seed", "codebooks",
                    "randomization_scale", "cap"):
            if key in doc:
                kwargs[key] = doc[key]
        if "subsets" in doc:
            kwargs["subsets"] = tuple(int(s) for s in doc["subsets"])
        if "lambdas" in doc:
            kwargs["lambdas"] = tuple(tuple(float(v) for v in row) for row in doc["lambdas"])
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError("<config>", str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        d = {
            "channel": self.channel.to_dict(),
            "delta": self.delta,
            "rates": list(self.rates),
            "mode": self.mode,
            "n": self.n,
            "trials": self.trials,
            "z_samples": self.z_samples,
            "seed": self.seed,
            "codebooks": self.codebooks,
            "randomization_scale": self.randomization_scale,
        }
        if self.subsets is not None:
            d["subsets"] = list(self.subsets)
        if self.lambdas is not None:
            d["lambdas"] = [list(r) for r in self.lambdas]
        return d


@dataclass
class SimulationReport:
    config: dict[str, Any]
    split: list[dict[str, float]]
    code_sizes: list[list[int]]
    effective_rates: list[dict[str, float]]
    trials: int
    errors: int | None
    p_err: float | None
    p_err_ci: tuple[float, float] | None
    z_samples: int
    equivocation: dict[str, dict[str, dict[str, Any]]]
    max_posterior_error: float
    power_violations: int
    seed: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _decode_chunk(cb: CodebookSet, ch: StandardChannel, seed: int, key: tuple[int, ...],
                  count: int) -> int:
    msgs = draw_messages(cb, count, seed, PURPOSE_DECODE, *key)
    tx = transmit(cb, ch, msgs, seed, PURPOSE_DECODE, *key)
    dec = ml_decode(cb, tx.y)
    wrong = (dec[..., :2] != tx.indices[..., :2]).any(axis=(1, 2))
    return int(wrong.sum())


def decoding_errors(cb: CodebookSet, ch: StandardChannel, trials: int, seed: int,
                    draw: int = 0) -> int:
    """Number of trials whose decoded message tuple (randomization ignored) is wrong."""
    chunks = [((draw, c), min(CHUNK, trials - c * CHUNK))
              for c in range(math.ceil(trials / CHUNK))]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return sum(pool.map(lambda item: _decode_chunk(cb, ch, seed, *item), chunks))


def _share(total: int, parts: int, i: int) -> int:
    return total // parts + (i < total % parts)


def experiment_split(config: ExperimentConfig) -> SplitRates:
    split = split_rates(config.channel, config.delta, config.rates, config.mode)
    if config.randomization_scale != 1.0:
        split = split.scaled_randomization(config.randomization_scale)
    return split


def experiment_codebooks(config: ExperimentConfig) -> list[CodebookSet]:
    split = experiment_split(config)
    return [generate_codebooks(config.channel, split, config.n, config.seed, config.lambdas,
                               cap=config.cap, draw=d) for d in range(config.codebooks)]


def equivocation_samples(config: ExperimentConfig, requests: Sequence[tuple[str, int]],
                         codebooks: Sequence[CodebookSet] | None = None
                         ) -> dict[tuple[str, int], np.ndarray]:
    """Per-sample H(W_S | ...) / H(W_S) for each request, pooled over codebook draws.

    Sample i refers to the same draw, messages and noise in every request
    and in every config sharing seed, n, z_samples and codebooks, which is
    what paired comparisons need.
    """
    cbs = codebooks if codebooks is not None else experiment_codebooks(config)
    pooled: dict[tuple[str, int], list[np.ndarray]] = {r: [] for r in requests}
    for d, cb in enumerate(cbs):
        count = _share(config.z_samples, len(cbs), d)
        if count == 0:
            continue
        _, samples = equivocations(cb, config.channel, requests, count, config.seed,
                                   draw=d, return_samples=True)
        for r in requests:
            pooled[r].append(samples[r])
    return {r: np.concatenate(v) if v else np.zeros(0) for r, v in pooled.items()}


def run_experiment(config: ExperimentConfig) -> SimulationReport:
    """Split rates, draw codebooks, then measure P_err and both equivocations."""
    ch = config.channel
    split = experiment_split(config)
    cbs = experiment_codebooks(config)
    D = len(cbs)
    errors = p_err = ci = None
    if config.trials:
        errors = sum(decoding_errors(cb, ch, _share(config.trials, D, d), config.seed, draw=d)
                     for d, cb in enumerate(cbs))
        p_err = errors / config.trials
        ci = wilson_interval(errors, config.trials)
    subsets = config.subsets or tuple(rates.subsets(ch.num_users))
    equiv: dict[str, dict[str, dict[str, Any]]] = {m: {} for m in MODES}
    max_err = 0.0
    if config.z_samples:
        requests = [(m, S) for m in MODES for S in subsets]
        parts = []
        for d, cb in enumerate(cbs):
            count = _share(config.z_samples, D, d)
            if count:
                parts.append(equivocations(cb, ch, requests, count, config.seed, draw=d,
                                           return_samples=True))
        for m, S in requests:
            ratios = np.concatenate([p[1][(m, S)] for p in parts])
            ests = [p[0][(m, S)] for p in parts]
            est = _summarise(ratios, cbs[0].message_bits(S),
                             max(e.max_norm_error for e in ests),
                             all(e.entropy_in_range for e in ests))
            equiv[m][str(S)] = est.to_dict()
            max_err = max(max_err, est.max_norm_error)
    return SimulationReport(
        config=config.to_dict(),
        split=[{**asdict(u), "total": u.total} for u in split.users],
        code_sizes=[list(s) for s in cbs[0].sizes],
        effective_rates=cbs[0].effective_rates(),
        trials=config.trials,
        errors=errors,
        p_err=p_err,
        p_err_ci=ci,
        z_samples=config.z_samples,
        equivocation=equiv,
        max_posterior_error=max_err,
        power_violations=sum(cb.power_violations for cb in cbs),
        seed=config.seed,
    )
