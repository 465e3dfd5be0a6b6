"""Raw and standard-form models of the degraded Gaussian MAC wire-tap channel.

The raw channel is

    Y~ = sum_k sqrt(hM_k) X~_k + N_M,   N_M ~ N(0, sigma2M)
    Z~ = sum_k sqrt(hW_k) X~_k + N_W,   N_W ~ N(0, sigma2W)

and every such channel is equivalent to the standard form

    Y = sum_k X_k + N_M,    Z = sum_k sqrt(h_k) X_k + N_W

with unit-variance noise, powers P_k = hM_k P~_k / sigma2M and wiretap gains
h_k = hW_k sigma2M / (hM_k sigma2W).  Everything downstream assumes the
degraded case h_1 = ... = h_K = h < 1, where Z can be written as
sqrt(h) Y + N_MW with N_MW ~ N(0, 1 - h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

# relative tolerance for the equal-gains check
GAIN_TOL = 1e-9
MAX_USERS = 16


class ChannelModelError(ValueError):
    """The channel violates the degraded GMAC-WT model."""


class NotDegraded(ChannelModelError):
    pass


class NotDegradable(ChannelModelError):
    pass


class ConfigError(ValueError):
    """A channel config document is malformed; ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _positive(name: str, value: float, allow_zero: bool = False) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")
    return value


@dataclass(frozen=True)
class RawChannelConfig:
    main_gains: tuple[float, ...]
    wiretap_gains: tuple[float, ...]
    main_noise_var: float
    wiretap_noise_var: float
    raw_powers: tuple[float, ...]

    def __post_init__(self) -> None:
        K = len(self.main_gains)
        if K < 1:
            raise ValueError("need at least one user")
        if len(self.wiretap_gains) != K or len(self.raw_powers) != K:
            raise ValueError("per-user parameter lists differ in length")
        object.__setattr__(
            self, "main_gains", tuple(_positive("hM", g) for g in self.main_gains))
        object.__setattr__(
            self, "wiretap_gains",
            tuple(_positive("hW", g, allow_zero=True) for g in self.wiretap_gains))
        object.__setattr__(
            self, "raw_powers", tuple(_positive("power", p) for p in self.raw_powers))
        object.__setattr__(self, "main_noise_var", _positive("sigma2M", self.main_noise_var))
        object.__setattr__(
            self, "wiretap_noise_var", _positive("sigma2W", self.wiretap_noise_var))

    @property
    def num_users(self) -> int:
        return len(self.main_gains)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "RawChannelConfig":
        """Parse the ``{"users": [{"hM", "hW", "power"}, ...], "sigma2M", "sigma2W"}`` document."""
        if not isinstance(doc, Mapping):
            raise ConfigError("<root>", "expected a JSON object")
        users = doc.get("users")
        if not isinstance(users, list) or not users:
            raise ConfigError("users", "expected a non-empty list")
        cols: dict[str, list[float]] = {"hM": [], "hW": [], "power": []}
        for i, user in enumerate(users):
            if not isinstance(user, Mapping):
                raise ConfigError(f"users[{i}]", "expected an object")
            for key, col in cols.items():
                col.append(_number(user, key, f"users[{i}].{key}"))
        s2m = _number(doc, "sigma2M", "sigma2M")
        s2w = _number(doc, "sigma2W", "sigma2W")
        return cls(tuple(cols["hM"]), tuple(cols["hW"]), s2m, s2w, tuple(cols["power"]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "users": [
                {"hM": m, "hW": w, "power": p}
                for m, w, p in zip(self.main_gains, self.wiretap_gains, self.raw_powers)
            ],
            "sigma2M": self.main_noise_var,
            "sigma2W": self.wiretap_noise_var,
        }


def _number(doc: Mapping[str, Any], key: str, label: str) -> float:
    if key not in doc:
        raise ConfigError(label, "missing")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(label, f"expected a number, got {value!r}")
    try:
        return _positive(label, value, allow_zero=(key == "hW"))
    except ValueError as exc:
        raise ConfigError(label, str(exc)) from exc


@dataclass(frozen=True)
class UserTransform:
    """Per-user result of the standard-form reduction."""

    scale: float
    power: float
    wiretap_gain: float


@dataclass(frozen=True)
class StandardChannel:
    """Degraded GMAC-WT in standard form: powers P_k and common wiretap gain h.

    ``h`` must lie in (0, 1). Use :meth:`no_eavesdropper` for the h = 0
    baseline.
    """

    powers: tuple[float, ...]
    h: float
    eavesdropper: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        powers = tuple(float(p) for p in self.powers)
        if not powers:
            raise ValueError("need at least one user")
        if len(powers) > MAX_USERS:
            raise ValueError(f"at most {MAX_USERS} users supported")
        for p in powers:
            _positive("power", p)
        object.__setattr__(self, "powers", powers)
        h = float(self.h)
        if self.eavesdropper:
            if not 0.0 < h < 1.0:
                if h >= 1.0:
                    raise NotDegradable(f"wiretap gain h={h} >= 1: no secrecy possible")
                raise ChannelModelError(
                    f"wiretap gain h={h} outside (0, 1); use StandardChannel.no_eavesdropper")
        elif h != 0.0:
            raise ChannelModelError("a channel without eavesdropper must have h = 0")
        object.__setattr__(self, "h", h)

    @classmethod
    def no_eavesdropper(cls, powers: Sequence[float]) -> "StandardChannel":
        return cls(tuple(powers), 0.0, eavesdropper=False)

    @property
    def num_users(self) -> int:
        return len(self.powers)

    @property
    def total_power(self) -> float:
        return math.fsum(self.powers)

    def to_dict(self) -> dict[str, Any]:
        return {"powers": list(self.powers), "h": self.h}

    def as_raw(self) -> RawChannelConfig:
        """The same channel written as a raw config with unit main gains and noise."""
        K = self.num_users
        return RawChannelConfig((1.0,) * K, (self.h,) * K, 1.0, 1.0, self.powers)


def standardize(raw: RawChannelConfig) -> list[UserTransform]:
    """Reduce a raw channel to per-user (scale, P_k, h_k) in standard form."""
    out = []
    for hm, hw, p in zip(raw.main_gains, raw.wiretap_gains, raw.raw_powers):
        gain = hm / raw.main_noise_var
        out.append(UserTransform(
            scale=math.sqrt(gain),
            power=gain * p,
            wiretap_gain=hw * raw.main_noise_var / (hm * raw.wiretap_noise_var),
        ))
    return out


def to_degraded_standard(
    transforms: Sequence[UserTransform], tol: float = GAIN_TOL
) -> StandardChannel:
    """Merge per-user wiretap gains into a single degraded channel.

    Raises NotDegraded if the gains differ by more than ``tol`` (relative) and
    NotDegradable if the common gain is >= 1.
    """
    gains = [t.wiretap_gain for t in transforms]
    h = gains[0]
    scale = max(abs(h), 1e-300)
    bad = [i for i, g in enumerate(gains) if abs(g - h) > tol * scale]
    if bad:
        raise NotDegraded(
            f"wiretap gains differ (users {[i + 1 for i in bad]} vs user 1): {gains}")
    return StandardChannel(tuple(t.power for t in transforms), h)


def load_channel(doc: Mapping[str, Any], tol: float = GAIN_TOL) -> StandardChannel:
    """Parse a raw channel document and reduce it to degraded standard form."""
    return to_degraded_standard(standardize(RawChannelConfig.from_dict(doc)), tol)
