import math

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from gmacwt.channel import (ChannelModelError, ConfigError, NotDegradable, NotDegraded,
                            RawChannelConfig, StandardChannel, UserTransform, load_channel,
                            standardize, to_degraded_standard)

TWO_USER_RAW = {
    "users": [{"hM": 4, "hW": 1, "power": 5}, {"hM": 1, "hW": 0.25, "power": 10}],
    "sigma2M": 2,
    "sigma2W": 1,
}


def test_identity_transform():
    (t,) = standardize(RawChannelConfig((1.0,), (1.0,), 1.0, 1.0, (10.0,)))
    assert (t.scale, t.power, t.wiretap_gain) == (1.0, 10.0, 1.0)


def test_two_user_example_against_high_precision():
    users = standardize(RawChannelConfig.from_dict(TWO_USER_RAW))
    for u, (hm, hw, p) in zip(users, [(4, 1, 5), (1, 0.25, 10)]):
        assert u.power == pytest.approx(float(mp.mpf(hm) / 2 * p), rel=1e-15)
        assert u.wiretap_gain == pytest.approx(float(mp.mpf(hw) * 2 / hm), rel=1e-15)
        assert u.scale == pytest.approx(float(mp.sqrt(mp.mpf(hm) / 2)), rel=1e-15)
    ch = load_channel(TWO_USER_RAW)
    assert ch.powers == (10.0, 5.0) and ch.h == 0.5


def test_zero_wiretap_noise_rejected():
    doc = {**TWO_USER_RAW, "sigma2W": 0}
    with pytest.raises(ConfigError) as info:
        RawChannelConfig.from_dict(doc)
    assert info.value.field == "sigma2W"


@pytest.mark.parametrize("doc, field", [
    ({"users": []}, "users"),
    ({"users": [{"hM": 1, "hW": 1}], "sigma2M": 1, "sigma2W": 1}, "users[0].power"),
    ({"users": [{"hM": -1, "hW": 1, "power": 1}], "sigma2M": 1, "sigma2W": 1}, "users[0].hM"),
    ({"users": [{"hM": 1, "hW": "x", "power": 1}], "sigma2M": 1, "sigma2W": 1}, "users[0].hW"),
    ({"users": [{"hM": 1, "hW": 1, "power": 1}], "sigma2W": 1}, "sigma2M"),
    ([1, 2], "<root>"),
])
def test_parse_errors_name_field(doc, field):
    with pytest.raises(ConfigError) as info:
        RawChannelConfig.from_dict(doc)
    assert info.value.field == field
    assert field in str(info.value)


def test_zero_wiretap_gain_is_valid_raw():
    raw = RawChannelConfig((1.0,), (0.0,), 1.0, 1.0, (1.0,))
    assert standardize(raw)[0].wiretap_gain == 0.0


def test_within_tolerance_merge():
    ts = [UserTransform(1.0, 10.0, 0.5), UserTransform(1.0, 5.0, 0.500000001)]
    ch = to_degraded_standard(ts, tol=1e-6)
    assert ch.h == 0.5 and ch.powers == (10.0, 5.0)


def test_unequal_gains_not_degraded():
    ts = [UserTransform(1.0, 10.0, 0.5), UserTransform(1.0, 5.0, 0.9)]
    with pytest.raises(NotDegraded):
        to_degraded_standard(ts)


def test_default_tolerance_is_tight():
    ts = [UserTransform(1.0, 10.0, 0.5), UserTransform(1.0, 5.0, 0.500000001)]
    with pytest.raises(NotDegraded):
        to_degraded_standard(ts)


@pytest.mark.parametrize("h", [1.0, 1.5])
def test_strong_eavesdropper_not_degradable(h):
    with pytest.raises(NotDegradable):
        to_degraded_standard([UserTransform(1.0, 10.0, h)])


def test_h_zero_needs_explicit_constructor():
    with pytest.raises(ChannelModelError):
        StandardChannel((1.0,), 0.0)
    ch = StandardChannel.no_eavesdropper((10.0, 5.0))
    assert ch.h == 0.0 and not ch.eavesdropper
    with pytest.raises(ChannelModelError):
        StandardChannel((1.0,), 0.3, eavesdropper=False)


@pytest.mark.parametrize("powers", [(), (0.0,), (-1.0, 2.0), (1.0,) * 17])
def test_bad_powers(powers):
    with pytest.raises(ValueError):
        StandardChannel(powers, 0.5)


def test_round_trip_as_raw():
    ch = StandardChannel((10.0, 5.0), 0.5)
    assert load_channel(ch.as_raw().to_dict()) == ch


raw_channels = st.integers(1, 4).flatmap(lambda K: st.tuples(
    st.lists(st.floats(0.1, 10), min_size=K, max_size=K),
    st.lists(st.floats(0.0, 10), min_size=K, max_size=K),
    st.floats(0.1, 10), st.floats(0.1, 10),
    st.lists(st.floats(0.1, 10), min_size=K, max_size=K),
))


@given(raw_channels, st.floats(1e-3, 1e3))
def test_rescaling_invariance(params, c):
    hm, hw, s2m, s2w, p = params
    base = standardize(RawChannelConfig(tuple(hm), tuple(hw), s2m, s2w, tuple(p)))
    scaled = standardize(RawChannelConfig(
        tuple(c * g for g in hm), tuple(c * g for g in hw), c * s2m, c * s2w, tuple(p)))
    for a, b in zip(base, scaled):
        assert b.power == pytest.approx(a.power, rel=1e-12)
        assert b.wiretap_gain == pytest.approx(a.wiretap_gain, rel=1e-12, abs=1e-300)


@given(raw_channels)
def test_receiver_snr_round_trip(params):
    hm, hw, s2m, s2w, p = params
    users = standardize(RawChannelConfig(tuple(hm), tuple(hw), s2m, s2w, tuple(p)))
    raw_snr = math.fsum(g * q / s2m for g, q in zip(hm, p))
    assert math.fsum(u.power for u in users) == pytest.approx(raw_snr, rel=1e-12)
