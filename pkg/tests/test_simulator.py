import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

import oracles
from gmacwt import rates
from gmacwt import regions as rg
from gmacwt import simulator as sim
from gmacwt.channel import ConfigError, StandardChannel
from strategies import channels, delta_st

CH05 = StandardChannel((10.0, 5.0), 0.5)


def _interior_point(ch, region, data, lo=0.05, hi=0.95):
    u = np.array(data.draw(st.lists(st.floats(0.05, 1.0), min_size=ch.num_users,
                                    max_size=ch.num_users)))
    A = rates.incidence(ch.num_users)
    b = np.array([region.bounds[S] for S in rates.subsets(ch.num_users)])
    scale = float((b / (A @ u)).min())
    assume(scale > 1e-3)
    return data.draw(st.floats(lo, hi)) * scale * u


# ------------------------------------------------------------------- splits

def test_full_secrecy_split():
    split = sim.split_rates(CH05, 1.0, (0.25, 0.20), "collective")
    for u in split.users:
        assert u.mu == 1.0 and u.open == 0.0
    assert math.fsum(u.randomization for u in split.users) == pytest.approx(1.543731, abs=1e-6)


def test_outside_region_infeasible():
    b = rg.collective_region(CH05, 1.0).bounds[3]
    with pytest.raises(sim.Infeasible) as info:
        sim.split_rates(CH05, 1.0, (b / 2 + 0.05, b / 2 + 0.05), "collective")
    assert info.value.subset == 3


def test_bad_mode_and_shape():
    with pytest.raises(ValueError):
        sim.split_rates(CH05, 1.0, (0.1, 0.1), "joint")
    with pytest.raises(ValueError):
        sim.split_rates(CH05, 1.0, (0.1,), "collective")


def _individual_feasible(ch, delta, R):
    """Smallest secret rate per user is max(delta R_k, R_k - C^W_k); feasible iff it fits every S."""
    need = [max(delta * r, r - rates.cw(ch, 1 << k)) for k, r in enumerate(R)]
    return all(sum(need[k] for k in rates.members(S)) <= rates.cm(ch, S) - rates.cw_individual_sum(ch, S) + 1e-12
               for S in rates.iter_subsets(ch))


@given(channels(2, 3), st.floats(0.01, 1.0), st.data())
def test_individual_split_invariants(ch, delta, data):
    R = _interior_point(ch, rg.individual_region(ch, delta), data)
    if not _individual_feasible(ch, delta, R):
        with pytest.raises(sim.Infeasible):
            sim.split_rates(ch, delta, R, "individual")
        return
    split = sim.split_rates(ch, delta, R, "individual")
    for k, u in enumerate(split.users):
        assert delta - 1e-12 <= u.mu <= 1.0
        assert u.secret == pytest.approx(u.mu * R[k], abs=1e-12)
        assert u.open == pytest.approx((1 - u.mu) * R[k], abs=1e-12)
        assert u.randomization >= 0.0
        assert u.open + u.randomization == pytest.approx(rates.cw(ch, 1 << k), abs=1e-12)
    for S in rates.iter_subsets(ch):
        ks = rates.members(S)
        secret = sum(split.users[k].secret for k in ks)
        assert secret <= rates.cm(ch, S) - rates.cw_individual_sum(ch, S) + 1e-9
        assert sum(split.users[k].total for k in ks) <= rates.cm(ch, S) + 1e-9


def test_individual_infeasible_inside_region():
    # user 1 below its wiretap capacity, user 2 above: the split needs more
    # secret rate than delta R_K although R lies inside the region
    ch = StandardChannel((5.0, 1.25), 0.59375)
    R = (0.1, 0.55)
    assert rg.individual_region(ch, 0.05).contains(R)
    assert not _individual_feasible(ch, 0.05, R)
    with pytest.raises(sim.Infeasible):
        sim.split_rates(ch, 0.05, R, "individual")


@given(channels(2, 3), st.sampled_from(sim.MODES), st.data())
def test_no_secrecy_split_is_plain(ch, mode, data):
    R = _interior_point(ch, rg.gmac_region(ch), data)
    split = sim.split_rates(ch, 0.0, R, mode)
    assert [u.open for u in split.users] == pytest.approx(list(R))
    assert all(u.secret == u.randomization == 0.0 for u in split.users)


@given(channels(2, 3), st.floats(0.01, 1.0), st.data())
def test_collective_split_invariants(ch, delta, data):
    R = _interior_point(ch, rg.collective_region(ch, delta), data)
    split = sim.split_rates(ch, delta, R, "collective")
    K = rates.full_set(ch.num_users)
    assert math.fsum(u.open + u.randomization for u in split.users) == pytest.approx(
        rates.cw(ch, K), abs=1e-9)
    for k, u in enumerate(split.users):
        assert delta - 1e-12 <= u.mu <= 1.0
        assert u.secret == pytest.approx(u.mu * R[k], abs=1e-12)
        assert u.randomization >= 0.0
    for S in rates.iter_subsets(ch):
        ks = rates.members(S)
        assert sum(split.users[k].secret for k in ks) <= rates.cm(ch, S) - rates.cw_tilde(ch, S) + 1e-9
        assert sum(split.users[k].total for k in ks) <= rates.cm(ch, S) + 1e-9


# --------------------------------------------------------------- codebooks

@pytest.mark.parametrize("n, R, M", [(4, 0.5, 4), (4, 0.0, 1), (8, 0.25, 4), (4, 0.26, 4), (4, 0.51, 8)])
def test_codebook_size(n, R, M):
    assert sim.codebook_size(n, R) == M


def test_default_lambdas():
    assert sim.default_lambdas((1, 1, 1)) == (1.0, 0.0, 0.0)
    lam = sim.default_lambdas((4, 1, 2))
    assert lam[1] == 0.0 and math.fsum(lam) == pytest.approx(1.0)
    assert lam[0] == pytest.approx(2 / 3)
    floored = sim.default_lambdas((2, 1, 2 ** 40))
    assert floored[0] == pytest.approx(0.05 / (0.05 + 40 / 41))


def _split(secret=0.5, open_=0.0, rand=0.0, K=1):
    return sim.SplitRates("collective", 1.0, (sim.UserSplit(secret, open_, rand, 1.0),) * K)


def test_secret_only_codebook():
    ch = StandardChannel((4.0,), 0.5)
    cb = sim.generate_codebooks(ch, _split(), 4, seed=1, lambdas=(1.0, 0.0, 0.0))
    assert cb.sizes == ((4, 1, 1),)
    assert not cb.books[0][1].any() and not cb.books[0][2].any()


def test_codebooks_deterministic():
    split = sim.split_rates(CH05, 1.0, (0.2, 0.2), "collective")
    a = sim.generate_codebooks(CH05, split, 4, seed=7)
    b = sim.generate_codebooks(CH05, split, 4, seed=7)
    c = sim.generate_codebooks(CH05, split, 4, seed=7, draw=1)
    for k in range(2):
        for j in range(3):
            assert a.books[k][j].tobytes() == b.books[k][j].tobytes()
    assert not np.array_equal(a.books[0][0], c.books[0][0])


def test_codeword_variance():
    ch = StandardChannel((3.0,), 0.5)
    cb = sim.generate_codebooks(ch, _split(secret=1.0), 12, seed=3, cap=None,
                                lambdas=(1.0, 0.0, 0.0))
    x = cb.books[0][0]
    target = 3.0 * (1 - sim.POWER_MARGIN)
    assert x.var() == pytest.approx(target, rel=4 * math.sqrt(2 / x.size))


def test_bad_lambdas():
    with pytest.raises(ValueError):
        sim.generate_codebooks(CH05, _split(K=2), 4, 0, lambdas=(0.5, 0.4, 0.0))


def test_cap_exceeded():
    with pytest.raises(sim.CapExceeded):
        sim.generate_codebooks(CH05, _split(secret=2.0, K=2), 4, 0)
    cb = sim.generate_codebooks(CH05, _split(secret=2.0, K=2), 4, 0, cap=None)
    with pytest.raises(sim.CapExceeded):
        cb.composite


# ------------------------------------------------------------- channel use

def test_noiseless_single_codeword():
    ch = StandardChannel((2.0,), 0.5)
    cb = sim.generate_codebooks(ch, _split(secret=0.0), 5, seed=0)
    tx = sim.transmit(cb, ch, np.zeros((1, 1, 2), int), 0, noise_var=0.0)
    assert np.array_equal(tx.y[0], cb.books[0][0][0])


def test_degraded_noise_moments():
    ch = StandardChannel((2.0,), 0.3)
    cb = sim.generate_codebooks(ch, _split(secret=1.0), 1, seed=0)
    T = 100_000
    msgs = sim.draw_messages(cb, T, 0, 9)
    tx = sim.transmit(cb, ch, msgs, 0, 9)
    resid = (tx.z - math.sqrt(ch.h) * tx.y).ravel()
    var_hat = resid.var()
    assert abs(var_hat - (1 - ch.h)) < 3 * (1 - ch.h) * math.sqrt(2 / T)
    y, z = tx.y.ravel(), tx.z.ravel()
    rho = np.corrcoef(y, z)[0, 1]
    expected = math.sqrt(ch.h) * y.std() / z.std()
    assert abs(rho - expected) < 3 * (1 - rho ** 2) / math.sqrt(T)


def test_message_index_range_checked():
    cb = sim.generate_codebooks(CH05, _split(K=2), 4, 0)
    with pytest.raises(IndexError):
        sim.transmit(cb, CH05, np.full((1, 2, 2), 7), 0)


def test_ml_decode_noiseless():
    split = sim.split_rates(CH05, 0.5, (0.3, 0.3), "collective")
    cb = sim.generate_codebooks(CH05, split, 4, seed=2)
    msgs = sim.draw_messages(cb, 50, 2, 0)
    tx = sim.transmit(cb, CH05, msgs, 2, 0, noise_var=0.0)
    assert np.array_equal(sim.ml_decode(cb, tx.y), tx.indices)


def test_ml_decode_antipodal_midpoint():
    ch = StandardChannel((1.0,), 0.5)
    c = np.array([[1.0, 2.0], [-1.0, -2.0]])
    cb = sim.CodebookSet(2, (1.0,), ((2, 1, 1),), ((1.0, 0.0, 0.0),),
                         ((c, np.zeros((1, 2)), np.zeros((1, 2))),), 0)
    y = np.array([[0.3, -0.1], [-0.3, 0.1], [0.0, 0.0]])
    assert sim.ml_decode(cb, y)[:, 0, 0].tolist() == [0, 1, 0]


def test_error_rate_drops_with_block_length():
    base = dict(channel=StandardChannel((10.0, 10.0), 0.05), delta=1.0, rates=(0.25, 0.25),
                trials=4000, z_samples=0, codebooks=8, seed=0)
    p4 = sim.run_experiment(sim.ExperimentConfig(n=4, **base)).p_err
    p8 = sim.run_experiment(sim.ExperimentConfig(n=8, **base)).p_err
    assert p8 < p4


# ----------------------------------------------------------- equivocation

def _tiny_instance(h=0.3):
    ch = StandardChannel((2.0, 1.5), h)
    split = sim.SplitRates("collective", 0.5, (
        sim.UserSplit(0.25, 0.25, 0.25, 0.5), sim.UserSplit(0.25, 0.0, 0.25, 1.0)))
    cb = sim.generate_codebooks(ch, split, 4, seed=11)
    assert math.prod(math.prod(s) for s in cb.sizes) <= 64
    return ch, cb


@pytest.mark.parametrize("mode, S", [("collective", 1), ("collective", 2), ("collective", 3),
                                     ("individual", 1), ("individual", 2), ("individual", 3)])
def test_posterior_matches_brute_force_per_sample(mode, S):
    ch, cb = _tiny_instance()
    msgs = sim.draw_messages(cb, 20, 5, 0)
    tx = sim.transmit(cb, ch, msgs, 5, 0)
    H, err = sim.posterior_entropy(cb, ch.h, tx.z, tx.indices, S, mode)
    for t in range(20):
        ref, ref_err = oracles.brute_posterior_entropy(cb.books, ch.h, tx.z[t], tx.indices[t], S, mode)
        assert H[t] == pytest.approx(ref, abs=1e-9)
    assert (err <= 1e-9).all()


def _oracle_estimate(ch, cb, S, mode, N, seed):
    """Sampling path rebuilt from scratch: numpy default RNG, loop posterior."""
    rng = np.random.default_rng(seed)
    bits = cb.message_bits(S)
    out = []
    for _ in range(N):
        idx = [[rng.integers(m) for m in s] for s in cb.sizes]
        x = sum(cb.books[k][j][idx[k][j]] for k in range(cb.num_users) for j in range(3))
        y = x + rng.standard_normal(cb.n)
        z = math.sqrt(ch.h) * y + math.sqrt(1 - ch.h) * rng.standard_normal(cb.n)
        out.append(oracles.brute_posterior_entropy(cb.books, ch.h, z, idx, S, mode)[0] / bits)
    out = np.array(out)
    return out.mean(), sim.Z95 * out.std(ddof=1) / math.sqrt(N)


@pytest.mark.parametrize("mode, S", [("collective", 3), ("individual", 1)])
def test_estimate_agrees_with_reference(mode, S):
    ch, cb = _tiny_instance()
    est = sim.estimate_equivocation(cb, ch, S, mode, num_z_samples=300, seed=4)
    ref, ref_hw = _oracle_estimate(ch, cb, S, mode, N=3000, seed=99)
    assert abs(est.value - ref) <= math.hypot(est.half_width, ref_hw)
    assert est.entropy_in_range and est.max_norm_error <= 1e-9


def test_degenerate_entropy_flagged():
    ch = StandardChannel((2.0,), 0.5)
    cb = sim.generate_codebooks(ch, _split(secret=0.0, rand=0.5), 4, seed=0)
    est = sim.estimate_equivocation(cb, ch, 1, "collective", 100, seed=0)
    assert est.degenerate and est.value == 1.0


def test_strong_eavesdropper_learns_messages():
    ch = StandardChannel((50.0,), 0.999)
    cb = sim.generate_codebooks(ch, _split(secret=0.5), 4, seed=0)
    est = sim.estimate_equivocation(cb, ch, 1, "collective", 2000, seed=0)
    assert est.value < 0.05


def test_bad_request():
    ch, cb = _tiny_instance()
    with pytest.raises(ValueError):
        sim.estimate_equivocation(cb, ch, 1, "joint", 10, 0)
    with pytest.raises(ValueError):
        sim.estimate_equivocation(cb, ch, 4, "collective", 10, 0)


@settings(max_examples=15)
@given(st.floats(0.05, 0.9), st.integers(0, 2**32 - 1))
def test_ordering_and_sanity(h, seed):
    ch, cb = _tiny_instance(h)
    reqs = [(m, S) for m in sim.MODES for S in (1, 2, 3)]
    est = sim.equivocations(cb, ch, reqs, 400, seed)
    for S in (1, 2, 3):
        ind, col = est[("individual", S)], est[("collective", S)]
        assert ind.value <= col.value + max(ind.half_width, col.half_width)
        assert ind.entropy_in_range and col.entropy_in_range
        assert max(ind.max_norm_error, col.max_norm_error) <= 1e-9
        assert 0.0 <= ind.value <= 1.0 + 1e-9
    worst = min(est[("individual", 1)].value, est[("individual", 2)].value)
    assert worst <= est[("individual", 3)].value + est[("individual", 3)].half_width


# -------------------------------------------------------------- experiments

def test_wilson_interval():
    lo, hi = sim.wilson_interval(0, 100)
    assert lo == 0.0 and hi == pytest.approx(sim.Z95 ** 2 / (100 + sim.Z95 ** 2))
    lo, hi = sim.wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - 0.5 == pytest.approx(0.5 - lo)


def test_zero_trials_report():
    cfg = sim.ExperimentConfig(CH05, 1.0, (0.2, 0.2), trials=0, z_samples=0)
    rep = sim.run_experiment(cfg)
    assert rep.errors is None and rep.p_err is None and rep.equivocation == {
        "individual": {}, "collective": {}}
    assert rep.code_sizes and json.loads(rep.to_json())["seed"] == 0


def test_report_reproducible():
    cfg = sim.ExperimentConfig(CH05, 1.0, (0.2, 0.2), trials=500, z_samples=300, codebooks=2)
    assert sim.run_experiment(cfg).to_json() == sim.run_experiment(cfg).to_json()


def test_threads_do_not_change_results(monkeypatch):
    cfg = sim.ExperimentConfig(CH05, 1.0, (0.2, 0.2), trials=3000, z_samples=2500, seed=3)
    one = sim.run_experiment(cfg).to_json()
    monkeypatch.setenv("GMACWT_THREADS", "4")
    assert sim.run_experiment(cfg).to_json() == one


def test_config_round_trip():
    cfg = sim.ExperimentConfig(CH05, 0.5, (0.2, 0.1), mode="individual", n=8, subsets=(3,),
                               lambdas=((0.5, 0.25, 0.25), (1.0, 0.0, 0.0)))
    assert sim.ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_config_accepts_raw_channel():
    doc = {"channel": CH05.as_raw().to_dict(), "delta": 1, "rates": [0.1, 0.1]}
    assert sim.ExperimentConfig.from_dict(doc).channel == CH05


@pytest.mark.parametrize("doc, field", [
    ({"delta": 1, "rates": [0.1]}, "channel"),
    ({"channel": {"powers": [1], "h": 0.5}, "delta": 1, "rates": 0.1}, "rates"),
    ({"channel": {"powers": [1], "h": 0.5}, "delta": 1, "rates": [0.1], "mode": "x"}, "<config>"),
])
def test_config_errors(doc, field):
    with pytest.raises(ConfigError) as info:
        sim.ExperimentConfig.from_dict(doc)
    assert info.value.field == field
