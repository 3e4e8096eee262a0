import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcongest.game import CostPolynomial, PreconditionError, Profile, make_game
from svcongest.sharing import (
    PROPORTIONAL,
    ExactSizeExceeded,
    SampleConfig,
    ShareMethod,
    default_batch_count,
    marginal_contribution,
    player_cost,
    proportional_share,
    shapley_by_permutations,
    shapley_exact,
    shapley_sampled,
    share_report,
)

from conftest import rel_close

SQUARE = CostPolynomial((0, 0, 1))
LINEAR = CostPolynomial((0, 1))

weights_st = st.lists(st.floats(0.05, 5.0), min_size=1, max_size=6)
coeffs_st = st.lists(st.floats(0.0, 2.0), min_size=1, max_size=5).filter(lambda c: any(a > 0 for a in c))


def users(ws):
    return list(enumerate(ws))


def test_marginal_contribution():
    assert marginal_contribution(SQUARE, 0, 1) == 1
    assert marginal_contribution(SQUARE, 1, 2) == 26
    assert marginal_contribution(CostPolynomial((1,)), 7.5, 2) == pytest.approx(2)
    with pytest.raises(PreconditionError):
        marginal_contribution(SQUARE, -1, 1)
    with pytest.raises(PreconditionError):
        marginal_contribution(SQUARE, 1, 0)


def test_worked_example_exact():
    assert shapley_exact(SQUARE, [(0, 1), (1, 2)], 0) == 10
    assert shapley_exact(SQUARE, [(0, 1), (1, 2)], 1) == 17
    # Oracle: average over both arrival orders.
    assert shapley_by_permutations(SQUARE, [(0, 1), (1, 2)], 0) == (1 + 19) / 2
    assert shapley_by_permutations(SQUARE, [(0, 1), (1, 2)], 1) == (26 + 8) / 2


def test_single_user_pays_joint_cost():
    assert shapley_exact(SQUARE, [(3, 1.5)], 3) == pytest.approx(1.5**3)


def test_linear_shapley_is_proportional():
    assert shapley_exact(LINEAR, [(0, 1), (1, 2)], 0) == pytest.approx(3)
    assert shapley_exact(LINEAR, [(0, 1), (1, 2)], 1) == pytest.approx(6)
    assert shapley_by_permutations(LINEAR, [(0, 1), (1, 2)], 0) == pytest.approx(3)


def test_target_missing():
    with pytest.raises(PreconditionError):
        shapley_exact(SQUARE, [(0, 1)], 5)


def test_exact_size_cap():
    with pytest.raises(ExactSizeExceeded, match="exact size exceeded"):
        shapley_exact(SQUARE, [(i, 1.0) for i in range(21)], 0)
    with pytest.raises(ExactSizeExceeded):
        shapley_exact(SQUARE, [(i, 1.0) for i in range(5)], 0, size_cap=4)


def test_exact_at_cap_runs():
    us = [(i, 1.0 + 0.01 * i) for i in range(20)]
    total = sum(shapley_exact(SQUARE, us, i) for i in range(20))
    assert rel_close(total, SQUARE.joint(sum(w for _, w in us)))


def test_proportional_share():
    assert proportional_share(SQUARE, 3, 1) == 9
    assert proportional_share(SQUARE, 3, 2) == 18
    assert proportional_share(CostPolynomial((4,)), 3, 2) == 8
    with pytest.raises(PreconditionError):
        proportional_share(SQUARE, 1, 2)


def test_player_cost_examples(two_player_shared):
    p = Profile((0, 0))
    assert [player_cost(two_player_shared, p, i) for i in range(2)] == [10, 17]
    assert [player_cost(two_player_shared, p, i, PROPORTIONAL) for i in range(2)] == [9, 18]
    sole = make_game([1], [[[0, 1]]], [[0, 1], [0, 1]])
    assert player_cost(sole, Profile((0,)), 0) == 2


@settings(max_examples=200, deadline=None)
@given(ws=weights_st, coeffs=coeffs_st)
def test_budget_balance(ws, coeffs):
    poly = CostPolynomial(tuple(coeffs))
    total = math.fsum(shapley_exact(poly, users(ws), i) for i in range(len(ws)))
    assert rel_close(total, poly.joint(sum(ws)))


@settings(max_examples=100, deadline=None)
@given(ws=weights_st, coeffs=coeffs_st)
def test_exact_matches_permutations(ws, coeffs):
    poly = CostPolynomial(tuple(coeffs))
    for i in range(len(ws)):
        assert rel_close(shapley_exact(poly, users(ws), i), shapley_by_permutations(poly, users(ws), i))


@settings(max_examples=150, deadline=None)
@given(ws=st.lists(st.floats(0.05, 5.0), min_size=1, max_size=5), extra=st.floats(0.05, 5.0), coeffs=coeffs_st)
def test_monotone_in_added_players(ws, extra, coeffs):
    poly = CostPolynomial(tuple(coeffs))
    base = shapley_exact(poly, users(ws), 0)
    grown = shapley_exact(poly, users(ws) + [(99, extra)], 0)
    assert base <= grown * (1 + 1e-9) + 1e-12


@settings(max_examples=150, deadline=None)
@given(ws=weights_st, coeffs=coeffs_st)
def test_linear_cost_coincides(ws, coeffs):
    a = coeffs[0] or 1.0
    b = coeffs[-1] or 1.0
    poly = CostPolynomial((a, b))
    total = sum(ws)
    for i, w in enumerate(ws):
        assert rel_close(shapley_exact(poly, users(ws), i), proportional_share(poly, total, w))


def test_sampled_k_and_single_user():
    cfg = SampleConfig(mu=0.5, batch_count=3, seed=1)
    assert cfg.samples_per_batch(5) == 64
    est = shapley_sampled(SQUARE, [(0, 2.0)], 0, cfg)
    assert est.estimate == 8 and est.samples_per_batch == 0 and est.batch_means == ()


def test_sampled_worked_example():
    cfg = SampleConfig(mu=0.1, batch_count=11, seed=12345)
    est = shapley_sampled(SQUARE, [(0, 1), (1, 2)], 0, cfg)
    assert 9 <= est.estimate <= 11
    assert len(est.batch_means) == 11 and est.estimate in est.batch_means


def test_sampled_deterministic():
    cfg = SampleConfig(mu=0.3, batch_count=5, seed=99)
    us = [(0, 1.0), (1, 2.5), (2, 0.7)]
    a = shapley_sampled(SQUARE, us, 1, cfg)
    from svcongest.sharing import _sampled_cached

    _sampled_cached.cache_clear()
    b = shapley_sampled(SQUARE, list(reversed(us)), 1, cfg)
    assert a == b
    c = shapley_sampled(SQUARE, us, 1, SampleConfig(mu=0.3, batch_count=5, seed=100))
    assert c != a


def test_sample_config_validation():
    with pytest.raises(PreconditionError):
        SampleConfig(mu=0)
    with pytest.raises(PreconditionError):
        SampleConfig(mu=1.5)
    with pytest.raises(PreconditionError):
        SampleConfig(batch_count=4)
    with pytest.raises(PreconditionError):
        SampleConfig(failure_exponent=0.5)
    with pytest.raises(PreconditionError):
        ShareMethod("shapley-sampled")
    with pytest.raises(PreconditionError):
        ShareMethod("banzhaf")


def test_default_batch_count_formula():
    r = default_batch_count(5, 4, 6, 1.0, 2, 0.2, 1.0)
    expected = math.ceil(math.log2(2 * 5**4 * 4 * 6 * 1 * 3 * 0.2**-9))
    assert r == (expected if expected % 2 else expected + 1)
    assert r % 2 == 1


def test_share_report(two_player_shared):
    rep = share_report(two_player_shared, Profile((0, 0)))
    assert rep.shares == {(0, 0): 10, (1, 0): 17}
    assert abs(rep.residuals[0]) < 1e-12
    d = rep.to_dict()
    assert d["method"] == "shapley-exact" and len(d["shares"]) == 2
    srep = share_report(
        two_player_shared, Profile((0, 0)), ShareMethod.sampled(SampleConfig(mu=0.2, batch_count=3, seed=4))
    )
    assert len(srep.batch_means[(0, 0)]) == 3
    assert "batch_means" in srep.to_dict()["shares"][0]


def test_sampler_batch_unbiasedness():
    rng = np.random.default_rng(3)
    ws = rng.uniform(0.5, 3, size=5)
    poly = CostPolynomial((0.3, 0.2, 1.0))
    us = users(ws)
    exact = shapley_exact(poly, us, 2)
    cfg = SampleConfig(mu=0.2, batch_count=1, seed=0)
    means = [
        shapley_sampled(poly, us, 2, cfg, first_batch=b).estimate for b in range(200)
    ]
    within = sum(abs(m - exact) < 0.2 * exact for m in means)
    assert within / 200 >= 0.70
    assert abs(np.mean(means) - exact) < 0.02 * exact


@settings(max_examples=150, deadline=None)
@given(ws=st.lists(st.floats(0.05, 5.0), min_size=1, max_size=4), w1=st.floats(0.05, 5.0), w2=st.floats(0.05, 5.0), coeffs=coeffs_st)
def test_merging_others_never_lowers_share(ws, w1, w2, coeffs):
    poly = CostPolynomial(tuple(coeffs))
    merged = shapley_exact(poly, users(ws) + [(90, w1 + w2)], 0)
    split = shapley_exact(poly, users(ws) + [(91, w1), (92, w2)], 0)
    assert merged >= split * (1 - 1e-9) - 1e-12


@settings(max_examples=150, deadline=None)
@given(ws=st.lists(st.floats(0.05, 5.0), min_size=1, max_size=4), w1=st.floats(0.05, 5.0), w2=st.floats(0.05, 5.0), coeffs=coeffs_st)
def test_equalizing_others_never_raises_share(ws, w1, w2, coeffs):
    poly = CostPolynomial(tuple(coeffs))
    uneven = shapley_exact(poly, users(ws) + [(91, w1), (92, w2)], 0)
    half = (w1 + w2) / 2
    even = shapley_exact(poly, users(ws) + [(91, half), (92, half)], 0)
    assert uneven >= even * (1 - 1e-9) - 1e-12


@settings(max_examples=150, deadline=None)
@given(ws=st.lists(st.floats(0.05, 5.0), min_size=1, max_size=5), coeffs=coeffs_st)
def test_splitting_a_player_never_raises_cost(ws, coeffs):
    poly = CostPolynomial(tuple(coeffs))
    rest = users(ws)[1:]
    half = ws[0] / 2
    whole = shapley_exact(poly, users(ws), 0)
    first = shapley_exact(poly, rest + [(91, half)], 91)
    second = shapley_exact(poly, rest + [(91, half), (92, half)], 92)
    assert whole >= (first + second) * (1 - 1e-9) - 1e-12
