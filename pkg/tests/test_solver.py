import numpy as np
import pytest

from svcongest.analysis import all_profiles, verify_approx_equilibrium
from svcongest.bounds import bound_degree, gamma_for_fraction, max_admissible_gamma
from svcongest.game import PreconditionError, Profile, make_game
from svcongest.sharing import SampleConfig, ShareMethod
from svcongest.solver import (
    StepBudgetExceeded,
    best_response,
    block_ratio,
    can_rho_move,
    compute_schedule,
    solve,
    step_bound,
)

from conftest import random_game


def spread_game(seed, n=5, decades=6):
    """Players whose costs span many orders of magnitude, forcing several phases."""
    rng = np.random.default_rng(seed)
    weights = [10.0**k for k in rng.uniform(-decades, decades, size=n)]
    strategies = [[[0], [1], [2], [0, 1]] for _ in range(n)]
    game = make_game(weights, strategies, [[0, 1], [0.5, 2], [1, 0.5]])
    return game, Profile(tuple(int(c) for c in rng.integers(0, 4, size=n)))


def test_block_ratio_example():
    assert block_ratio(2, 1, 0.5) == 64


def test_schedule_single_phase_when_costs_equal():
    game = make_game([1], [[[0]]], [[0, 1]])
    sched = compute_schedule(game, Profile((0,)), 0.01)
    assert sched.x_max == sched.x_min == 1
    assert sched.m == 1
    assert sched.blocks == (1.0, 1.0 / sched.g)


def test_schedule_rejects_large_gamma():
    game = make_game([1], [[[0]]], [[0, 1]])
    with pytest.raises(PreconditionError, match="maximal admissible gamma") as info:
        compute_schedule(game, Profile((0,)), 0.5)
    assert f"{max_admissible_gamma(1):.9g}" in str(info.value)


@pytest.mark.parametrize("seed", range(5))
def test_schedule_invariants(seed):
    game, start = spread_game(seed)
    sched = compute_schedule(game, start, 0.03)
    assert sched.s > 0 and sched.t == 1.03
    assert all(a > b for a, b in zip(sched.blocks, sched.blocks[1:]))
    assert sched.blocks[-1] <= sched.x_min
    assert sched.m >= 2
    assert sched.alpha == pytest.approx((1 + 0.03**2) / (1 - 0.03) * sched.s)


def test_best_response_examples(parallel_links):
    assert best_response(parallel_links, Profile((0, 0)), 1) == (1, 1.0)
    single = make_game([1, 1], [[[0]], [[0], [1]]], [[0, 1], [0, 1]])
    assert best_response(single, Profile((0, 0)), 0) == (0, 2.0)
    alone = make_game([1], [[[0], [1]]], [[0, 1], [0, 2]])
    assert best_response(alone, Profile((1,)), 0) == (0, 1.0)


def test_best_response_tie_lowest_index():
    game = make_game([1], [[[0], [1], [2]]], [[0, 2], [0, 1], [0, 1]])
    assert best_response(game, Profile((0,)), 0) == (1, 1.0)


def test_can_rho_move_examples():
    game = make_game([1], [[[0], [1], [2]]], [[10], [4], [5]])
    assert can_rho_move(game, Profile((0,)), 0, 2.0) == (1, 2.5)
    no_four = make_game([1], [[[0], [1]]], [[10], [5]])
    assert can_rho_move(no_four, Profile((0,)), 0, 2.0) is None
    assert can_rho_move(game, Profile((1,)), 0, 1.0) is None
    with pytest.raises(PreconditionError):
        can_rho_move(game, Profile((0,)), 0, 0.5)


def test_solve_one_player():
    game = make_game([2], [[[0], [1], [0, 1]]], [[0, 1], [0, 0.5]])
    profile, trace, _ = solve(game, Profile((2,)), 0.01)
    assert trace.steps <= 1
    assert verify_approx_equilibrium(game, profile).is_rho_pne(1.0)


def test_solve_parallel_links(parallel_links):
    profile, trace, _ = solve(parallel_links, Profile((0, 0)), 0.01)
    assert trace.steps == 1
    assert sorted(profile.choice) == [0, 1]
    # Oracle: no profile among all four admits an improving deviation except the crowded ones.
    pnes = [p for p in all_profiles(parallel_links) if verify_approx_equilibrium(parallel_links, p).is_rho_pne(1.0)]
    assert profile in pnes


def check_trace(game, trace, sched):
    last = trace.initial_potential
    for mv in trace.moves:
        assert mv.potential_after < last
        last = mv.potential_after
        rho = sched.s if mv.kind == "s" else sched.t
        assert mv.cost_before > rho * mv.cost_after
    assert trace.steps <= step_bound(game.n, sched.d, sched.gamma, sched.m)


def check_freezing(trace):
    frozen_at = {}
    for ph in trace.phases:
        for i in ph.finished:
            frozen_at.setdefault(i, ph.phase)
    for mv in trace.moves:
        assert mv.player not in frozen_at or mv.phase <= frozen_at[mv.player]


@pytest.mark.parametrize("seed", range(8))
def test_solve_multi_phase(seed):
    game, start = spread_game(seed)
    profile, trace, sched = solve(game, start, 0.03)
    assert sched.m >= 2 and len(trace.phases) == sched.m
    check_trace(game, trace, sched)
    check_freezing(trace)
    assert verify_approx_equilibrium(game, profile).is_rho_pne(sched.alpha)


@pytest.mark.parametrize("seed", range(8))
def test_solve_random_games(seed):
    game = random_game(400 + seed)
    gamma = gamma_for_fraction(bound_degree(game.d))
    profile, trace, sched = solve(game, Profile((0,) * game.n), gamma)
    check_trace(game, trace, sched)
    assert verify_approx_equilibrium(game, profile).is_rho_pne(sched.alpha)


def test_cyclic_scan_also_converges():
    game, start = spread_game(3)
    profile, trace, sched = solve(game, start, 0.03, scan="cyclic")
    check_trace(game, trace, sched)
    assert verify_approx_equilibrium(game, profile).is_rho_pne(sched.alpha)
    with pytest.raises(PreconditionError):
        solve(game, start, 0.03, scan="random")


def test_step_budget_abort(parallel_links):
    with pytest.raises(StepBudgetExceeded) as info:
        solve(parallel_links, Profile((0, 0)), 0.01, step_budget=0)
    assert info.value.trace.steps == 1


def test_solve_sampled():
    game = random_game(11, n=3, d=2)
    method = ShareMethod.sampled(SampleConfig(mu=0.1, batch_count=5, seed=7))
    gamma = gamma_for_fraction(bound_degree(game.d))
    p1, t1, sched = solve(game, Profile((0,) * game.n), gamma, method)
    p2, t2, _ = solve(game, Profile((0,) * game.n), gamma, method)
    assert p1 == p2 and t1.to_jsonl() == t2.to_jsonl()
    assert verify_approx_equilibrium(game, p1).is_rho_pne(sched.alpha)


def test_trace_serialization(parallel_links):
    _, trace, _ = solve(parallel_links, Profile((0, 0)), 0.01)
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == 1 and '"kind": "t"' in lines[0]
    csv_text = trace.summary_csv()
    assert csv_text.splitlines()[0] == "phase,steps,potential,social_cost,deviators,finished"
