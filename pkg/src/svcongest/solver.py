"""Phased improvement dynamics computing approximate pure Nash equilibria.

Players are bucketed by cost into geometric blocks ``b_r = X_max * g**-r``.
In phase ``r`` players costing at least ``b_r`` make s-moves (coarse
improvements), players in ``[b_{r+1}, b_r)`` make t-moves (near exact
improvements), and afterwards everyone costing at least ``b_r`` is frozen.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field

from svcongest.bounds import BoundDomainError, bound_degree, max_admissible_gamma, theta_of
from svcongest.game import EPS_NUM, Game, PreconditionError, Profile, check_game, check_profile, social_cost
from svcongest.potentials import potential
from svcongest.sharing import (
    EXACT_SIZE_CAP,
    SHAPLEY_EXACT,
    ExactSizeExceeded,
    ShareMethod,
    deviation_cost,
    player_cost,
    player_costs,
    resolve_sample_config,
)

log = logging.getLogger(__name__)

SCAN_POLICIES = ("restart", "cyclic")


class StepBudgetExceeded(RuntimeError):
    """More moves than the proven bound allows; indicates a bug."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class ScheduleParams:
    gamma: float
    d: int
    t: float
    theta: float
    s: float
    g: float
    x_max: float
    x_min: float
    m: int
    blocks: tuple[float, ...]
    alpha: float
    step_budget: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["blocks"] = list(self.blocks)
        return out


@dataclass(frozen=True)
class MoveRecord:
    step: int
    phase: int
    player: int
    kind: str
    from_strategy: int
    to_strategy: int
    cost_before: float
    cost_after: float
    potential_after: float | None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PhaseSummary:
    phase: int
    steps: int
    deviators: list[int]
    finished: list[int]
    potential: float | None
    social_cost: float


@dataclass
class SolveTrace:
    moves: list[MoveRecord] = field(default_factory=list)
    phases: list[PhaseSummary] = field(default_factory=list)
    initial_profile: Profile | None = None
    final_profile: Profile | None = None
    initial_potential: float | None = None

    @property
    def steps(self) -> int:
        return len(self.moves)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(m.to_dict(), sort_keys=True) + "\n" for m in self.moves)

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["phase", "steps", "potential", "social_cost", "deviators", "finished"])
        for p in self.phases:
            writer.writerow([
                p.phase,
                p.steps,
                "" if p.potential is None else repr(p.potential),
                repr(p.social_cost),
                " ".join(map(str, p.deviators)),
                " ".join(map(str, p.finished)),
            ])
        return buf.getvalue()


def block_ratio(n: int, d: int, gamma: float) -> float:
    """g = 2 n (d+1) gamma^-3, the ratio between consecutive block borders."""
    return 2 * n * (d + 1) * gamma**-3


def step_bound(n: int, d: int, gamma: float, m: int) -> float:
    return (1 + m) * 2 * n**2 * (d + 1) * gamma**-9


def solitary_min_cost(game: Game) -> float:
    """Least cost any player can reach when she is alone in the game."""
    best = math.inf
    for p in game.players:
        for s in p.strategies:
            best = min(best, math.fsum(game.resources[e].joint(p.weight) for e in s))
    return best


def _exact_feasible(game: Game, profile: Profile) -> bool:
    loads = [0] * len(game.resources)
    for i, c in enumerate(profile.choice):
        for e in game.players[i].strategies[c]:
            loads[e] += 1
    return max(loads) <= EXACT_SIZE_CAP


def compute_schedule(game: Game, profile: Profile, gamma: float, method: ShareMethod = SHAPLEY_EXACT) -> ScheduleParams:
    check_game(game)
    check_profile(game, profile)
    d = bound_degree(game.d)
    if gamma <= 0:
        raise PreconditionError("gamma must be positive")
    try:
        theta = theta_of(gamma, d)
    except BoundDomainError:
        theta = math.inf
    if not gamma < 1 / (2 * theta):
        raise PreconditionError(
            f"gamma violates stretch constraint (gamma={gamma}); "
            f"maximal admissible gamma for d={d} is {max_admissible_gamma(d):.9g}"
        )
    t = 1 + gamma
    s = 1 / (1 / theta - 2 * gamma)
    g = block_ratio(game.n, d, gamma)
    cost_method = SHAPLEY_EXACT if _exact_feasible(game, profile) else method
    x_max = max(player_costs(game, profile, cost_method))
    x_min = solitary_min_cost(game)
    ratio = x_max / x_min
    m = 1
    if ratio > 1:
        m = max(1, math.ceil(math.log(ratio) / math.log(g)))
        while x_max * g**-m > x_min:
            m += 1
    blocks = tuple(x_max * g**-r for r in range(m + 1))
    alpha = (1 + gamma**2) / (1 - gamma) * s
    return ScheduleParams(
        gamma=gamma,
        d=d,
        t=t,
        theta=theta,
        s=s,
        g=g,
        x_max=x_max,
        x_min=x_min,
        m=m,
        blocks=blocks,
        alpha=alpha,
        step_budget=step_bound(game.n, d, gamma, m),
    )


def best_response(game: Game, profile: Profile, player: int, method: ShareMethod = SHAPLEY_EXACT) -> tuple[int, float]:
    """Cheapest strategy of ``player`` against the others; lowest index wins ties."""
    best = None
    best_cost = math.inf
    for k in range(len(game.players[player].strategies)):
        c = deviation_cost(game, profile, player, k, method)
        if c < best_cost:
            best, best_cost = k, c
    return best, best_cost


def can_rho_move(
    game: Game,
    profile: Profile,
    player: int,
    rho: float,
    method: ShareMethod = SHAPLEY_EXACT,
    current: float | None = None,
) -> tuple[int, float] | None:
    """Best-response deviation if it improves the player's cost by more than ``rho``."""
    if rho < 1:
        raise PreconditionError("rho must be >= 1")
    if current is None:
        current = player_cost(game, profile, player, method)
    k, cost = best_response(game, profile, player, method)
    if current > rho * (1 + EPS_NUM) * cost:
        return k, (current / cost if cost > 0 else math.inf)
    return None


def solve(
    game: Game,
    initial: Profile,
    gamma: float,
    method: ShareMethod = SHAPLEY_EXACT,
    scan: str = "restart",
    step_budget: float | None = None,
) -> tuple[Profile, SolveTrace, ScheduleParams]:
    """Run the phased dynamics from ``initial``.

    ``scan="restart"`` looks for a mover in ascending id order, restarting
    from player 0 after every executed move; ``"cyclic"`` continues after
    the last mover. Costs are recomputed from the current profile on every
    scan.
    """
    if scan not in SCAN_POLICIES:
        raise PreconditionError(f"unknown scan policy {scan!r}")
    sched = compute_schedule(game, initial, gamma, method)
    if method.kind == "shapley-sampled" and method.sample.batch_count is None:
        method = ShareMethod.sampled(
            resolve_sample_config(method.sample, game, gamma, sched.x_max / sched.x_min)
        )
    budget = sched.step_budget if step_budget is None else step_budget
    b = sched.blocks
    n = game.n

    profile = initial
    trace = SolveTrace(initial_profile=initial)
    trace.initial_potential = _exact_potential(game, profile)
    finished: set[int] = set()
    last = -1

    def find_mover(classify):
        start = 0 if scan == "restart" else last + 1
        for off in range(n):
            i = (start + off) % n
            if i in finished:
                continue
            x = player_cost(game, profile, i, method)
            kind = classify(x)
            if kind is None:
                continue
            rho = sched.s if kind == "s" else sched.t
            mv = can_rho_move(game, profile, i, rho, method, current=x)
            if mv is not None:
                return i, kind, x, mv[0]
        return None

    def run_phase(phase, classify):
        nonlocal profile, last
        deviators = []
        start_steps = trace.steps
        while True:
            found = find_mover(classify)
            if found is None:
                break
            i, kind, before, k = found
            src = profile.choice[i]
            profile = profile.with_choice(i, k)
            after = player_cost(game, profile, i, method)
            trace.moves.append(
                MoveRecord(
                    step=trace.steps + 1,
                    phase=phase,
                    player=i,
                    kind=kind,
                    from_strategy=src,
                    to_strategy=k,
                    cost_before=before,
                    cost_after=after,
                    potential_after=_exact_potential(game, profile),
                )
            )
            last = i
            if i not in deviators:
                deviators.append(i)
            if trace.steps > budget:
                trace.final_profile = profile
                raise StepBudgetExceeded(
                    f"step budget {budget:.6g} exceeded in phase {phase}", trace
                )
        return deviators, trace.steps - start_steps

    def initial_class(x):
        return "t" if x >= b[1] else None

    deviators, steps = run_phase(0, initial_class)
    trace.phases.append(_summary(game, profile, 0, steps, deviators, finished))

    for r in range(1, sched.m):
        def phase_class(x, r=r):
            if x >= b[r]:
                return "s"
            if b[r + 1] <= x < b[r]:
                return "t"
            return None

        deviators, steps = run_phase(r, phase_class)
        costs = player_costs(game, profile, method)
        finished |= {i for i in range(n) if costs[i] >= b[r]}
        trace.phases.append(_summary(game, profile, r, steps, deviators, finished))
        log.debug("phase %d: %d moves, %d finished", r, steps, len(finished))

    trace.final_profile = profile
    return profile, trace, sched


def _exact_potential(game, profile):
    try:
        return potential(game, profile).total
    except ExactSizeExceeded:
        return None


def _summary(game, profile, phase, steps, deviators, finished):
    return PhaseSummary(
        phase=phase,
        steps=steps,
        deviators=sorted(deviators),
        finished=sorted(finished),
        potential=_exact_potential(game, profile),
        social_cost=social_cost(game, profile),
    )
