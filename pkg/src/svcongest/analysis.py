"""Equilibrium verification, brute-force optima and measured PoA/stretch."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from svcongest.bounds import bound_degree
from svcongest.game import EPS_NUM, Game, PreconditionError, Profile, check_profile, social_cost, users_by_resource
from svcongest.potentials import potential
from svcongest.sharing import PROPORTIONAL, SHAPLEY_EXACT, ShareMethod, deviation_cost, player_costs, resource_share

DEVIATION_CAP = 100_000
ENUMERATION_CAP = 1_000_000


class EnumerationCapExceeded(RuntimeError):
    """Refusal: the requested enumeration is larger than the configured cap."""


@dataclass
class EquilibriumReport:
    profile: Profile
    worst_ratio: float
    witness: tuple[int, int] | None
    costs: list[float]
    verdicts: dict[float, bool] = field(default_factory=dict)

    def is_rho_pne(self, rho: float) -> bool:
        return self.worst_ratio <= rho * (1 + EPS_NUM)

    def to_dict(self) -> dict:
        return {
            "profile": list(self.profile.choice),
            "worst_ratio": self.worst_ratio,
            "witness": None if self.witness is None else list(self.witness),
            "costs": self.costs,
            "verdicts": {repr(k): v for k, v in self.verdicts.items()},
        }


def verify_approx_equilibrium(
    game: Game,
    profile: Profile,
    method: ShareMethod = SHAPLEY_EXACT,
    rhos: Iterable[float] = (),
    players: Iterable[int] | None = None,
    deviation_cap: int = DEVIATION_CAP,
) -> EquilibriumReport:
    """Worst ratio X_i(P) / X_i(P_-i, P'_i) over all unilateral deviations.

    The player's current strategy counts as a deviation of ratio 1, so a
    profile whose players have a single strategy reports exactly 1.
    ``players`` limits the check to a subset of movers.
    """
    check_profile(game, profile)
    total = sum(len(p.strategies) for p in game.players)
    if total > deviation_cap:
        raise EnumerationCapExceeded(f"{total} deviations exceed cap {deviation_cap}")
    costs = player_costs(game, profile, method)
    movers = range(game.n) if players is None else sorted(set(players))
    worst, witness = 1.0, None
    for i in movers:
        for k in range(len(game.players[i].strategies)):
            if k == profile.choice[i]:
                continue
            alt = deviation_cost(game, profile, i, k, method)
            ratio = costs[i] / alt if alt > 0 else math.inf
            if ratio > worst:
                worst, witness = ratio, (i, k)
    report = EquilibriumReport(profile, worst, witness, costs)
    report.verdicts = {float(r): report.is_rho_pne(r) for r in rhos}
    return report


def all_profiles(game: Game, cap: int = ENUMERATION_CAP, fixed: dict[int, int] | None = None):
    """Every profile in lexicographic order of the choice vector."""
    fixed = fixed or {}
    ranges = [
        [fixed[i]] if i in fixed else range(len(p.strategies)) for i, p in enumerate(game.players)
    ]
    count = math.prod(len(r) for r in ranges)
    if count > cap:
        raise EnumerationCapExceeded(f"{count} profiles exceed enumeration cap {cap}")
    return (Profile(c) for c in itertools.product(*ranges))


def brute_force_min(game: Game, objective: str = "social_cost", cap: int = ENUMERATION_CAP) -> tuple[Profile, float]:
    if objective in ("sc", "social_cost"):
        f = lambda p: social_cost(game, p)
    elif objective == "potential":
        f = lambda p: potential(game, p).total
    else:
        raise PreconditionError(f"unknown objective {objective!r}")
    best, best_val = None, math.inf
    for p in all_profiles(game, cap):
        v = f(p)
        if v < best_val:
            best, best_val = p, v
    return best, best_val


@dataclass
class Measurement:
    """A measured worst-case ratio; ``value is None`` when no equilibrium qualifies."""

    value: float | None
    witness: Profile | None
    equilibria: int
    profiles: int

    @property
    def empty(self) -> bool:
        return self.value is None

    def to_dict(self) -> dict:
        return {
            "value": "empty" if self.value is None else self.value,
            "witness": None if self.witness is None else list(self.witness.choice),
            "equilibria": self.equilibria,
            "profiles": self.profiles,
        }


@dataclass
class ProfileRow:
    profile: Profile
    social_cost: float
    potential: float | None
    worst_ratio: float


def profile_table(
    game: Game,
    method: ShareMethod = SHAPLEY_EXACT,
    with_potential: bool = True,
    movers: Iterable[int] | None = None,
    fixed: dict[int, int] | None = None,
    cap: int = ENUMERATION_CAP,
) -> list[ProfileRow]:
    """Social cost, potential and worst deviation ratio of every profile."""
    rows = []
    for p in all_profiles(game, cap, fixed):
        rep = verify_approx_equilibrium(game, p, method, players=movers)
        rows.append(
            ProfileRow(
                p,
                social_cost(game, p),
                potential(game, p).total if with_potential else None,
                rep.worst_ratio,
            )
        )
    return rows


def _worst(rows, rho, key, baseline):
    best, witness, count = None, None, 0
    for row in rows:
        if row.worst_ratio <= rho * (1 + EPS_NUM):
            count += 1
            v = key(row) / baseline
            if best is None or v > best:
                best, witness = v, row.profile
    return Measurement(best, witness, count, len(rows))


def measured_poa(
    game: Game,
    rho: float,
    method: ShareMethod = SHAPLEY_EXACT,
    table: list[ProfileRow] | None = None,
    cap: int = ENUMERATION_CAP,
) -> Measurement:
    """max SC(P)/SC(P*) over the rho-PNE found by full enumeration."""
    rows = table if table is not None else profile_table(game, method, with_potential=False, cap=cap)
    opt = min(r.social_cost for r in rows)
    return _worst(rows, rho, lambda r: r.social_cost, opt)


def measured_stretch(
    game: Game,
    rho: float,
    restriction: Iterable[int] | None = None,
    base: Profile | None = None,
    table: list[ProfileRow] | None = None,
    cap: int = ENUMERATION_CAP,
) -> Measurement:
    """max Phi(P)/Phi(P_hat) over rho-PNE.

    With a ``restriction`` D only players in D move (and must be in
    equilibrium); everyone else keeps the strategy from ``base``.
    """
    if restriction is None:
        rows = table if table is not None else profile_table(game, cap=cap)
    else:
        d_set = sorted(set(restriction))
        if base is None:
            raise PreconditionError("a limited stretch needs a base profile for the fixed players")
        check_profile(game, base)
        fixed = {i: c for i, c in enumerate(base.choice) if i not in d_set}
        rows = table if table is not None else profile_table(game, movers=d_set, fixed=fixed, cap=cap)
    low = min(r.potential for r in rows)
    return _worst(rows, rho, lambda r: r.potential, low)


@dataclass
class CertificateReport:
    d: int
    pairs: int = 0
    sandwich_violations: int = 0
    min_prop_over_shapley: float = math.inf
    max_prop_over_shapley: float = 0.0
    transfer_checks: int = 0
    transfer_violations: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.sandwich_violations == 0 and self.transfer_violations == 0

    def to_dict(self) -> dict:
        return dict(self.__dict__, ok=self.ok)


def sandwich_factors(d: int) -> tuple[float, float]:
    """(lower, upper) with lower * shapley <= proportional <= upper * shapley."""
    return 2 / (d + 1), (d + 3) / 4


def transfer_factor(d: int) -> float:
    """Loss when a Shapley equilibrium is read under proportional sharing."""
    return (d + 3) * (d + 1) / 8


def shapley_prop_certificates(game: Game, profiles: Sequence[Profile], d: int | None = None) -> CertificateReport:
    """Check the Shapley/proportional sandwich and the equilibrium transfer.

    ``d`` defaults to the game's bound degree (at least 1). For every
    profile P with Shapley worst ratio rho (at least 1), P must be a
    transfer_factor(d) * rho equilibrium under proportional sharing.
    """
    d = bound_degree(game.d) if d is None else d
    lo, hi = sandwich_factors(d)
    rep = CertificateReport(d)
    for p in profiles:
        users = users_by_resource(game, p)
        for e, s in enumerate(users):
            for i in s:
                sv = resource_share(game, e, s, i, SHAPLEY_EXACT)
                pr = resource_share(game, e, s, i, PROPORTIONAL)
                rep.pairs += 1
                ratio = pr / sv
                rep.min_prop_over_shapley = min(rep.min_prop_over_shapley, ratio)
                rep.max_prop_over_shapley = max(rep.max_prop_over_shapley, ratio)
                if lo * sv > pr * (1 + EPS_NUM) or pr > hi * sv * (1 + EPS_NUM):
                    rep.sandwich_violations += 1
                    rep.failures.append(f"sandwich: profile {p.choice} player {i} resource {e}")
        rho = max(1.0, verify_approx_equilibrium(game, p, SHAPLEY_EXACT).worst_ratio)
        prop_ratio = verify_approx_equilibrium(game, p, PROPORTIONAL).worst_ratio
        rep.transfer_checks += 1
        if prop_ratio > transfer_factor(d) * rho * (1 + EPS_NUM):
            rep.transfer_violations += 1
            rep.failures.append(f"transfer: profile {p.choice} ratio {prop_ratio} vs rho {rho}")
    return rep
