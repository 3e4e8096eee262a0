"""The exact potential, its A-limited restriction and B-partial differences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from svcongest.game import Game, PreconditionError, Profile, check_profile, users_by_resource
from svcongest.sharing import shapley_exact


@dataclass(frozen=True)
class PotentialValue:
    total: float
    per_resource: tuple[float, ...]
    ordering: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"total": self.total, "per_resource": list(self.per_resource)}


def _check_ordering(game: Game, ordering):
    if ordering is None:
        return tuple(range(game.n))
    ordering = tuple(int(i) for i in ordering)
    if sorted(ordering) != list(range(game.n)):
        raise PreconditionError(f"ordering {ordering} is not a permutation of the players")
    return ordering


def _resource_term(game: Game, e: int, users: Sequence[int], rank: dict[int, int]) -> float:
    poly = game.resources[e]
    w = game.weights
    ordered = sorted(users, key=rank.__getitem__)
    terms = []
    for pos, i in enumerate(ordered):
        prefix = [(j, w[j]) for j in ordered[: pos + 1]]
        terms.append(shapley_exact(poly, prefix, i))
    return math.fsum(terms)


def limited_potential(
    game: Game,
    profile: Profile,
    players: Iterable[int] | None = None,
    ordering: Sequence[int] | None = None,
) -> PotentialValue:
    """Potential of the subgame in which only ``players`` participate.

    Each user of a resource pays her exact Shapley share among the users
    preceding her (inclusive) in ``ordering``; ``players=None`` means all.
    """
    check_profile(game, profile)
    ordering = _check_ordering(game, ordering)
    restriction = None if players is None else frozenset(players)
    if restriction is not None and not restriction <= set(range(game.n)):
        raise PreconditionError("restriction contains unknown players")
    rank = {p: k for k, p in enumerate(ordering)}
    users = users_by_resource(game, profile, restriction)
    per_resource = tuple(
        _resource_term(game, e, s, rank) if s else 0.0 for e, s in enumerate(users)
    )
    return PotentialValue(math.fsum(per_resource), per_resource, ordering)


def potential(game: Game, profile: Profile, ordering: Sequence[int] | None = None) -> PotentialValue:
    return limited_potential(game, profile, None, ordering)


def partial_potential(
    game: Game,
    profile: Profile,
    players: Iterable[int] | None,
    subset: Iterable[int],
    ordering: Sequence[int] | None = None,
) -> float:
    """Contribution of ``subset`` to the potential limited to ``players``.

    Computed literally as the difference of two limited potentials.
    """
    a = set(range(game.n)) if players is None else set(players)
    b = set(subset)
    if not b <= a:
        raise PreconditionError("subset must be contained in the participating players")
    return (
        limited_potential(game, profile, a, ordering).total
        - limited_potential(game, profile, a - b, ordering).total
    )
