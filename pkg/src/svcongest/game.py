"""Game description, profiles, loads and joint costs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

# Relative tolerance for floating point equality assertions.
EPS_NUM = 1e-9
# Largest polynomial degree accepted by validation.
D_MAX = 16


class PreconditionError(ValueError):
    """An operation was called with inputs violating its contract."""


@dataclass(frozen=True)
class CostPolynomial:
    """Per-unit cost c(x) = sum_k coefficients[k] * x**k."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(a) for a in self.coefficients))

    @property
    def degree(self) -> int:
        for k in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[k] != 0.0:
                return k
        return 0

    def __call__(self, x: float) -> float:
        acc = 0.0
        for a in reversed(self.coefficients):
            acc = acc * x + a
        return acc

    def joint(self, x: float) -> float:
        """C(x) = x * c(x), the total cost of the resource at load x."""
        return x * self(x)


@dataclass(frozen=True)
class Player:
    id: int
    weight: float
    strategies: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        strategies = tuple(tuple(sorted(s)) for s in self.strategies)
        object.__setattr__(self, "strategies", strategies)
        object.__setattr__(self, "weight", float(self.weight))


@dataclass(frozen=True)
class Game:
    players: tuple[Player, ...]
    resources: tuple[CostPolynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "resources", tuple(self.resources))

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def d(self) -> int:
        return max((c.degree for c in self.resources), default=0)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(p.weight for p in self.players)

    def strategy(self, player: int, index: int) -> tuple[int, ...]:
        return self.players[player].strategies[index]

    def profile_count(self) -> int:
        return math.prod(len(p.strategies) for p in self.players)


@dataclass(frozen=True)
class Profile:
    """One strategy index per player."""

    choice: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "choice", tuple(int(c) for c in self.choice))

    def with_choice(self, player: int, index: int) -> "Profile":
        choice = list(self.choice)
        choice[player] = index
        return Profile(tuple(choice))

    def __len__(self):
        return len(self.choice)


@dataclass(frozen=True)
class LoadView:
    users: tuple[tuple[int, ...], ...]
    loads: tuple[float, ...]
    restricted_users: tuple[tuple[int, ...], ...] | None = None
    restricted_loads: tuple[float, ...] | None = None
    restriction: frozenset[int] | None = field(default=None)


def validate_game(game: Game, d_max: int = D_MAX) -> list[str]:
    """Return every invariant violation of ``game``; an empty list means valid."""
    problems = []
    if not game.players:
        problems.append("game must have at least one player")
    if not game.resources:
        problems.append("game must have at least one resource")
    for e, poly in enumerate(game.resources):
        coeffs = poly.coefficients
        if not coeffs:
            problems.append(f"resource {e}: empty coefficient list")
            continue
        if any(not math.isfinite(a) for a in coeffs):
            problems.append(f"resource {e}: coefficients must be finite")
        if any(a < 0 for a in coeffs):
            problems.append(f"resource {e}: coefficients must be non-negative")
        if all(a == 0 for a in coeffs):
            problems.append(f"resource {e}: cost function is identically zero")
        if poly.degree > d_max:
            problems.append(f"resource {e}: degree {poly.degree} exceeds d_max={d_max}")
    n_res = len(game.resources)
    for idx, p in enumerate(game.players):
        if p.id != idx:
            problems.append(f"player {idx}: id {p.id} is not its dense index")
        if not (p.weight > 0) or not math.isfinite(p.weight):
            problems.append(f"player {idx}: weight must be positive")
        if not p.strategies:
            problems.append(f"player {idx}: strategy set is empty")
        seen = set()
        for k, s in enumerate(p.strategies):
            if not s:
                problems.append(f"player {idx}: strategy {k} is empty")
            if len(set(s)) != len(s):
                problems.append(f"player {idx}: strategy {k} repeats a resource")
            for e in s:
                if not 0 <= e < n_res:
                    problems.append(f"player {idx}: strategy {k} uses unknown resource {e}")
            if s in seen:
                problems.append(f"player {idx}: strategy {k} duplicates another strategy")
            seen.add(s)
    return problems


def check_game(game: Game) -> Game:
    problems = validate_game(game)
    if problems:
        raise PreconditionError("invalid game: " + "; ".join(problems))
    return game


def check_profile(game: Game, profile: Profile) -> None:
    if len(profile.choice) != game.n:
        raise PreconditionError(
            f"profile has {len(profile.choice)} entries for {game.n} players"
        )
    for i, c in enumerate(profile.choice):
        if not 0 <= c < len(game.players[i].strategies):
            raise PreconditionError(f"player {i}: strategy index {c} out of range")


def users_by_resource(game: Game, profile: Profile, restriction=None) -> list[list[int]]:
    """S_e(P) for every resource, each list in ascending player id."""
    users: list[list[int]] = [[] for _ in game.resources]
    for i, c in enumerate(profile.choice):
        if restriction is not None and i not in restriction:
            continue
        for e in game.players[i].strategies[c]:
            users[e].append(i)
    return users


def load_view(game: Game, profile: Profile, restriction: Iterable[int] | None = None) -> LoadView:
    check_profile(game, profile)
    w = game.weights
    users = users_by_resource(game, profile)
    loads = tuple(math.fsum(w[i] for i in s) for s in users)
    if restriction is None:
        return LoadView(tuple(map(tuple, users)), loads)
    restriction = frozenset(restriction)
    r_users = tuple(tuple(i for i in s if i in restriction) for s in users)
    r_loads = tuple(math.fsum(w[i] for i in s) for s in r_users)
    return LoadView(tuple(map(tuple, users)), loads, r_users, r_loads, restriction)


def joint_cost(poly: CostPolynomial, load: float) -> float:
    if load < 0:
        raise PreconditionError(f"load must be non-negative, got {load}")
    return poly.joint(load)


def social_cost(game: Game, profile: Profile, restriction: Iterable[int] | None = None) -> float:
    """SC(P) = sum_e C_e(f_e(P)); with a restriction A, the sum of exact Shapley costs over A."""
    if restriction is None:
        view = load_view(game, profile)
        return math.fsum(
            poly.joint(f) for poly, f in zip(game.resources, view.loads) if f > 0
        )
    from svcongest.sharing import SHAPLEY_EXACT, player_cost

    check_profile(game, profile)
    return math.fsum(
        player_cost(game, profile, i, SHAPLEY_EXACT) for i in sorted(set(restriction))
    )


def game_from_dict(data: dict) -> Game:
    try:
        resources = sorted(data["resources"], key=lambda r: r["id"])
        players = sorted(data["players"], key=lambda p: p["id"])
        for k, r in enumerate(resources):
            if r["id"] != k:
                raise PreconditionError("resource ids must be dense 0-based indices")
        for k, p in enumerate(players):
            if p["id"] != k:
                raise PreconditionError("player ids must be dense 0-based indices")
        return Game(
            players=tuple(
                Player(p["id"], p["weight"], tuple(tuple(s) for s in p["strategies"]))
                for p in players
            ),
            resources=tuple(CostPolynomial(tuple(r["coeffs"])) for r in resources),
        )
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed game description: {exc!r}") from exc


def game_to_dict(game: Game) -> dict:
    return {
        "resources": [
            {"id": e, "coeffs": list(poly.coefficients)} for e, poly in enumerate(game.resources)
        ],
        "players": [
            {"id": p.id, "weight": p.weight, "strategies": [list(s) for s in p.strategies]}
            for p in game.players
        ],
    }


def make_game(weights: Sequence[float], strategies, coeffs) -> Game:
    """Shorthand constructor used by tests and generators."""
    return Game(
        players=tuple(
            Player(i, w, tuple(tuple(s) for s in strategies[i])) for i, w in enumerate(weights)
        ),
        resources=tuple(CostPolynomial(tuple(c)) for c in coeffs),
    )
