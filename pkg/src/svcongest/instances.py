"""Seeded instance generation and the JSON game/profile file formats."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from svcongest.game import (
    CostPolynomial,
    Game,
    Player,
    PreconditionError,
    Profile,
    check_game,
    check_profile,
    game_from_dict,
    game_to_dict,
)


@dataclass(frozen=True)
class GeneratorParams:
    n: int = 3
    resources: int = 4
    strategies: int = 2
    strategy_size: tuple[int, int] = (1, 2)
    weight_range: tuple[float, float] = (1.0, 3.0)
    degree: int = 2
    coeff_range: tuple[float, float] = (0.0, 1.0)
    seed: int = 0

    def check(self) -> None:
        lo, hi = self.strategy_size
        if self.n < 1 or self.resources < 1 or self.strategies < 1:
            raise PreconditionError("n, resources and strategies must be >= 1")
        if not 1 <= lo <= hi <= self.resources:
            raise PreconditionError(f"strategy size range {self.strategy_size} is not within 1..{self.resources}")
        available = sum(math.comb(self.resources, k) for k in range(lo, hi + 1))
        if available < self.strategies:
            raise PreconditionError(f"only {available} distinct strategies exist, {self.strategies} requested")
        w_lo, w_hi = self.weight_range
        if not 0 < w_lo <= w_hi:
            raise PreconditionError("weight range must be positive and non-empty")
        c_lo, c_hi = self.coeff_range
        if not 0 <= c_lo <= c_hi or c_hi == 0:
            raise PreconditionError("coefficient range must be non-negative with a positive upper end")
        if self.degree < 0:
            raise PreconditionError("degree must be >= 0")


def _random_subset(rng, n_res, lo, hi):
    sizes = np.arange(lo, hi + 1)
    counts = np.array([math.comb(n_res, int(k)) for k in sizes], dtype=float)
    k = int(rng.choice(sizes, p=counts / counts.sum()))
    return tuple(sorted(int(e) for e in rng.choice(n_res, size=k, replace=False)))


def generate(params: GeneratorParams) -> Game:
    """Random game; identical params (seed included) give identical games.

    Each player's strategies are distinct subsets drawn uniformly from all
    subsets whose size lies in ``strategy_size``. The top coefficient of
    every cost polynomial is positive so every resource has exact degree
    ``degree``.
    """
    params.check()
    rng = np.random.default_rng(params.seed)
    lo, hi = params.strategy_size
    c_lo, c_hi = params.coeff_range
    resources = []
    for _ in range(params.resources):
        coeffs = rng.uniform(c_lo, c_hi, size=params.degree + 1)
        if coeffs[-1] <= 0:
            coeffs[-1] = c_hi
        resources.append(CostPolynomial(tuple(float(a) for a in coeffs)))
    players = []
    for i in range(params.n):
        weight = float(rng.uniform(*params.weight_range))
        chosen: list[tuple[int, ...]] = []
        while len(chosen) < params.strategies:
            s = _random_subset(rng, params.resources, lo, hi)
            if s not in chosen:
                chosen.append(s)
        players.append(Player(i, weight, tuple(chosen)))
    return check_game(Game(tuple(players), tuple(resources)))


def dumps_game(game: Game) -> str:
    return json.dumps(game_to_dict(game), indent=2) + "\n"


def write_game(game: Game, path) -> None:
    Path(path).write_text(dumps_game(game), encoding="utf-8")


def read_game(path) -> Game:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path}: not valid JSON ({exc})") from exc
    return check_game(game_from_dict(data))


def write_profile(profile: Profile, path) -> None:
    Path(path).write_text(json.dumps({"choice": list(profile.choice)}) + "\n", encoding="utf-8")


def read_profile(path, game: Game | None = None) -> Profile:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        profile = Profile(tuple(data["choice"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise PreconditionError(f"{path}: malformed profile ({exc})") from exc
    if game is not None:
        check_profile(game, profile)
    return profile
