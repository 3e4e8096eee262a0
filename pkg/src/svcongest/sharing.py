"""Cost shares: exact Shapley, sampled Shapley and proportional sharing."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from svcongest import kernels
from svcongest._fallback import _joint as _fallback_joint
from svcongest.game import (
    EPS_NUM,
    CostPolynomial,
    Game,
    PreconditionError,
    Profile,
    check_profile,
    users_by_resource,
)

# Largest user set priced by exact subset enumeration (2**(n-1) terms).
EXACT_SIZE_CAP = 20


class ExactSizeExceeded(PreconditionError):
    """Too many users on a resource for exact Shapley; switch to sampling."""


@dataclass(frozen=True)
class SampleConfig:
    """Settings of the median-of-batches Shapley sampler.

    ``batch_count=None`` means "derive from the game" (see
    :func:`default_batch_count`); it must be odd once resolved.
    """

    mu: float = 0.1
    batch_count: int | None = None
    seed: int = 0
    failure_exponent: float = 1.0

    def __post_init__(self):
        if not 0 < self.mu <= 1:
            raise PreconditionError(f"mu must lie in (0, 1], got {self.mu}")
        if self.batch_count is not None and (self.batch_count < 1 or self.batch_count % 2 == 0):
            raise PreconditionError(f"batch_count must be a positive odd integer, got {self.batch_count}")
        if self.failure_exponent < 1:
            raise PreconditionError("failure_exponent must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise PreconditionError("seed must be a 64-bit unsigned integer")

    def samples_per_batch(self, n_users: int) -> int:
        return max(1, math.ceil(4 * (n_users - 1) / self.mu**2))


@dataclass(frozen=True)
class ShareMethod:
    kind: str
    sample: SampleConfig | None = None

    KINDS = ("shapley-exact", "shapley-sampled", "proportional")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise PreconditionError(f"unknown share method {self.kind!r}")
        if (self.kind == "shapley-sampled") != (self.sample is not None):
            raise PreconditionError("only the sampled method carries a SampleConfig")

    @classmethod
    def sampled(cls, config: SampleConfig) -> "ShareMethod":
        return cls("shapley-sampled", config)

    @property
    def is_shapley(self) -> bool:
        return self.kind != "proportional"


SHAPLEY_EXACT = ShareMethod("shapley-exact")
PROPORTIONAL = ShareMethod("proportional")


@dataclass(frozen=True)
class SampledEstimate:
    estimate: float
    batch_means: tuple[float, ...]
    samples_per_batch: int


@dataclass
class ShareReport:
    method: str
    shares: dict[tuple[int, int], float]
    residuals: dict[int, float]
    batch_means: dict[tuple[int, int], tuple[float, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        rows = []
        for (i, e), v in sorted(self.shares.items()):
            row = {"player": i, "resource": e, "share": v}
            if (i, e) in self.batch_means:
                row["batch_means"] = list(self.batch_means[(i, e)])
            rows.append(row)
        return {
            "method": self.method,
            "shares": rows,
            "residuals": [{"resource": e, "residual": r} for e, r in sorted(self.residuals.items())],
        }


def marginal_contribution(poly: CostPolynomial, prefix_weight: float, w_i: float) -> float:
    if prefix_weight < 0 or w_i <= 0:
        raise PreconditionError("prefix weight must be >= 0 and player weight > 0")
    return poly.joint(prefix_weight + w_i) - poly.joint(prefix_weight)


@lru_cache(maxsize=1 << 18)
def _shapley_cached(coeffs: tuple[float, ...], weight: float, others: tuple[float, ...]) -> float:
    return kernels.shapley_target(
        np.asarray(coeffs, dtype=np.float64), np.asarray(others, dtype=np.float64), weight
    )


def _split_target(users, target):
    others = []
    weight = None
    for uid, w in users:
        if uid == target and weight is None:
            weight = float(w)
        else:
            others.append(float(w))
    if weight is None:
        raise PreconditionError(f"target {target} is not among the users")
    return weight, others


def shapley_exact(
    poly: CostPolynomial,
    users: Sequence[tuple[int, float]],
    target: int,
    size_cap: int = EXACT_SIZE_CAP,
) -> float:
    """Exact Shapley share of ``target`` among ``users`` (pairs of id, weight)."""
    weight, others = _split_target(users, target)
    if len(others) + 1 > size_cap:
        raise ExactSizeExceeded(
            f"exact size exceeded: {len(others) + 1} users > cap {size_cap}"
        )
    # The share depends only on the multiset of other weights.
    return _shapley_cached(poly.coefficients, weight, tuple(sorted(others)))


def shapley_by_permutations(poly: CostPolynomial, users, target) -> float:
    """Reference value: average marginal cost over all |S|! arrival orders."""
    weight, _ = _split_target(users, target)
    ids = [u for u, _ in users]
    w = np.array([wt for _, wt in users], dtype=np.float64)
    pos = ids.index(target)
    perms = np.array(list(itertools.permutations(range(len(ids)))), dtype=np.intp)
    # prefix weight = weight of everyone placed before the target in each order
    before = np.cumsum(w[perms], axis=1) - w[perms]
    prefix = before[perms == pos]
    c = np.asarray(poly.coefficients, dtype=np.float64)
    return float(np.mean(_fallback_joint(c, prefix + weight) - _fallback_joint(c, prefix)))


def batch_rng(seed: int, player: int, resource: int, batch: int) -> np.random.Generator:
    """Independent counter-based stream for one (player, resource, batch) cell."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, player, resource, batch])))


def shapley_sampled(
    poly: CostPolynomial,
    users: Sequence[tuple[int, float]],
    target: int,
    config: SampleConfig,
    resource: int = 0,
    first_batch: int = 0,
) -> SampledEstimate:
    """Median over batches of the mean marginal cost of ``target`` on random orders."""
    users = sorted(((int(u), float(w)) for u, w in users))
    weight, others = _split_target(users, target)
    if not others:
        return SampledEstimate(poly.joint(weight), (), 0)
    if config.batch_count is None:
        raise PreconditionError("sample config has no batch count; resolve it first")
    return _sampled_cached(poly.coefficients, tuple(users), target, config, resource, first_batch)


@lru_cache(maxsize=1 << 16)
def _sampled_cached(coeffs, users, target, config, resource, first_batch):
    weights = np.array([w for _, w in users], dtype=np.float64)
    pos = [u for u, _ in users].index(target)
    k = config.samples_per_batch(len(users))
    c = np.asarray(coeffs, dtype=np.float64)
    means = []
    for b in range(first_batch, first_batch + config.batch_count):
        keys = batch_rng(config.seed, target, resource, b).random((k, len(users)))
        means.append(kernels.marginal_means(c, weights, pos, keys))
    return SampledEstimate(float(np.median(means)), tuple(means), k)


def default_batch_count(
    n: int,
    max_strategies: int,
    n_resources: int,
    cost_ratio: float,
    d: int,
    gamma: float,
    failure_exponent: float = 1.0,
) -> int:
    """Number of batches amplifying a single batch's 3/4 success probability.

    ceil(log2(2 n^(c+3) max|P_i| |E| (1 + log_g(ratio)) (d+1) gamma^-9)),
    bumped to the next odd integer.
    """
    g = 2 * n * (d + 1) * gamma**-3
    phases = 1 + (math.log(cost_ratio) / math.log(g) if cost_ratio > 1 and g > 1 else 0.0)
    log2_arg = (
        1
        + (failure_exponent + 3) * math.log2(n)
        + math.log2(max_strategies)
        + math.log2(n_resources)
        + math.log2(phases)
        + math.log2(d + 1)
        - 9 * math.log2(gamma)
    )
    r = max(1, math.ceil(log2_arg))
    return r if r % 2 else r + 1


def resolve_sample_config(config: SampleConfig, game: Game, gamma: float, cost_ratio: float = 1.0) -> SampleConfig:
    if config.batch_count is not None:
        return config
    r = default_batch_count(
        game.n,
        max(len(p.strategies) for p in game.players),
        len(game.resources),
        cost_ratio,
        game.d,
        gamma,
        config.failure_exponent,
    )
    return replace(config, batch_count=r)


def proportional_share(poly: CostPolynomial, load: float, w_i: float) -> float:
    if w_i <= 0:
        raise PreconditionError("player weight must be positive")
    if load < w_i * (1 - EPS_NUM):
        raise PreconditionError(f"load {load} is below the player's weight {w_i}")
    return w_i * poly(load)


def resource_share(game: Game, e: int, users: Sequence[int], player: int, method: ShareMethod) -> float:
    """Share of ``player`` on resource ``e`` used by ``users`` (player included)."""
    poly = game.resources[e]
    w = game.weights
    if method.kind == "proportional":
        return proportional_share(poly, math.fsum(w[j] for j in users), w[player])
    pairs = [(j, w[j]) for j in users]
    if method.kind == "shapley-exact":
        return shapley_exact(poly, pairs, player)
    config = method.sample
    if config.batch_count is None:
        config = resolve_sample_config(config, game, config.mu)
    return shapley_sampled(poly, pairs, player, config, resource=e).estimate


def player_cost(game: Game, profile: Profile, player: int, method: ShareMethod = SHAPLEY_EXACT) -> float:
    """X_i(P): the player's summed shares over her chosen resources."""
    check_profile(game, profile)
    strategy = game.players[player].strategies[profile.choice[player]]
    users = users_by_resource(game, profile)
    return math.fsum(resource_share(game, e, users[e], player, method) for e in strategy)


def player_costs(game: Game, profile: Profile, method: ShareMethod = SHAPLEY_EXACT) -> list[float]:
    check_profile(game, profile)
    users = users_by_resource(game, profile)
    out = []
    for i, c in enumerate(profile.choice):
        strategy = game.players[i].strategies[c]
        out.append(math.fsum(resource_share(game, e, users[e], i, method) for e in strategy))
    return out


def deviation_cost(game: Game, profile: Profile, player: int, index: int, method: ShareMethod = SHAPLEY_EXACT) -> float:
    """X_i(P_-i, P'_i) for the strategy at ``index``."""
    return player_cost(game, profile.with_choice(player, index), player, method)


def share_report(game: Game, profile: Profile, method: ShareMethod = SHAPLEY_EXACT) -> ShareReport:
    check_profile(game, profile)
    if method.kind == "shapley-sampled" and method.sample.batch_count is None:
        method = ShareMethod.sampled(resolve_sample_config(method.sample, game, method.sample.mu))
    users = users_by_resource(game, profile)
    w = game.weights
    shares = {}
    batch_means = {}
    residuals = {}
    for e, s in enumerate(users):
        if not s:
            continue
        poly = game.resources[e]
        for i in s:
            if method.kind == "shapley-sampled":
                est = shapley_sampled(poly, [(j, w[j]) for j in s], i, method.sample, resource=e)
                shares[(i, e)] = est.estimate
                batch_means[(i, e)] = est.batch_means
            else:
                shares[(i, e)] = resource_share(game, e, s, i, method)
        residuals[e] = math.fsum(shares[(i, e)] for i in s) - poly.joint(math.fsum(w[j] for j in s))
    return ShareReport(method.kind, shares, residuals, batch_means)
