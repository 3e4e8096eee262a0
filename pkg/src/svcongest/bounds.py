"""Closed-form price-of-anarchy, stretch and approximation-factor bounds.

The 2**(1/(d+1)) terms are evaluated with mpmath at 50 digits because the
denominators nearly cancel as rho approaches its admissible limit.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import mpmath

from svcongest.game import PreconditionError

_DPS = 50


class BoundDomainError(PreconditionError):
    pass


def bound_degree(d: int) -> int:
    """Degree fed to the Shapley/proportional based bounds.

    Those bounds rest on a smoothness claim that needs d >= 1; a game with
    only constant costs also has maximum degree at most 1.
    """
    return max(int(d), 1)


def _den(rho, d):
    return mpmath.power(2, -mpmath.mpf(d) / (d + 1)) * (1 + rho) - rho


def _poa(rho, d):
    with mpmath.workdps(_DPS):
        rho = mpmath.mpf(rho)
        den = _den(rho, d)
        if den <= 0:
            raise BoundDomainError(f"rho exceeds admissible range for degree {d} (rho={float(rho)})")
        return rho * mpmath.power(mpmath.power(2, mpmath.mpf(1) / (d + 1)) - 1, -d) / den


def smoothness(d: int) -> tuple[float, float]:
    """(lambda, mu) with (x+y)^(d+1) - x^(d+1) <= lambda y^(d+1) + mu x^(d+1)."""
    with mpmath.workdps(_DPS):
        two = mpmath.mpf(2)
        lam = two ** (mpmath.mpf(d) / (d + 1)) * (two ** (mpmath.mpf(1) / (d + 1)) - 1) ** (-d)
        mu = two ** (mpmath.mpf(d) / (d + 1)) - 1
        return float(lam), float(mu)


def max_admissible_rho(d: int) -> float:
    """Supremum of rho for which the PoA denominator stays positive."""
    with mpmath.workdps(_DPS):
        q = mpmath.power(2, -mpmath.mpf(d) / (d + 1))
        if q >= 1:
            return float("inf")
        return float(q / (1 - q))


def poa_bound(rho: float, d: int) -> float:
    return float(_poa(rho, d))


def stretch_bound(rho: float, d: int) -> float:
    with mpmath.workdps(_DPS):
        return float(_poa(rho, d) * (d + 1))


def limited_stretch_bound(rho: float, d: int) -> float:
    with mpmath.workdps(_DPS):
        return float(_poa(rho, d) * mpmath.mpf((d + 1) ** 2 * (d + 3)) / 8)


def theta_of(gamma: float, d: int) -> float:
    """Limited stretch bound at the near-exact move factor t = 1 + gamma."""
    return limited_stretch_bound(1 + gamma, d)


def alpha_of(gamma: float, d: int) -> float:
    """((1 + gamma^2) / (1 - gamma)) * (1/theta - 2 gamma)^-1."""
    if gamma <= 0:
        raise BoundDomainError("gamma must be positive")
    theta = theta_of(gamma, d)
    if not gamma < 1 / (2 * theta):
        raise BoundDomainError(
            f"gamma violates stretch constraint: need gamma < {max_admissible_gamma(d):.6g}"
        )
    return (1 + gamma**2) / (1 - gamma) / (1 / theta - 2 * gamma)


def max_admissible_gamma(d: int) -> float:
    """Supremum of gamma with gamma < 1/(2 theta(1+gamma)) and a positive denominator."""
    hi = max_admissible_rho(d) - 1
    lo = 0.0
    hi = min(hi, 0.5)
    for _ in range(200):
        mid = (lo + hi) / 2
        try:
            ok = mid * 2 * theta_of(mid, d) < 1
        except BoundDomainError:
            ok = False
        if ok:
            lo = mid
        else:
            hi = mid
    return lo


def gamma_for_fraction(d: int, fraction: float = 0.25, iterations: int = 100) -> float:
    """Fixed point of gamma = fraction / theta(1 + gamma), with 0 < fraction < 1/2."""
    if not 0 < fraction < 0.5:
        raise BoundDomainError("fraction must lie in (0, 1/2)")
    gamma = fraction / limited_stretch_bound(1.0, d)
    for _ in range(iterations):
        nxt = fraction / theta_of(gamma, d)
        if abs(nxt - gamma) <= 1e-15 * gamma:
            return nxt
        gamma = nxt
    return gamma


@dataclass(frozen=True)
class BoundValues:
    d: int
    rho: float
    lam: float
    mu_smooth: float
    poa_bound: float
    stretch_bound: float
    limited_stretch_bound: float
    gamma: float | None = None
    theta: float | None = None
    alpha: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def bound_values(d: int, rho: float, gamma: float | None = None) -> BoundValues:
    lam, mu = smoothness(d)
    theta = alpha = None
    if gamma is not None:
        theta = theta_of(gamma, d)
        alpha = alpha_of(gamma, d)
    return BoundValues(
        d=d,
        rho=rho,
        lam=lam,
        mu_smooth=mu,
        poa_bound=poa_bound(rho, d),
        stretch_bound=stretch_bound(rho, d),
        limited_stretch_bound=limited_stretch_bound(rho, d),
        gamma=gamma,
        theta=theta,
        alpha=alpha,
    )
