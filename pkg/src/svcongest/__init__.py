"""Weighted congestion games under Shapley cost sharing.

Exact and sampled Shapley shares, the game's exact potential, phased
improvement dynamics reaching approximate pure Nash equilibria, and
brute-force checks of price-of-anarchy and stretch bounds.
"""
from svcongest.game import CostPolynomial, Game, Player, PreconditionError, Profile, make_game
from svcongest.kernels import BACKEND
from svcongest.sharing import PROPORTIONAL, SHAPLEY_EXACT, SampleConfig, ShareMethod
from svcongest.solver import solve

__all__ = [
    "BACKEND",
    "CostPolynomial",
    "Game",
    "Player",
    "PreconditionError",
    "Profile",
    "PROPORTIONAL",
    "SHAPLEY_EXACT",
    "SampleConfig",
    "ShareMethod",
    "make_game",
    "solve",
]
