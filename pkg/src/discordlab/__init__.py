"""Two-qubit open-system correlation lab.

Exact spin-bath reduced dynamics, geometric and entropic discord measures
computed by derivative-free minimization, a reproducible feature dataset, and
a small from-scratch neural network mapping Renyi-2 discord features to the
Bures discord.
"""

from .dynamics import ModelParams, XState, evolve, trajectory, uniform_grid
from .measures import (
    Measurement,
    MeasureResult,
    concurrence,
    discord_bures,
    discord_hellinger,
    discord_hs,
    interferometric_power,
    renyi_cmi,
    renyi_discord,
    vn_discord,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "XState", "evolve", "trajectory", "uniform_grid",
    "Measurement", "MeasureResult", "concurrence",
    "discord_bures", "discord_hellinger", "discord_hs",
    "interferometric_power", "renyi_cmi", "renyi_discord", "vn_discord",
    "__version__",
]
