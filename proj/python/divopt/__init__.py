from ._divopt import *  # noqa: F401,F403
from ._divopt import (
    Error,
    Hybrid,
    Liquidation,
    ModelParams,
    PeriodicBarrier,
    PeriodicZero,
    Regime,
    Side,
    solve,
    simulate,
    value,
)

__all__ = [
    "Error",
    "Hybrid",
    "Liquidation",
    "ModelParams",
    "PeriodicBarrier",
    "PeriodicZero",
    "Regime",
    "Side",
    "solve",
    "simulate",
    "value",
]
