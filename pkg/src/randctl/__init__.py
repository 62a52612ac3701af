"""Games on graphs where node ownership is decided by coin tosses."""
from .core import (
    MAX,
    MIN,
    Arena,
    Energy,
    GameGraph,
    Parity,
    Reachability,
    ValidationError,
    relevant_nodes,
    validate,
)
from .gamefile import load_game, parse_game, serialize_game
from .generators import GeneratorParams, chain_game, fig1a, generate_random_game
from .qualitative import almost_sure_rtg_reach, qualitative_one_two, sure_win
from .solvers import GuardExceeded, solve
from .toss_as_you_go import threshold_one, value_one
from .toss_at_start import estimate_value_two, exact_value_two, sample_count

__version__ = "0.1.0"

__all__ = [
    "MAX", "MIN", "Arena", "Energy", "GameGraph", "Parity", "Reachability", "ValidationError",
    "relevant_nodes", "validate", "load_game", "parse_game", "serialize_game", "GeneratorParams",
    "chain_game", "fig1a", "generate_random_game", "almost_sure_rtg_reach", "qualitative_one_two",
    "sure_win", "GuardExceeded", "solve", "threshold_one", "value_one", "estimate_value_two",
    "exact_value_two", "sample_count",
]
