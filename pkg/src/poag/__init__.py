"""Exact tools for small partially observable assistance games."""
from .errors import (BudgetExceededError, DimensionMismatchError, GameValidationError, PoagError,
                     ThresholdError, UndefinedHistoryError, ZeroProbabilityHistoryError)
from .game import (ASSISTANT, HUMAN, Poag, Policy, evaluate_pair, has_no_private_info, load_game,
                   load_policy, sample_trajectory, save_game, validate)

__all__ = [
    "ASSISTANT", "HUMAN", "Poag", "Policy", "evaluate_pair", "has_no_private_info", "load_game",
    "load_policy", "sample_trajectory", "save_game", "validate", "PoagError", "BudgetExceededError",
    "DimensionMismatchError", "GameValidationError", "ThresholdError", "UndefinedHistoryError",
    "ZeroProbabilityHistoryError",
]
