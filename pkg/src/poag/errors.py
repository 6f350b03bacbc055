class PoagError(Exception):
    """Base class for errors raised by this package."""


class GameValidationError(PoagError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid game")


class UndefinedHistoryError(PoagError, KeyError):
    """A policy was queried at a history it does not define."""

    def __init__(self, player, history):
        self.player = player
        self.history = history
        super().__init__(f"policy for {player} undefined at history {history!r}")

    def __str__(self):
        return self.args[0]


class ZeroProbabilityHistoryError(PoagError):
    pass


class BudgetExceededError(PoagError):
    def __init__(self, needed, budget, what="enumeration"):
        self.needed = needed
        self.budget = budget
        self.what = what
        super().__init__(f"{what} needs {needed} candidates, budget is {budget}")


class DimensionMismatchError(PoagError, ValueError):
    pass


class ThresholdError(PoagError):
    """No unique sign change of the utility gap was found in the scanned range."""

    def __init__(self, message, scan):
        self.scan = scan
        super().__init__(message)
