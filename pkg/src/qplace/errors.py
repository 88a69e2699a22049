"""Exception hierarchy shared by every module."""


class PlacementError(Exception):
    """Base class for all qplace errors."""


class GridTooSmall(PlacementError):
    pass


class IllegalMove(PlacementError):
    pass


class BudgetExhausted(PlacementError):
    pass


class NoLegalAction(PlacementError):
    pass


class Stuck(PlacementError):
    """No agent at any level has a legal move."""


class UnbalancedPair(PlacementError):
    pass


class PatternImpossible(PlacementError):
    pass


class TooLarge(PlacementError):
    pass


class ParseError(PlacementError):
    pass


class ValidationError(PlacementError):
    """Carries every problem found, not just the first."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
