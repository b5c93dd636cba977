"""Exception hierarchy shared by every module of the package."""


class IAError(Exception):
    """Base class for all errors raised by iaselect."""


class RankDeficient(IAError, ValueError):
    pass


class NullSpaceTooSmall(IAError, ValueError):
    """Numerical nullity is below the requested dimension."""


class DimensionMismatch(IAError, ValueError):
    pass


class NotPositiveDefinite(IAError, ValueError):
    pass


class EmptyGains(IAError, ValueError):
    pass


class InvalidConfig(IAError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration: " + ", ".join(self.violations))


class DegenerateBeamformer(IAError, ValueError):
    pass


class RankDeficientDesiredLink(IAError, ValueError):
    pass


class SearchSpaceTooLarge(IAError, ValueError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"brute-force search space {count} exceeds cap {cap}")
