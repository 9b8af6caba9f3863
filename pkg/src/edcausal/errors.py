"""Exception and warning types raised across the package."""


class CausalError(Exception):
    """Base class for every domain error raised by edcausal."""


# graph construction and queries
class CycleDetected(CausalError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("graph contains the cycle " + " -> ".join(self.cycle))


class UnknownEndpoint(CausalError):
    pass


class DuplicateEdge(CausalError):
    pass


class UnknownNode(CausalError):
    pass


class OverlapError(CausalError):
    pass


# structural models
class MissingEquation(CausalError):
    pass


class ParentMismatch(CausalError):
    pass


class ProbabilityOutOfRange(CausalError):
    def __init__(self, node, pattern, value):
        self.node = node
        self.pattern = dict(pattern)
        self.value = value
        stratum = ", ".join(f"{k}={v}" for k, v in self.pattern.items()) or "no parents"
        super().__init__(
            f"P({node}=1) = {value:.6g} outside [0, 1] at stratum ({stratum})"
        )


class NonPositiveSigma(CausalError):
    pass


class ValueOutOfSupport(CausalError):
    pass


class RegimeExplosion(CausalError):
    pass


class UnsupportedEquationForm(CausalError):
    pass


# estimation
class UnknownColumn(CausalError):
    pass


class RankDeficient(CausalError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"design matrix is rank deficient; {column!r} is linearly dependent on earlier columns")


class InsufficientRows(CausalError):
    pass


class BootstrapUnstable(CausalError):
    pass


class PositivityViolation(CausalError):
    def __init__(self, message, strata=()):
        self.strata = list(strata)
        super().__init__(message)


class EmptySubgroup(CausalError):
    pass


class ZeroDenominator(CausalError):
    pass


class LengthMismatch(CausalError):
    pass


class InsufficientSegment(CausalError):
    pass


class EmptyArm(CausalError):
    pass


# scenarios
class UnknownScenario(CausalError):
    pass


class InvalidMethodForScenario(CausalError):
    pass


class BoundaryProbabilityWarning(UserWarning):
    """A linear-probability equation reaches exactly 0 or 1 in some parent stratum."""
