"""Exception hierarchy shared by all modules."""


class SpringSweepError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SpringSweepError, ValueError):
    """Invalid model input.  ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ParseError(ValidationError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class DisconnectedGraph(ValidationError):
    pass


class RankDeficient(ValidationError):
    pass


class BrokenChain(ValidationError):
    pass


class DependentLoadings(ValidationError):
    pass


class UnbalancedForce(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class EmptySet(SpringSweepError):
    """The moving set is empty: the stress loading exceeds the safe load."""

    def __init__(self, message, times=()):
        self.times = tuple(times)
        super().__init__(message)


class SafeLoadViolated(EmptySet):
    pass


class InfeasibleSet(EmptySet):
    pass


class DimUNotOne(SpringSweepError):
    pass


class HypothesisViolated(SpringSweepError):
    pass


class SingletonSet(SpringSweepError):
    pass


class DimensionTooLarge(SpringSweepError):
    pass


class NumericalError(SpringSweepError):
    pass


class MaxIterations(NumericalError):
    pass


class BadInitialCondition(SpringSweepError, ValueError):
    pass


class ReactionInconsistent(NumericalError):
    pass


class NotConverged(NumericalError):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
