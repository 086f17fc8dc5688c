"""Exception hierarchy shared by all modules."""


class IsingTodaError(Exception):
    """Base class for every error raised by the package."""


class SeriesError(IsingTodaError, ArithmeticError):
    pass


class ZeroDivisor(SeriesError, ZeroDivisionError):
    """Division by a series with no nonzero coefficient."""


class NonUnitLeading(SeriesError):
    """Operation needs a leading term equal to 1."""


class NonLatticeExponent(SeriesError):
    """Result would leave the integer s-lattice."""


class NonzeroConstantTerm(SeriesError):
    """exp/compose need an argument without constant (or negative) terms."""


class TruncationExhausted(SeriesError):
    """Not enough provable orders left to produce the requested result."""


class DomainError(IsingTodaError, ValueError):
    pass


class ConvergenceError(IsingTodaError):
    pass


class NotDivisible(IsingTodaError):
    """Exact division in the closed-form algebra failed."""


class RankDeficient(IsingTodaError):
    pass


class InconsistentFit(IsingTodaError):
    pass
