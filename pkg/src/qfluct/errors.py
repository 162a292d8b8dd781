"""Exception hierarchy shared by every qfluct module."""


class QFluctError(Exception):
    """Base class for all qfluct errors."""


class DimensionMismatch(QFluctError, ValueError):
    pass


class NotHermitian(QFluctError, ValueError):
    pass


class NotPositiveDefinite(QFluctError, ValueError):
    pass


class ParameterOutOfRange(QFluctError, ValueError):
    pass


class CompletenessViolation(QFluctError, ValueError):
    pass


class NoFixedPoint(QFluctError):
    pass


class NonUniqueFixedPoint(QFluctError):
    def __init__(self, multiplicity: int):
        super().__init__(f"channel has {multiplicity} linearly independent fixed points")
        self.multiplicity = multiplicity


class NotPositive(QFluctError):
    pass


class NonFullRankStationary(QFluctError):
    pass


class NotStationary(QFluctError):
    pass


class RankDeficientState(QFluctError):
    pass


class UnmatchedAtom(QFluctError):
    pass


class NonRealMarginal(QFluctError):
    pass


class InconsistentContext(QFluctError):
    pass


class UnsupportedDimension(QFluctError):
    pass


class ConfigError(QFluctError):
    pass
