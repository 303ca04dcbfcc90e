"""Exception hierarchy shared by every module of the package."""


class CmvError(Exception):
    """Base class for all errors raised by ``cmvzeros``."""


class UnitModulusParameter(CmvError, ValueError):
    def __init__(self, k: int, value: complex):
        self.k = k
        self.value = value
        super().__init__(f"parameter a_{k} = {value!r} lies on the unit circle")


class ModeViolation(CmvError, ValueError):
    pass


class ParameterFileError(CmvError, ValueError):
    """Malformed parameter file; ``line`` is 1-based when known."""

    def __init__(self, path, message: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class DegreeMismatch(CmvError, ValueError):
    pass


class DimensionMismatch(CmvError, ValueError):
    pass


class ZeroArgument(CmvError, ValueError):
    pass


class NotAZero(CmvError, ValueError):
    pass


class MultipleZero(CmvError, ValueError):
    pass


class ZeroDenominator(CmvError, ZeroDivisionError):
    pass


class SolverFailure(CmvError, RuntimeError):
    pass


class InvalidRadii(CmvError, ValueError):
    pass


class InvalidEpsilon(CmvError, ValueError):
    pass


class PathAmbiguity(CmvError, RuntimeError):
    def __init__(self, message: str, t=None, ratio: float | None = None):
        self.t = t
        self.ratio = ratio
        super().__init__(message)


class OnArcEndpoint(CmvError, ValueError):
    pass


class WrongRegime(CmvError, ValueError):
    pass


class RegimeViolation(CmvError, ValueError):
    pass
