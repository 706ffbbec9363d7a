"""Exception types raised by pickfactor."""


class PickFactorError(Exception):
    """Base class for library errors."""


class DegreeExceededError(PickFactorError, ValueError):
    """A polynomial degree or truncation exceeds the available budget."""


class SpaceMismatchError(PickFactorError, ValueError):
    """Operands belong to different kernel spaces."""


class PointOutsideBallError(PickFactorError, ValueError):
    """A point is not strictly inside the unit ball."""


class ZeroPolynomialError(PickFactorError, ValueError):
    """An operation needs a nonzero input."""


class NotPickSpaceError(PickFactorError, ValueError):
    """The kernel is not a validated complete Pick kernel."""


class CoincidentPointsError(PickFactorError, ValueError):
    """Interpolation or certificate points are not distinct."""


class NotExtremalError(PickFactorError, ValueError):
    """The Pick problem is not extremal."""


class DegenerateKernelError(PickFactorError, ValueError):
    """Every null vector of the Pick matrix lies in the kernel of the Gramian."""


class BisectionError(PickFactorError, RuntimeError):
    """A bracketing search failed to find a sign change."""


class WrongFamilyError(PickFactorError, ValueError):
    """The operation is only defined for a particular kernel family."""


class BudgetExceededError(PickFactorError, ValueError):
    """A free Fock computation exceeds the word-length budget."""
