"""Exception types raised across the package."""


class ParaproductError(ValueError):
    """Base class for validation errors raised by this package."""


class LevelOverflowError(ParaproductError):
    """A refinement would go below the finest level of the window."""


class WindowClippedError(ParaproductError):
    """A requested interval (or its dilate) is not contained in the window."""


class ResolutionError(ParaproductError):
    """An object cannot be represented at the resolution of the window."""


class NotNestedError(ParaproductError):
    pass


class InadmissiblePatternError(ParaproductError):
    """Some coordinate has ``eps[j] == delta[j] == 1``."""


class WindowMismatchError(ParaproductError):
    pass


class CutoffTooSmallError(ParaproductError):
    pass


class NonOrthonormalError(ParaproductError):
    pass


class ParentOutOfWindowError(ParaproductError):
    pass


class ExponentError(ParaproductError):
    """Nonpositive (or otherwise invalid) exponent ``p``."""
