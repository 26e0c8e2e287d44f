# errors.py


class XrayBellError(Exception):
    """Base class for every error raised by xraybell"""


class InvalidInputError(XrayBellError, ValueError):
    """A precondition on a physical input was violated"""


class DegenerateGeometryError(XrayBellError, ValueError):
    """The momentum transfer vanishes, so its direction is undefined"""


class NoSolutionError(XrayBellError):
    """Phase matching has no solution at the requested pump angle"""


class FeasibilityError(XrayBellError):
    """A scan range contains no phase-matchable pump angle"""


class InvalidBracketError(XrayBellError, ValueError):
    """Root refinement was handed an interval without a sign change"""


class ConfigError(XrayBellError, ValueError):
    """Bad config file contents or flag values"""
