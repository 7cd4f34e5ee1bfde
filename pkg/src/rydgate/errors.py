"""Exception types shared across the package.

Configuration problems (bad parameters, unknown modes, malformed config
files) are kept distinct from numeric failures (non-convergent
integration, undefined phases, missing roots): the command-line
interface maps the former to exit code 2 and the latter to exit code 3.
"""


class RydgateError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(RydgateError, ValueError):
    """A parameter lies outside its documented domain."""


class ConfigError(RydgateError):
    """A configuration file, unit mode, or option value is malformed."""


class ModeError(ConfigError):
    """The requested integrator mode is incompatible with the schedule."""


class NumericError(RydgateError):
    """Base class for failures of the numerical machinery."""


class IntegratorFailureError(NumericError):
    """Propagation failed to converge or violated a conservation bound."""


class UndefinedPhaseError(NumericError):
    """Accumulated phase requested for a near-orthogonal (non-cyclic) state."""


class RootNotFoundError(NumericError):
    """A bracketing root search found no sign change."""


class DegenerateGeometryError(NumericError):
    """The interatomic distance collapsed to zero or below."""
