"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: parameter and resource errors exit 2,
property violations exit 3.
"""


class ParqqError(Exception):
    """Base class for all workbench errors."""


class ParameterError(ParqqError, ValueError):
    """An argument violates an operation's precondition."""


class ResourceLimitError(ParqqError):
    """The requested instance is beyond the exact-enumeration bound."""


class PropertyViolation(ParqqError, AssertionError):
    """A checked mathematical property failed.

    ``reproducer`` carries whatever is needed to rerun the failing case
    (typically a seed and trial index).
    """

    def __init__(self, message, reproducer=None):
        super().__init__(message)
        self.reproducer = reproducer or {}
