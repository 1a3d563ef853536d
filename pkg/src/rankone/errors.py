"""Exception types shared across the package.

The CLI maps ValidationError to exit code 1 and ConvergenceError to exit
code 2; everything else is a bug.
"""


class ValidationError(ValueError):
    """Invalid argument or configuration (bad group, parameter out of range)."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to meet its accuracy target."""
