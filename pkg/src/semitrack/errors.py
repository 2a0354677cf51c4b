"""Exception types shared across the package."""


class SemitrackError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SemitrackError):
    """Invalid parameters, scenario files, or numerical settings (CFL etc.).

    Maps to CLI exit code 2.
    """


class NumericalError(SemitrackError):
    """Solver failures: Newton stagnation, non-contractive fixed points,
    eigensolver breakdown.

    Maps to CLI exit code 3.
    """
