"""Exception hierarchy shared across the package."""


class LDPTestError(Exception):
    """Base class for all errors raised by ldp_twosample."""


class ParameterError(LDPTestError, ValueError):
    """A numeric parameter is outside its admissible range."""


class DomainError(LDPTestError, ValueError):
    """An input point lies outside the domain a transform or binner accepts."""


class DegenerateSampleError(LDPTestError, ValueError):
    """A group is too small, or its views too degenerate, for the statistic."""


class SizeError(LDPTestError, ValueError):
    """Exact enumeration would exceed the combinatorial budget."""


class UnsupportedMechanismError(LDPTestError, ValueError):
    pass


class ConfigurationError(LDPTestError, ValueError):
    """Unsupported (mechanism, statistic, calibration) combination."""
