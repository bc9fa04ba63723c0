"""Exception types shared across the simulator."""


class FramingError(ValueError):
    """A stream's length is incompatible with the block structure of a stage."""


class SingularChannelError(ArithmeticError):
    """A channel matrix is rank deficient or too ill-conditioned to invert."""


class ConfigError(ValueError):
    """A simulation configuration is invalid or cannot be parsed."""
