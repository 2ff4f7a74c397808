"""Exception types shared across the package."""


class SlowdiffError(Exception):
    """Base class for all package errors."""


class ConfigError(SlowdiffError):
    """Invalid configuration file, key, or value."""


class ValidationError(SlowdiffError, ValueError):
    """Invalid domain object: kernel terms, ensemble arrays, arguments."""


class NumericalError(SlowdiffError, RuntimeError):
    """Numerical failure during evaluation or time integration."""


class DensityBlowupError(NumericalError):
    """A mollified density power exceeded the double-precision range."""

    def __init__(self, particle: int, log_power: float):
        self.particle = int(particle)
        self.log_power = float(log_power)
        super().__init__(
            "density blow-up: particle %d drives the power exponent to %.6g (> 700)"
            % (self.particle, self.log_power)
        )


class StiffBlowupError(NumericalError):
    """The displacement cap could not be met within 2**10 substeps."""
