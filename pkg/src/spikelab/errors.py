"""Exception types raised across spikelab."""


class SpikelabError(Exception):
    """Base class for all package errors."""


class NonConvergence(SpikelabError):
    pass


# the tau scan records this per entry instead of raising
NoConvergence = NonConvergence


class DomainError(SpikelabError, ValueError):
    pass


class SingularPoint(SpikelabError, ValueError):
    pass


class InvalidK(SpikelabError, ValueError):
    pass


class RegimeError(SpikelabError, ValueError):
    pass


class CoincidentSpikes(SpikelabError, ValueError):
    pass


class NoRoot(SpikelabError):
    pass


class StepError(SpikelabError):
    pass


class GridError(SpikelabError):
    pass


class PositivityLoss(SpikelabError):
    """Raised when a field loses strict positivity; carries the offending state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class LinearSolveFailure(SpikelabError):
    pass


class ConfigError(SpikelabError, ValueError):
    pass
