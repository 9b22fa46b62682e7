"""Exception types raised across the package."""


class WindowError(IndexError):
    """Index outside the declared window of a sequence or environment."""


class EmptyRangeError(ValueError):
    """Running minimum requested over an empty index range."""


class InvalidEnvironment(ValueError):
    """Rates violate positivity (a_i + b_j <= 0 or tail infima sum <= 0)."""


class DomainError(ValueError):
    """Argument outside the domain of a shape or measure function."""


class UnresolvableError(ValueError):
    """Minimizer cannot be located (both endpoint integrals infinite)."""


class HypothesisError(ValueError):
    """Quantity requested outside the hypotheses that make it finite."""


class ContractError(ValueError):
    """Call violates a structural precondition (e.g. base not at a corner)."""


class SizeError(ValueError):
    """Problem too large for the requested method."""


class ParameterError(ValueError):
    """Boundary parameter outside its admissible open interval."""


class PathError(ValueError):
    """Malformed lattice path."""


class ModeError(ValueError):
    """Operation not available for this environment."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
