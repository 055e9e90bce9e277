"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or hyperparameter value."""


class EmptyChainError(RuntimeError):
    """An operation that needs posterior samples was given an empty chain."""


class ProposalError(RuntimeError):
    """A proposal could not produce a valid draw (e.g. constant predictor)."""
