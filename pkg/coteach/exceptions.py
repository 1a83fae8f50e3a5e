class CoteachError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(CoteachError, ValueError):
    """Invalid experiment configuration or command-line override."""


class ContractViolation(CoteachError, RuntimeError):
    """A caller broke an operation's precondition (finished episode, bad shape, empty buffer...)."""


class MissingRewardContext(ContractViolation):
    """The reward context lacks a field the selected reward kind needs."""


class PolicyFormatError(CoteachError, ValueError):
    """A policy file is unreadable, has another format version, or does not fit the domain."""
