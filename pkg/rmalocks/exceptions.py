"""
Exception hierarchy for rmalocks.
"""


class RmaLocksError(Exception):
    """Base class for all errors raised by rmalocks."""


class ConfigurationError(RmaLocksError, ValueError):
    """Invalid sizes, thresholds, topology or benchmark configuration."""


class AddressingError(RmaLocksError, IndexError):
    """A rank, offset, level or element outside the valid range."""


class ContractViolationError(RmaLocksError, RuntimeError):
    """An operation ticket was read before the matching flush (strict mode)."""


class ProtocolViolationError(RmaLocksError, RuntimeError):
    """A lock was used against its protocol, e.g. released without being held."""


class CapacityError(RmaLocksError, RuntimeError):
    """A fixed-size structure ran out of room."""


class SimulationAborted(RmaLocksError, RuntimeError):
    """Raised inside a worker when its run has been cancelled."""


class WatchdogTimeout(RmaLocksError, TimeoutError):
    """A run did not finish within its watchdog budget."""
