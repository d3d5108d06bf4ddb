"""Exception taxonomy shared across the package."""


class EkacError(Exception):
    """Base class for all package errors."""


class EmptyRangeError(EkacError, ValueError):
    """A range-valued argument is empty (lo > hi, limit < 2, ...)."""


class CapabilityError(EkacError):
    """An operation needs more precomputed data than was provided,
    e.g. a prime table too small to factor the requested input."""


class ZeroVarianceError(EkacError):
    """Normalization by B_Q requested but B_Q is zero (or negative radicand)."""


class SizeGuardError(EkacError):
    """An exact enumeration would exceed its combinatorial size guard."""


class ConfigError(EkacError, ValueError):
    """Experiment configuration is malformed or violates an invariant."""
