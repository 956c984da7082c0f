"""Typed errors shared across the package.

The CLI maps these onto exit codes: config errors exit 2, capacity errors
exit 3, validation failures exit 4.
"""


class PhotonstatError(Exception):
    """Base class for package-specific errors."""


class CapacityError(PhotonstatError):
    """A request exceeds a configured enumeration or memory cap."""


class ZeroIntensityError(PhotonstatError):
    """Normalization against a vanishing single-direction intensity."""


class ConfigError(PhotonstatError):
    """A scenario configuration failed validation.

    ``field`` holds a dotted path into the offending config entry.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ValidationFailure(PhotonstatError):
    """Dual-path validation (``--validate``) exceeded its tolerance."""
