"""Exception hierarchy.

Physics-domain failures (bad geometry, infeasible inversions) are kept apart
from configuration and oracle failures so the CLI can map them to distinct
exit codes.
"""


class PopperLabError(Exception):
    pass


class PhysicsDomainError(PopperLabError, ValueError):
    """A requested configuration lies outside the model's physical domain."""


class InvalidModeError(PhysicsDomainError):
    pass


class InvalidPacketError(PhysicsDomainError):
    pass


class NoRealWaistError(PhysicsDomainError):
    pass


class DiffractionLimitError(PhysicsDomainError):
    pass


class CalibrationError(PhysicsDomainError):
    pass


class PipelineError(PhysicsDomainError):
    pass


class ConfigError(PopperLabError, ValueError):
    pass


class OracleError(PopperLabError, RuntimeError):
    pass


class ExtentTooSmallError(OracleError):
    pass


class ResolutionError(OracleError):
    pass
