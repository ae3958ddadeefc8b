"""Exception types shared across the package.

The hierarchy separates bad inputs (ConfigError, DomainError) from
numerical failures detected mid-run (SingularityError, BlowupError),
because the CLI maps them to different exit codes.
"""


class SphereflockError(Exception):
    """Base class for all package errors."""


class ConfigError(SphereflockError):
    """Invalid or inconsistent run configuration."""


class DomainError(SphereflockError):
    """Input outside the mathematical domain of an operation."""


class AntipodalError(DomainError):
    """Rotation operator requested for an (anti)podal pair, where it is singular."""


class SingularityError(SphereflockError):
    """Two agents collided (repulsive kernel evaluated at ~zero distance).

    The continuous dynamics provably keeps distinct agents apart when the
    repulsion is active, so hitting this means the integration failed.
    """


class BlowupError(SphereflockError):
    """A speed exceeded the divergence cap; the run is numerically lost."""


class NonConvergenceError(SphereflockError):
    """Optimizer failed to reach the requested tolerance from any restart."""


class UnknownScenarioError(ConfigError):
    """Requested scenario name is not in the registry."""


class InsufficientDataError(SphereflockError):
    """Trajectory log too short for the requested analysis window."""
