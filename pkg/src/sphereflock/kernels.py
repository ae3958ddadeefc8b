"""Interaction kernels: the communication weight psi and the attraction/
repulsion coefficient sigma.

psi is evaluated at the true pair distance in [0, 2]; sigma at the squared
pair distance, which avoids redundant square roots in force assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, SingularityError

# Collision guard on squared distance. Distinct agents provably never
# collide under active repulsion, so reaching the floor signals integrator
# failure and is reported as an error rather than silently clamped.
DIST_SQ_FLOOR = 1e-14

# Slack accepted above the geometric maximum distance 2 before psi_eval
# rejects the input (values in (2, 2 + PSI_DIST_SLACK] are clamped to 2).
PSI_DIST_SLACK = 1e-9


@dataclass(frozen=True)
class PsiKernel:
    """Communication weight psi as a function of pair distance on [0, 2].

    Two variants:
      exp_decay(c):  psi(x) = c * (exp(2 - x) - 1), which is decreasing,
                     C1, and vanishes exactly at x = 2 (admissible);
      constant(c):   psi(x) = c, which violates psi(2) = 0 and is admitted
                     only for reproducing the undamped reference runs
                     (flagged as non-admissible in run metadata).
    """

    kind: str  # "exp_decay" | "constant"
    value: float

    def __post_init__(self) -> None:
        if self.kind not in ("exp_decay", "constant"):
            raise DomainError(f"unknown psi kernel kind {self.kind!r}")
        if self.kind == "exp_decay" and not self.value > 0.0:
            raise DomainError("exp_decay scale must be positive")
        if self.kind == "constant" and self.value < 0.0:
            raise DomainError("constant psi must be nonnegative")

    @classmethod
    def exp_decay(cls, scale: float = 2.0) -> "PsiKernel":
        return cls("exp_decay", float(scale))

    @classmethod
    def constant(cls, value: float) -> "PsiKernel":
        return cls("constant", float(value))

    @property
    def admissible(self) -> bool:
        """Whether the kernel meets the decreasing-with-psi(2)=0 contract."""
        return self.kind == "exp_decay" or self.value == 0.0


@dataclass(frozen=True)
class SigmaKernel:
    """Attraction/repulsion coefficient sigma(s) = sigma_a - sigma_r / s**beta
    of the squared pair distance s.

    beta = 1 is the analyzed case; beta = 0 makes the repulsion distance-
    independent (then sigma is constant and never singular).
    """

    sigma_a: float
    sigma_r: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.sigma_a < 0.0 or self.sigma_r < 0.0:
            raise DomainError("sigma_a and sigma_r must be nonnegative")
        if self.beta < 0.0:
            raise DomainError("beta must be nonnegative")

    @property
    def singular(self) -> bool:
        """True when sigma diverges at zero separation."""
        return self.sigma_r > 0.0 and self.beta > 0.0


def psi_eval(k: PsiKernel, dist: float) -> float:
    """Evaluate psi at a pair distance, clamping the domain to [0, 2]."""
    dist = float(dist)
    if dist < 0.0:
        raise DomainError(f"pair distance must be nonnegative, got {dist!r}")
    if dist > 2.0 + PSI_DIST_SLACK:
        raise DomainError(f"pair distance {dist!r} exceeds the sphere diameter")
    d = min(dist, 2.0)
    if k.kind == "exp_decay":
        return k.value * (math.exp(2.0 - d) - 1.0)
    return k.value


def sigma_eval(k: SigmaKernel, dist_sq: float) -> float:
    """Evaluate sigma at a squared pair distance.

    Raises SingularityError at/below the collision floor when the kernel
    actually diverges there (sigma_r > 0 and beta > 0).
    """
    dist_sq = float(dist_sq)
    if dist_sq < 0.0:
        raise DomainError(f"squared distance must be nonnegative, got {dist_sq!r}")
    if not k.singular:
        if k.beta == 0.0:
            return k.sigma_a - k.sigma_r
        return k.sigma_a
    if dist_sq <= DIST_SQ_FLOOR:
        raise SingularityError(
            f"repulsive kernel evaluated at squared distance {dist_sq!r} "
            f"(<= {DIST_SQ_FLOOR}); agents have effectively collided"
        )
    if k.beta == 1.0:
        return k.sigma_a - k.sigma_r / dist_sq
    return k.sigma_a - k.sigma_r * dist_sq ** (-k.beta)
