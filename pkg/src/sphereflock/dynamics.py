"""Phase-space vector fields for each model variant.

Four right-hand sides share the same state layout (positions on the
sphere, tangent velocities):

  rhs_main       second-order flocking with attraction/repulsion control
  rhs_boosted    rhs_main plus a speed-restoring boost toward speed b
  rhs_two_agent  the weighted two-agent reduction (no velocity coupling)
  rhs_ls         the damped cooperative-control comparison model

Velocity coupling uses the antipodal-safe extension of the rotation
transport: the rotated term of a pair with ||x_i + x_j|| <= eps_anti is
replaced by zero while the -psi v_i relaxation is kept, so the field stays
locally Lipschitz across the singular set.

These are the reference implementations; `engine` mirrors them in compiled
form for the integrator hot loop, and the test suite pins the two paths
against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import EPS_ANTI, EPS_SAME
from .kernels import PsiKernel, SigmaKernel, psi_eval, sigma_eval


@dataclass
class AgentState:
    """One agent: position x on the unit sphere, tangent velocity v."""

    x: np.ndarray
    v: np.ndarray


@dataclass
class Ensemble:
    """The full phase point: N positions and N velocities, stacked (N, 3).

    Admissible states have unit positions and tangent velocities; both are
    enforced only softly (the integrator re-projects, diagnostics report
    the drift).
    """

    x: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        self.v = np.atleast_2d(np.asarray(self.v, dtype=np.float64))
        if self.x.shape != self.v.shape or self.x.ndim != 2 or self.x.shape[1] != 3:
            raise DomainError(f"ensemble arrays must both be (N, 3), got {self.x.shape} / {self.v.shape}")
        if self.x.shape[0] < 1:
            raise DomainError("ensemble needs at least one agent")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def agents(self) -> list[AgentState]:
        return [AgentState(self.x[i].copy(), self.v[i].copy()) for i in range(self.n)]

    @classmethod
    def from_agents(cls, agents: list[AgentState]) -> "Ensemble":
        return cls(np.array([a.x for a in agents]), np.array([a.v for a in agents]))

    def copy(self) -> "Ensemble":
        return Ensemble(self.x.copy(), self.v.copy())


@dataclass(frozen=True)
class BoostParams:
    """Target speed threshold b of the speed-restoring boost."""

    b: float

    def __post_init__(self) -> None:
        if not self.b > 0.0:
            raise DomainError("boost threshold b must be positive")


@dataclass(frozen=True)
class LSParams:
    """Gains of the damped comparison model: damping k_v, attraction k_a,
    repulsion k_r, and radial feedback k_0."""

    k_v: float
    k_a: float
    k_r: float
    k_0: float

    def __post_init__(self) -> None:
        if min(self.k_v, self.k_a, self.k_r, self.k_0) < 0.0:
            raise DomainError("all comparison-model gains must be nonnegative")


@dataclass(frozen=True)
class TwoAgentWeights:
    """Mass split of the two-agent reduction: agent 1 carries weight
    n/N_total, agent 2 carries (N_total - n)/N_total."""

    n_total: int
    n: int

    def __post_init__(self) -> None:
        if self.n_total < 2 or not 1 <= self.n <= self.n_total:
            raise DomainError("need 1 <= n <= N_total and N_total >= 2")


# ---------------------------------------------------------------------------
# Force terms
# ---------------------------------------------------------------------------

def radial_term(a: AgentState) -> np.ndarray:
    """Centripetal term -(||v||^2 / ||x||^2) x keeping motion on the sphere."""
    x = np.asarray(a.x, dtype=np.float64)
    v = np.asarray(a.v, dtype=np.float64)
    xx = float(x @ x)
    if xx <= 0.0:
        raise DomainError("radial term undefined at the origin")
    return -(float(v @ v) / xx) * x


def coop_force(i: int, ens: Ensemble, sk: SigmaKernel) -> np.ndarray:
    """Attraction/repulsion control on agent i:
    sum_{j != i} (sigma_ij / N) (||x_i||^2 x_j - <x_i, x_j> x_i).

    Tangent to the sphere at x_i by construction (exactly, even off-sphere).
    """
    x = ens.x
    xi = x[i]
    xi_sq = float(xi @ xi)
    out = np.zeros(3)
    for j in range(ens.n):
        if j == i:
            continue
        diff = xi - x[j]
        s = sigma_eval(sk, float(diff @ diff))
        out += (s / ens.n) * (xi_sq * x[j] - float(xi @ x[j]) * xi)
    return out


def _transported_velocity(xi: np.ndarray, xj: np.ndarray, vj: np.ndarray) -> np.ndarray:
    """Apply the rotation taking xj to xi to vj, on normalized positions.

    Assumes the pair is not antipodal (caller guards). Expanded form of the
    rotation matrix; falls back to the identity below the coincidence
    threshold where the axis is 0/0.
    """
    if float(np.linalg.norm(xi - xj)) <= EPS_SAME:
        return vj.copy()
    d = float(xj @ xi)
    axis = np.cross(xj, xi)
    u = axis / np.linalg.norm(axis)
    return d * vj - float(xi @ vj) * xj + float(xj @ vj) * xi + (1.0 - d) * float(u @ vj) * u


def flock_force(i: int, ens: Ensemble, pk: PsiKernel, eps_anti: float = EPS_ANTI) -> np.ndarray:
    """Velocity-alignment force on agent i:
    sum_j (psi_ij / N) (R_{x_j -> x_i}(v_j) - v_i).

    Positions are normalized before evaluating psi and the rotation, and an
    (anti)podal pair contributes (psi_ij / N)(0 - v_i), matching the
    Lipschitz extension of the transport operator.
    """
    x, v = ens.x, ens.v
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms <= 0.0):
        raise DomainError("flock force undefined for an agent at the origin")
    xn = x / norms[:, None]
    xi = xn[i]
    vi = v[i]
    out = np.zeros(3)
    for j in range(ens.n):
        if j == i:
            continue
        xj = xn[j]
        dist = min(float(np.linalg.norm(xi - xj)), 2.0)
        w = psi_eval(pk, dist) / ens.n
        if float(np.linalg.norm(xi + xj)) <= eps_anti:
            out += w * (0.0 - vi)
        else:
            scale = norms[j] / norms[i]
            out += w * (scale * _transported_velocity(xi, xj, v[j]) - vi)
    return out


def boost_factor(v: np.ndarray, bp: BoostParams) -> float:
    """Piecewise-linear boost gain: 2 at rest, 0 at and above speed b."""
    speed = float(np.linalg.norm(v))
    if speed >= bp.b:
        return 0.0
    return -(2.0 / bp.b) * speed + 2.0


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

def rhs_main(ens: Ensemble, pk: PsiKernel, sk: SigmaKernel) -> tuple[np.ndarray, np.ndarray]:
    """Main model: dx_i = v_i, dv_i = radial + flock + cooperative control."""
    dx = ens.v.copy()
    dv = np.empty_like(ens.v)
    for i in range(ens.n):
        dv[i] = (
            radial_term(AgentState(ens.x[i], ens.v[i]))
            + flock_force(i, ens, pk)
            + coop_force(i, ens, sk)
        )
    return dx, dv


def rhs_boosted(
    ens: Ensemble, pk: PsiKernel, sk: SigmaKernel, bp: BoostParams
) -> tuple[np.ndarray, np.ndarray]:
    """Main model plus the speed-restoring term f_b(v_i) v_i."""
    dx, dv = rhs_main(ens, pk, sk)
    for i in range(ens.n):
        dv[i] += boost_factor(ens.v[i], bp) * ens.v[i]
    return dx, dv


def rhs_two_agent(
    ens: Ensemble, sk: SigmaKernel, w: TwoAgentWeights
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted two-agent reduction: cooperative coupling only, with agent 1
    weighted n/N_total and agent 2 weighted (N_total - n)/N_total."""
    if ens.n != 2:
        raise DomainError("two-agent model needs exactly two agents")
    x1, x2 = ens.x
    v1, v2 = ens.v
    diff = x1 - x2
    s = sigma_eval(sk, float(diff @ diff))
    c1 = w.n * s / w.n_total
    c2 = (w.n_total - w.n) * s / w.n_total
    d = float(x1 @ x2)
    dv1 = radial_term(AgentState(x1, v1)) + c1 * (float(x1 @ x1) * x2 - d * x1)
    dv2 = radial_term(AgentState(x2, v2)) + c2 * (float(x2 @ x2) * x1 - d * x2)
    return ens.v.copy(), np.array([dv1, dv2])


def rhs_ls(ens: Ensemble, ls: LSParams) -> tuple[np.ndarray, np.ndarray]:
    """Damped comparison model:
    dv_i = -||v_i||^2 x_i - k_v v_i + u_i + f0_i, where u_i sums
    (k_a - k_r/||x_i - x_j||^2)(x_j - <x_i,x_j> x_i) over the complete graph
    (unit edge weights) and f0_i = -k_0 (x_i - x_i/||x_i||) pins agents to
    the sphere."""
    sk = SigmaKernel(ls.k_a, ls.k_r, 1.0)
    dx = ens.v.copy()
    dv = np.empty_like(ens.v)
    for i in range(ens.n):
        xi, vi = ens.x[i], ens.v[i]
        u = np.zeros(3)
        for j in range(ens.n):
            if j == i:
                continue
            diff = xi - ens.x[j]
            s = sigma_eval(sk, float(diff @ diff))
            u += s * (ens.x[j] - float(xi @ ens.x[j]) * xi)
        nx = float(np.linalg.norm(xi))
        if nx <= 0.0:
            raise DomainError("radial feedback undefined at the origin")
        f0 = -ls.k_0 * (xi - xi / nx)
        dv[i] = -float(vi @ vi) * xi - ls.k_v * vi + u + f0
    return dx, dv


# ---------------------------------------------------------------------------
# Model variants as data, for the integrator and run configs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MainModel:
    psi: PsiKernel
    sigma: SigmaKernel
    kind: str = field(default="main", init=False)

    def rhs(self, ens: Ensemble) -> tuple[np.ndarray, np.ndarray]:
        return rhs_main(ens, self.psi, self.sigma)


@dataclass(frozen=True)
class BoostedModel:
    psi: PsiKernel
    sigma: SigmaKernel
    boost: BoostParams
    kind: str = field(default="boosted", init=False)

    def rhs(self, ens: Ensemble) -> tuple[np.ndarray, np.ndarray]:
        return rhs_boosted(ens, self.psi, self.sigma, self.boost)


@dataclass(frozen=True)
class TwoAgentModel:
    sigma: SigmaKernel
    weights: TwoAgentWeights
    kind: str = field(default="two_agent", init=False)

    def rhs(self, ens: Ensemble) -> tuple[np.ndarray, np.ndarray]:
        return rhs_two_agent(ens, self.sigma, self.weights)


@dataclass(frozen=True)
class LSModel:
    params: LSParams
    kind: str = field(default="ls", init=False)

    def rhs(self, ens: Ensemble) -> tuple[np.ndarray, np.ndarray]:
        return rhs_ls(ens, self.params)


Model = MainModel | BoostedModel | TwoAgentModel | LSModel


def model_sigma(model: Model) -> SigmaKernel:
    """Sigma kernel used for energy bookkeeping of a model variant.

    The comparison model has no 1/N-normalized kernel of its own; its
    (k_a, k_r) gains are reported through the same formula.
    """
    if isinstance(model, LSModel):
        return SigmaKernel(model.params.k_a, model.params.k_r, 1.0)
    return model.sigma


def model_psi(model: Model) -> PsiKernel | None:
    return model.psi if isinstance(model, (MainModel, BoostedModel)) else None


def admissibilize(x: np.ndarray, v: np.ndarray) -> Ensemble:
    """Post-process raw initial data onto the constraint manifold:
    normalize each position, then project each velocity to its tangent
    plane (in that order)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64)).copy()
    v = np.atleast_2d(np.asarray(v, dtype=np.float64)).copy()
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms <= 1e-12):
        raise DomainError("cannot place a zero vector on the sphere")
    x /= norms[:, None]
    v -= np.sum(v * x, axis=1)[:, None] * x
    return Ensemble(x, v)
