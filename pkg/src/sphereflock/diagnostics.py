"""Scalar observables of an ensemble and regime classification.

Everything here is a pure function of a phase point or of a trajectory
log: energies, the velocity-alignment measure, the centroid and the
spread measurement rho, residuals of the conservation/equilibrium
identities, and the finite-horizon regime classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Ensemble, TwoAgentWeights, coop_force, rhs_main
from .errors import DomainError, InsufficientDataError, SingularityError
from .geometry import EPS_ANTI
from .kernels import DIST_SQ_FLOOR, PsiKernel, SigmaKernel, psi_eval, sigma_eval

# rho divides by ||centroid||^2; below this it is reported as undefined.
EPS_CENTROID = 1e-6

# Default finite-horizon classification tolerances. The convergence
# statements are asymptotic, so labels need explicit windows and bands.
TOL_RENDEZVOUS = 1e-3
TOL_CENTROID = 1e-3
TOL_RHO = 5e-2
TOL_ALIGN = 1e-3
TOL_PLANE = 1e-3
TOL_KINETIC = 1e-6


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-snapshot observables. rho is None when the centroid vanishes."""

    t: float
    e_total: float
    e_kinetic: float
    e_config: float
    alignment: float
    centroid_norm: float
    rho: float | None
    max_diameter: float
    min_pair_dist: float
    max_constraint_drift: float


@dataclass(frozen=True)
class RegimeLabel:
    """Asymptotic regime read off a finite trajectory tail."""

    kind: str  # rendezvous | formation | uniform_deployment | great_circle_motion | undecided
    r0: float | None = None  # converged spread for formation labels


def kinetic_energy(ens: Ensemble) -> float:
    """(1/2N) sum ||v_i||^2."""
    return float(np.sum(ens.v * ens.v) / (2.0 * ens.n))


def _pair_dist_sq(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sum(diff * diff, axis=2)


def config_energy_positions(x: np.ndarray, sk: SigmaKernel) -> float:
    """Configuration energy of stacked positions (N, 3).

    Ordered-pair double sum: attraction (sigma_a / 4N^2) sum d^2 plus the
    repulsive potential whose derivative in d^2 reproduces sigma. For
    beta = 1 that is -(sigma_r / 4N^2) sum log d^2; for beta != 1 it is
    (sigma_r / (4 N^2 (beta-1))) sum d^(-2(beta-1)).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    d_sq = _pair_dist_sq(x)
    off = ~np.eye(n, dtype=bool)
    total = sk.sigma_a / (4.0 * n * n) * float(np.sum(d_sq))
    if sk.sigma_r > 0.0:
        vals = d_sq[off]
        if sk.beta > 0.0 and np.any(vals <= DIST_SQ_FLOOR):
            raise SingularityError("configuration energy undefined: coincident pair")
        if sk.beta == 1.0:
            total -= sk.sigma_r / (4.0 * n * n) * float(np.sum(np.log(vals)))
        else:
            total += sk.sigma_r / (4.0 * n * n * (sk.beta - 1.0)) * float(
                np.sum(vals ** (-(sk.beta - 1.0)))
            )
    return total


def config_energy(ens: Ensemble, sk: SigmaKernel) -> float:
    return config_energy_positions(ens.x, sk)


def config_energy_euclidean_gradient(x: np.ndarray, sk: SigmaKernel) -> np.ndarray:
    """Ambient-space gradient of the configuration energy, shape (N, 3):
    grad_i = (1/N^2) sum_{j != i} sigma_ij (x_i - x_j)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    g = np.zeros_like(x)
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            diff = x[i] - x[j]
            s = sigma_eval(sk, float(diff @ diff))
            g[i] += s * diff
    return g / (n * n)


def total_energy(ens: Ensemble, sk: SigmaKernel, e_c_min: float = 0.0) -> float:
    """Kinetic plus configuration energy, shifted to vanish at the
    configuration-energy minimum."""
    return kinetic_energy(ens) + config_energy(ens, sk) - e_c_min


def _normalized_positions(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms <= 0.0):
        raise DomainError("diagnostics undefined for an agent at the origin")
    return x / norms[:, None]


def alignment_measure(ens: Ensemble, eps_anti: float = EPS_ANTI) -> float:
    """max over pairs of ||x_i + x_j|| ||R_{x_j->x_i}(v_j) - v_i||.

    The prefactor vanishes at antipodal pairs, so such pairs contribute 0
    (the continuity limit). Positions are normalized before the transport
    so the measure stays defined on slightly off-sphere snapshots.
    """
    from .dynamics import _transported_velocity

    x = _normalized_positions(ens.x)
    v = ens.v
    worst = 0.0
    for i in range(ens.n):
        for j in range(ens.n):
            if j == i:
                continue
            pre = float(np.linalg.norm(x[i] + x[j]))
            if pre <= eps_anti:
                continue
            mism = float(np.linalg.norm(_transported_velocity(x[i], x[j], v[j]) - v[i]))
            worst = max(worst, pre * mism)
    return worst


def centroid(ens: Ensemble) -> np.ndarray:
    return ens.x.mean(axis=0)


def rho(ens: Ensemble, eps_centroid: float = EPS_CENTROID) -> float | None:
    """Total squared distance of agents from the axis through the origin
    along the centroid; None when the centroid is (numerically) zero."""
    xb = centroid(ens)
    nb_sq = float(xb @ xb)
    if math.sqrt(nb_sq) <= eps_centroid:
        return None
    total = 0.0
    for i in range(ens.n):
        proj = (float(xb @ ens.x[i]) / nb_sq) * xb
        r = ens.x[i] - proj
        total += float(r @ r)
    return total


def rho_from_identity(ens: Ensemble, eps_centroid: float = EPS_CENTROID) -> float | None:
    """Alternative evaluation N - (1/||xbar||^2) sum <x_i, xbar>^2."""
    xb = centroid(ens)
    nb_sq = float(xb @ xb)
    if math.sqrt(nb_sq) <= eps_centroid:
        return None
    return ens.n - float(np.sum((ens.x @ xb) ** 2)) / nb_sq


def max_diameter(ens: Ensemble) -> float:
    if ens.n < 2:
        return 0.0
    return float(np.sqrt(np.max(_pair_dist_sq(ens.x))))


def min_pair_dist(ens: Ensemble) -> float:
    if ens.n < 2:
        return math.inf
    d_sq = _pair_dist_sq(ens.x)
    return float(np.sqrt(np.min(d_sq[~np.eye(ens.n, dtype=bool)])))


def constraint_drift(ens: Ensemble) -> float:
    """max over agents of max(| ||x_i|| - 1 |, |<x_i, v_i>|)."""
    norm_err = np.abs(np.linalg.norm(ens.x, axis=1) - 1.0)
    tang_err = np.abs(np.sum(ens.x * ens.v, axis=1))
    return float(max(norm_err.max(), tang_err.max()))


def energy_rate_identity(ens: Ensemble, pk: PsiKernel, eps_anti: float = EPS_ANTI) -> float:
    """Dissipation side of the energy identity:
    -sum_{i,j} psi_ij / (2 N^2) ||R_{x_j->x_i}(v_j) - v_i||^2."""
    from .dynamics import _transported_velocity

    x = _normalized_positions(ens.x)
    v = ens.v
    total = 0.0
    for i in range(ens.n):
        for j in range(ens.n):
            if j == i:
                continue
            dist = min(float(np.linalg.norm(x[i] - x[j])), 2.0)
            w = psi_eval(pk, dist)
            if w == 0.0:
                continue
            if float(np.linalg.norm(x[i] + x[j])) <= eps_anti:
                mism_sq = float(v[i] @ v[i])
            else:
                mism = _transported_velocity(x[i], x[j], v[j]) - v[i]
                mism_sq = float(mism @ mism)
            total += w * mism_sq
    return -total / (2.0 * ens.n * ens.n)


def energy_rate_chain(
    ens: Ensemble, sk: SigmaKernel, rhs_value: tuple[np.ndarray, np.ndarray]
) -> float:
    """Analytic dE/dt via the chain rule on a phase derivative:
    (1/N) sum <v_i, dv_i> + sum <grad_{x_i} E_C, dx_i>."""
    dx, dv = rhs_value
    rate = float(np.sum(ens.v * dv)) / ens.n
    grad = config_energy_euclidean_gradient(ens.x, sk)
    rate += float(np.sum(grad * dx))
    return rate


def dissipation_residual(
    ens: Ensemble,
    pk: PsiKernel,
    sk: SigmaKernel,
    rhs_value: tuple[np.ndarray, np.ndarray] | None = None,
) -> float:
    """|analytic dE/dt - dissipation identity| for the unboosted model."""
    if rhs_value is None:
        rhs_value = rhs_main(ens, pk, sk)
    return abs(energy_rate_chain(ens, sk, rhs_value) - energy_rate_identity(ens, pk))


def equilibrium_residual(ens: Ensemble, sk: SigmaKernel) -> float:
    """max over agents of the cooperative-force norm; zero at equilibria."""
    return max(float(np.linalg.norm(coop_force(i, ens, sk))) for i in range(ens.n))


def centroid_identity_residual(ens: Ensemble, sk: SigmaKernel) -> float:
    """Residual of the equilibrium centroid identity
    (N sigma_a - (N-1) sigma_r / 2) ||xbar||^2 = sigma_a sum <x_i, xbar>^2."""
    xb = centroid(ens)
    nb_sq = float(xb @ xb)
    lhs = (ens.n * sk.sigma_a - (ens.n - 1) * sk.sigma_r / 2.0) * nb_sq
    rhs = sk.sigma_a * float(np.sum((ens.x @ xb) ** 2))
    return abs(lhs - rhs)


def evaluate_record(
    ens: Ensemble,
    t: float,
    sk: SigmaKernel,
    e_c_min: float = 0.0,
    eps_anti: float = EPS_ANTI,
) -> DiagnosticsRecord:
    """Assemble the full per-snapshot record."""
    e_k = kinetic_energy(ens)
    e_c = config_energy(ens, sk)
    return DiagnosticsRecord(
        t=float(t),
        e_total=e_k + e_c - e_c_min,
        e_kinetic=e_k,
        e_config=e_c,
        alignment=alignment_measure(ens, eps_anti),
        centroid_norm=float(np.linalg.norm(centroid(ens))),
        rho=rho(ens),
        max_diameter=max_diameter(ens),
        min_pair_dist=min_pair_dist(ens),
        max_constraint_drift=constraint_drift(ens),
    )


def energies_along(x: np.ndarray, v: np.ndarray, sk: SigmaKernel, e_c_min: float = 0.0) -> np.ndarray:
    """Total energy at every snapshot of stacked trajectory arrays
    (S, N, 3); vectorized for dense-cadence logs."""
    s, n, _ = x.shape
    e_k = np.sum(v * v, axis=(1, 2)) / (2.0 * n)
    e_c = np.empty(s)
    for k in range(s):
        e_c[k] = config_energy_positions(x[k], sk)
    return e_k + e_c - e_c_min


def two_agent_equilibrium_data(
    theta: float, sk: SigmaKernel, w: TwoAgentWeights
) -> Ensemble:
    """Initial data of the two-agent parallel-circle relative equilibrium:
    both agents at polar angle theta apart on the equator, common vertical
    speed sqrt(-sigma (1 + cos theta) / 2).

    Requires sigma < 0 at that separation (repulsion-dominated), otherwise
    no real speed exists and DomainError is raised.
    """
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie strictly between 0 and pi")
    dist_sq = 2.0 - 2.0 * math.cos(theta)
    s = sigma_eval(sk, dist_sq)
    if s >= 0.0:
        raise DomainError(
            f"no relative equilibrium: sigma({dist_sq!r}) = {s!r} is nonnegative"
        )
    b = math.sqrt(-s * (1.0 + math.cos(theta)) / 2.0)
    x = np.array([[1.0, 0.0, 0.0], [math.cos(theta), math.sin(theta), 0.0]])
    v = np.array([[0.0, 0.0, b], [0.0, 0.0, b]])
    return Ensemble(x, v)


def classify(
    log,
    tol_rendezvous: float = TOL_RENDEZVOUS,
    tol_centroid: float = TOL_CENTROID,
    tail_window: float | None = None,
    tol_rho: float = TOL_RHO,
    tol_align: float = TOL_ALIGN,
    tol_plane: float = TOL_PLANE,
    tol_kinetic: float = TOL_KINETIC,
) -> RegimeLabel:
    """Label the asymptotic regime from the tail of a trajectory log.

    tail_window defaults to 20% of the simulated horizon. The log must
    cover at least twice the window. Checks run in a fixed order:
    rendezvous, uniform deployment, formation, great-circle motion.
    """
    times = np.asarray(log.times)
    if len(times) < 2:
        raise InsufficientDataError("log has fewer than two snapshots")
    horizon = float(times[-1] - times[0])
    if tail_window is None:
        tail_window = 0.2 * horizon
    if tail_window <= 0.0 or horizon < 2.0 * tail_window:
        raise InsufficientDataError(
            f"log spans {horizon!r}, need at least twice the tail window {tail_window!r}"
        )
    tail = times >= times[-1] - tail_window
    recs = [r for r, keep in zip(log.records, tail) if keep]

    if all(r.max_diameter < tol_rendezvous for r in recs):
        return RegimeLabel("rendezvous")
    if all(r.centroid_norm < tol_centroid for r in recs):
        return RegimeLabel("uniform_deployment")
    rhos = [r.rho for r in recs]
    if all(r is not None for r in rhos):
        vals = np.array(rhos, dtype=np.float64)
        if float(vals.max() - vals.min()) < tol_rho:
            return RegimeLabel("formation", r0=float(vals.mean()))
    mean_kinetic = float(np.mean([r.e_kinetic for r in recs]))
    max_align = max(r.alignment for r in recs)
    pts = log.x[tail].reshape(-1, 3)
    cov = pts.T @ pts / len(pts)
    plane_residual = float(math.sqrt(max(np.linalg.eigvalsh(cov)[0], 0.0)))
    if mean_kinetic > tol_kinetic and max_align < tol_align and plane_residual < tol_plane:
        return RegimeLabel("great_circle_motion")
    return RegimeLabel("undecided")
