"""Numerical optimization over products of spheres.

Estimates the global minimum of the configuration energy (used to shift
the total energy to be nonnegative) and finds equilibrium configurations
of the cooperative control law. Both use the same projected gradient
descent with Armijo backtracking and normalization retraction, restarted
from seeded random configurations.

The cooperative force is -N times the Riemannian gradient of the
configuration energy, so the equilibrium search is descent on the same
objective with the stopping test expressed as a force residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .diagnostics import config_energy_positions, equilibrium_residual
from .dynamics import Ensemble
from .errors import DomainError, NonConvergenceError
from .kernels import DIST_SQ_FLOOR, SigmaKernel


@dataclass(frozen=True)
class MinimizeConfig:
    max_iters: int = 50000
    grad_tol: float = 1e-8
    step0: float = 0.1
    restarts: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.grad_tol <= 0.0 or self.step0 <= 0.0:
            raise DomainError("grad_tol and step0 must be positive")
        if self.restarts < 1 or self.max_iters < 1:
            raise DomainError("need at least one restart and one iteration")


def config_energy_gradient(x: np.ndarray, sk: SigmaKernel) -> np.ndarray:
    """Riemannian gradient of the configuration energy at stacked unit
    positions: the ambient gradient projected to each tangent plane."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    g = np.empty_like(x)
    engine._config_grad_projected(x, sk.sigma_a, sk.sigma_r, sk.beta, g)
    return g


def _random_starts(n: int, cfg: MinimizeConfig):
    """Seeded uniform configurations via normalized 3D Gaussians."""
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.restarts):
        x = rng.normal(size=(n, 3))
        yield x / np.linalg.norm(x, axis=1)[:, None]


def _descend(x: np.ndarray, sk: SigmaKernel, cfg: MinimizeConfig, stop_mode: int) -> bool:
    converged = engine._descend_config_energy(
        x,
        sk.sigma_a,
        sk.sigma_r,
        sk.beta,
        DIST_SQ_FLOOR,
        cfg.max_iters,
        cfg.grad_tol,
        cfg.step0,
        stop_mode,
    )
    return bool(converged)


def minimize_config_energy(
    n: int, sk: SigmaKernel, cfg: MinimizeConfig | None = None
) -> tuple[np.ndarray, float]:
    """Estimate (argmin, min) of the configuration energy over (S^2)^N.

    Pure attraction is handled analytically: the coincident configuration
    attains energy 0 without iteration. Otherwise the best of `restarts`
    descents is returned; a restart counts only if its final Riemannian
    gradient norm is within grad_tol.
    """
    if n < 2:
        raise DomainError("need at least two agents")
    cfg = cfg or MinimizeConfig()
    if sk.sigma_r == 0.0:
        return np.tile([1.0, 0.0, 0.0], (n, 1)), 0.0
    best_x = None
    best_e = np.inf
    for x in _random_starts(n, cfg):
        if not _descend(x, sk, cfg, engine.STOP_GRAD_NORM):
            continue
        e = config_energy_positions(x, sk)
        if e < best_e:
            best_x, best_e = x, e
    if best_x is None:
        raise NonConvergenceError(
            f"no restart reached gradient tolerance {cfg.grad_tol!r}"
        )
    return best_x, float(best_e)


def find_equilibrium(n: int, sk: SigmaKernel, cfg: MinimizeConfig | None = None) -> np.ndarray:
    """Find positions where the cooperative force vanishes on every agent
    (max force norm <= grad_tol), by descending the configuration energy
    until the force residual is met. Returns the first converged restart."""
    if n < 2:
        raise DomainError("need at least two agents")
    cfg = cfg or MinimizeConfig()
    if sk.sigma_a == 0.0 and sk.sigma_r == 0.0:
        return np.tile([1.0, 0.0, 0.0], (n, 1))
    for x in _random_starts(n, cfg):
        if _descend(x, sk, cfg, engine.STOP_FORCE_RESIDUAL):
            if equilibrium_residual(Ensemble(x, np.zeros_like(x)), sk) <= cfg.grad_tol:
                return x
    raise NonConvergenceError(
        f"no restart reached force residual {cfg.grad_tol!r}"
    )
