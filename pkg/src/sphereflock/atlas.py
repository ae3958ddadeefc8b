"""Threshold constants of the convergence theory and the regime battery.

The battery replays the classified asymptotic behaviors as concrete runs
with measured quantities and explicit tolerances: rendezvous from a
low-energy cluster, formation at two repulsion strengths, uniform
deployment at and beyond the boundary, and the two-agent parallel-circle
relative equilibrium (the dedicated N=2 check; N=2 is excluded from the
trichotomy cases because the classification provably fails there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import InitialData, RunConfig
from .errors import SphereflockError
from .integrate import IntegratorConfig
from .kernels import PsiKernel, SigmaKernel


@dataclass(frozen=True)
class ThresholdSet:
    """Exact threshold constants for N agents and a sigma kernel.

    e_c0:                 rendezvous energy bound sigma_a (N-1) / N^2
    rho_target:           formation spread (N-1) sigma_r / (2 sigma_a),
                          inf when sigma_a = 0 (flagged undefined)
    deployment_boundary:  sigma_r boundary 2 N sigma_a / (N-1)
    """

    e_c0: float
    rho_target: float
    deployment_boundary: float


def thresholds(n: int, sk: SigmaKernel) -> ThresholdSet:
    if n < 2:
        raise SphereflockError("thresholds need at least two agents")
    e_c0 = sk.sigma_a * (n - 1) / (n * n)
    if sk.sigma_a > 0.0:
        rho_target = (n - 1) * sk.sigma_r / (2.0 * sk.sigma_a)
    else:
        rho_target = math.inf if sk.sigma_r > 0.0 else math.nan
    boundary = 2.0 * n * sk.sigma_a / (n - 1)
    return ThresholdSet(e_c0=e_c0, rho_target=rho_target, deployment_boundary=boundary)


def _case_rendezvous(seed: int) -> dict:
    from .diagnostics import total_energy
    from .runner import build_initial, run

    cfg = RunConfig(
        model="main",
        n_agents=6,
        psi=PsiKernel.exp_decay(2.0),
        sigma=SigmaKernel(1.0, 0.0),
        initial=InitialData(kind="clustered", seed=seed),
        integrator=IntegratorConfig(t_final=100.0, output_every=1000),
        label="battery_rendezvous",
    )
    bound = thresholds(6, cfg.sigma).e_c0
    e0 = total_energy(build_initial(cfg), cfg.sigma, 0.0)
    log = run(cfg)
    final = log.records[-1]
    observed = max(final.max_diameter, final.alignment)
    return {
        "name": "rendezvous_low_energy",
        "observed": observed,
        "tolerance": 1e-3,
        "passed": observed <= 1e-3 and e0 < bound,
        "details": {
            "initial_energy": e0,
            "energy_bound": bound,
            "max_diameter": final.max_diameter,
            "alignment": final.alignment,
        },
        "sim_time": 100.0,
    }


def _case_formation(sigma_r: float, band: float) -> dict:
    from .runner import _tail_rho_mean, run
    from .scenarios import scenario

    cfg = scenario(f"fig3_sr{sigma_r:g}")
    target = thresholds(cfg.n_agents, cfg.sigma).rho_target
    log = run(cfg)
    rho_mean = _tail_rho_mean(log)
    observed = abs(rho_mean - target)
    return {
        "name": f"formation_sr{sigma_r:g}",
        "observed": observed,
        "tolerance": band,
        "passed": observed <= band,
        "details": {"rho_tail_mean": rho_mean, "rho_target": target},
        "sim_time": cfg.integrator.t_final,
    }


def _case_deployment(name: str, sigma_a: float, sigma_r: float, seed: int) -> dict:
    from .runner import run

    cfg = RunConfig(
        model="main",
        n_agents=6,
        psi=PsiKernel.exp_decay(2.0),
        sigma=SigmaKernel(sigma_a, sigma_r),
        initial=InitialData(kind="random", seed=seed),
        integrator=IntegratorConfig(t_final=200.0, output_every=1000),
        label=f"battery_{name}",
    )
    log = run(cfg)
    observed = log.records[-1].centroid_norm
    return {
        "name": name,
        "observed": observed,
        "tolerance": 1e-3,
        "passed": observed <= 1e-3,
        "details": {"centroid_norm": observed},
        "sim_time": 200.0,
    }


def _case_two_agent() -> dict:
    from .runner import run
    from .scenarios import scenario

    log = run(scenario("two_agent_eq"))
    dists = np.linalg.norm(log.x[:, 0] - log.x[:, 1], axis=1)
    speeds = np.linalg.norm(log.v, axis=2)
    observed = max(
        float(dists.max() - dists.min()), float(speeds.max() - speeds.min())
    )
    return {
        "name": "two_agent_parallel_circles",
        "observed": observed,
        "tolerance": 1e-4,
        "passed": observed <= 1e-4,
        "details": {
            "distance_spread": float(dists.max() - dists.min()),
            "speed_spread": float(speeds.max() - speeds.min()),
        },
        "sim_time": 10.0,
    }


def regime_battery(seed: int = 0, budget: float = 1500.0) -> dict:
    """Run the scripted regime battery; budget caps total simulated time.

    Cases are considered in a fixed order and run when they still fit in
    the remaining budget; the rest are reported as skipped. Verdicts are
    deterministic for a fixed seed.
    """
    plan = [
        (100.0, lambda: _case_rendezvous(seed)),
        (400.0, lambda: _case_formation(0.3, 0.075)),
        (400.0, lambda: _case_formation(0.5, 0.10)),
        (200.0, lambda: _case_deployment("deployment_pure_repulsion", 0.0, 1.0, seed)),
        (200.0, lambda: _case_deployment("deployment_strong_repulsion", 1.0, 3.0, seed)),
        (10.0, lambda: _case_two_agent()),
    ]
    cases = []
    used = 0.0
    for cost, builder in plan:
        if used + cost > budget:
            cases.append(
                {"name": f"skipped_case_{len(cases)}", "observed": math.nan,
                 "tolerance": math.nan, "passed": False, "skipped": True,
                 "details": {}, "sim_time": cost}
            )
            continue
        used += cost
        case = builder()
        case["skipped"] = False
        cases.append(case)
    executed = [c for c in cases if not c["skipped"]]
    return {
        "cases": cases,
        "simulated_time": used,
        "all_passed": bool(executed) and all(c["passed"] for c in executed),
    }
