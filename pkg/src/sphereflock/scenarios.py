"""Named scenario registry: the reference experiment configurations.

Scalar scenarios return a RunConfig; the two parameter families return a
dict keyed by the varying value. Family members are also registered
individually (e.g. "fig3_sr0.3") for the CLI.
"""

from __future__ import annotations

import numpy as np

from .config import InitialData, RunConfig
from .dynamics import BoostParams, LSParams, TwoAgentWeights
from .errors import UnknownScenarioError
from .integrate import IntegratorConfig
from .kernels import PsiKernel, SigmaKernel

# Fixed six-agent reference initial data (positions on the sphere, tangent
# velocities, both to four decimals; admissibilization cleans up the
# rounding residue).
PAPER_N6_X = (
    (-0.1192, 0.5108, -0.8514),
    (0.8547, -0.3671, 0.3671),
    (0.7076, 0.2235, 0.6704),
    (0.3600, 0.7364, 0.5728),
    (0.8977, -0.4406, 0.0000),
    (0.8754, -0.2398, -0.4197),
)
PAPER_N6_V = (
    (-1.1540, -1.7264, -0.8743),
    (-1.3068, 0.0568, 3.0000),
    (0.9331, 1.5789, -1.5113),
    (2.7989, 0.7976, -2.7848),
    (-1.0254, -2.0892, 2.5773),
    (0.4591, 0.8375, 0.4789),
)

FIG3_SIGMA_R = (0.0, 0.01, 0.04, 0.08, 0.1, 0.2, 0.3, 0.5)
FIG7_BETA = (0.0, 0.5, 1.0, 1.25, 1.26, 1.5, 2.0, 5.0)

_PAPER_START = InitialData(kind="paper_n6")


def _integ(t_final: float, output_every: int = 100) -> IntegratorConfig:
    return IntegratorConfig(t_final=t_final, output_every=output_every)


def _fig1() -> RunConfig:
    return RunConfig(
        model="main",
        n_agents=6,
        psi=PsiKernel.constant(1.0),
        sigma=SigmaKernel(0.0, 0.0),
        initial=_PAPER_START,
        integrator=_integ(50.0),
        label="fig1",
    )


def _fig2() -> RunConfig:
    return RunConfig(
        model="main",
        n_agents=6,
        psi=PsiKernel.exp_decay(2.0),
        sigma=SigmaKernel(1.0, 0.5),
        initial=_PAPER_START,
        integrator=_integ(100.0),
        label="fig2",
    )


def _fig3(sigma_r: float) -> RunConfig:
    return RunConfig(
        model="main",
        n_agents=6,
        psi=PsiKernel.exp_decay(2.0),
        sigma=SigmaKernel(1.0, sigma_r),
        initial=_PAPER_START,
        integrator=_integ(400.0, output_every=400),
        label=f"fig3_sr{sigma_r:g}",
    )


def _fig7(beta: float) -> RunConfig:
    return RunConfig(
        model="main",
        n_agents=6,
        psi=PsiKernel.exp_decay(2.0),
        sigma=SigmaKernel(5.0, 0.5, beta),
        initial=_PAPER_START,
        integrator=_integ(50.0),
        label=f"fig7_beta{beta:g}",
    )


def _fig9() -> RunConfig:
    return RunConfig(
        model="boosted",
        n_agents=6,
        psi=PsiKernel.exp_decay(2.0),
        sigma=SigmaKernel(1.0, 0.5),
        boost=BoostParams(0.2),
        initial=_PAPER_START,
        integrator=_integ(90.0),
        label="fig9",
    )


def _fig0_ls() -> RunConfig:
    return RunConfig(
        model="ls",
        n_agents=6,
        ls=LSParams(k_v=7.0, k_a=1.0, k_r=0.1, k_0=1e4),
        initial=InitialData(kind="random", seed=0),
        integrator=_integ(200.0),
        label="fig0_ls",
    )


def _two_agent_eq(theta: float = float(np.pi / 2)) -> RunConfig:
    return RunConfig(
        model="two_agent",
        n_agents=2,
        sigma=SigmaKernel(0.0, 1.0),
        weights=TwoAgentWeights(n_total=2, n=1),
        initial=InitialData(kind="two_agent_eq", theta=theta),
        integrator=_integ(10.0, output_every=10),
        label="two_agent_eq",
    )


_SCALAR = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig9": _fig9,
    "fig0_ls": _fig0_ls,
    "two_agent_eq": _two_agent_eq,
}
for _sr in FIG3_SIGMA_R:
    _SCALAR[f"fig3_sr{_sr:g}"] = (lambda s=_sr: _fig3(s))
for _b in FIG7_BETA:
    _SCALAR[f"fig7_beta{_b:g}"] = (lambda b=_b: _fig7(b))

_FAMILIES = {
    "fig3_family": lambda: {s: _fig3(s) for s in FIG3_SIGMA_R},
    "fig7_family": lambda: {b: _fig7(b) for b in FIG7_BETA},
}


def scenario(name: str):
    """Look up a scenario by name.

    Returns a RunConfig, or a dict keyed by the varying parameter for the
    family names. Raises UnknownScenarioError for anything else.
    """
    if name in _SCALAR:
        return _SCALAR[name]()
    if name in _FAMILIES:
        return _FAMILIES[name]()
    raise UnknownScenarioError(
        f"unknown scenario {name!r}; known: {', '.join(scenario_names())}"
    )


def two_agent_eq(theta: float) -> RunConfig:
    """The two-agent relative-equilibrium scenario at a chosen angle."""
    return _two_agent_eq(theta)


def scenario_names() -> list[str]:
    return sorted(_SCALAR) + sorted(_FAMILIES)
