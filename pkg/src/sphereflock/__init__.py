"""Second-order flocking dynamics of N agents on the unit sphere.

Simulation engine, diagnostics, energy-landscape tools, scenario library,
and a CLI for reproducible experiments.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: F401
    AgentState,
    BoostedModel,
    BoostParams,
    Ensemble,
    LSModel,
    LSParams,
    MainModel,
    TwoAgentModel,
    TwoAgentWeights,
)
from .integrate import IntegratorConfig, TrajectoryLog, simulate, step  # noqa: F401
from .kernels import PsiKernel, SigmaKernel  # noqa: F401
