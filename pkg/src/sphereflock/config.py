"""Run configuration: model selection, kernels, initial data, integration.

A RunConfig is a plain serializable description of one simulation. All
state flows through these objects (no environment variables), so a config
JSON plus the package version pins a run exactly.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from .dynamics import (
    BoostedModel,
    BoostParams,
    LSModel,
    LSParams,
    MainModel,
    Model,
    TwoAgentModel,
    TwoAgentWeights,
)
from .errors import ConfigError
from .integrate import IntegratorConfig
from .kernels import PsiKernel, SigmaKernel


@dataclass(frozen=True)
class InitialData:
    """Where the initial ensemble comes from.

    kinds:
      explicit      x and v given literally (lists of 3-vectors)
      paper_n6      the fixed six-agent reference dataset
      random        positions uniform on the sphere, velocities uniform in
                    [-3, 3]^3, both admissibilized; reproducible via seed
      clustered     positions inside a spherical cap (angular radius
                    cap_radius) with tangent speeds <= max_speed
      two_agent_eq  the two-agent relative-equilibrium data at angle theta

    Raw data of every kind is post-processed onto the constraint manifold
    (normalize positions, then project velocities).
    """

    kind: str
    x: tuple | None = None
    v: tuple | None = None
    seed: int = 0
    cap_radius: float = 0.2
    max_speed: float = 0.05
    theta: float = float(np.pi / 2)

    _KINDS = ("explicit", "paper_n6", "random", "clustered", "two_agent_eq")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ConfigError(f"unknown initial-data kind {self.kind!r}")
        if self.kind == "explicit":
            if self.x is None or self.v is None:
                raise ConfigError("explicit initial data needs both x and v")
            object.__setattr__(self, "x", _freeze(self.x))
            object.__setattr__(self, "v", _freeze(self.v))


def _freeze(arr) -> tuple:
    return tuple(tuple(float(c) for c in row) for row in np.atleast_2d(arr))


_MODEL_KINDS = ("main", "boosted", "two_agent", "ls")


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one run."""

    model: str
    n_agents: int
    initial: InitialData
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    psi: PsiKernel | None = None
    sigma: SigmaKernel | None = None
    boost: BoostParams | None = None
    ls: LSParams | None = None
    weights: TwoAgentWeights | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.model not in _MODEL_KINDS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.n_agents < 1:
            raise ConfigError("n_agents must be at least 1")
        needs = {
            "main": ("psi", "sigma"),
            "boosted": ("psi", "sigma", "boost"),
            "two_agent": ("sigma", "weights"),
            "ls": ("ls",),
        }[self.model]
        all_extras = ("psi", "sigma", "boost", "ls", "weights")
        for name in all_extras:
            have = getattr(self, name) is not None
            if name in needs and not have:
                raise ConfigError(f"model {self.model!r} requires {name}")
            if name not in needs and have:
                raise ConfigError(f"model {self.model!r} does not take {name}")
        if self.model == "two_agent" and self.n_agents != 2:
            raise ConfigError("two_agent model runs with exactly 2 agents")

    def build_model(self) -> Model:
        if self.model == "main":
            return MainModel(self.psi, self.sigma)
        if self.model == "boosted":
            return BoostedModel(self.psi, self.sigma, self.boost)
        if self.model == "two_agent":
            return TwoAgentModel(self.sigma, self.weights)
        return LSModel(self.ls)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        try:
            return cls(
                model=d["model"],
                n_agents=int(d["n_agents"]),
                initial=InitialData(**{k: _detuple(v) for k, v in d["initial"].items()}),
                integrator=IntegratorConfig(**d.get("integrator", {})),
                psi=PsiKernel(**d["psi"]) if d.get("psi") else None,
                sigma=SigmaKernel(**d["sigma"]) if d.get("sigma") else None,
                boost=BoostParams(**d["boost"]) if d.get("boost") else None,
                ls=LSParams(**d["ls"]) if d.get("ls") else None,
                weights=TwoAgentWeights(**d["weights"]) if d.get("weights") else None,
                label=d.get("label", ""),
            )
        except (KeyError, TypeError) as err:
            raise ConfigError(f"malformed run config: {err}") from err


def _detuple(v):
    if isinstance(v, list):
        return tuple(tuple(row) if isinstance(row, list) else row for row in v)
    return v


def set_by_path(cfg: RunConfig, path: str, value: float) -> RunConfig:
    """Return a copy of cfg with the dotted scalar field replaced,
    e.g. set_by_path(cfg, "sigma.sigma_r", 0.3)."""
    parts = path.split(".")
    if not parts or not all(parts):
        raise ConfigError(f"bad parameter path {path!r}")

    def rebuild(obj, parts):
        name = parts[0]
        if not hasattr(obj, name):
            raise ConfigError(f"{type(obj).__name__} has no field {name!r}")
        if len(parts) == 1:
            current = getattr(obj, name)
            if current is not None and not isinstance(current, (int, float, str)):
                raise ConfigError(f"path {path!r} does not address a scalar field")
            return replace(obj, **{name: value})
        child = getattr(obj, name)
        if child is None:
            raise ConfigError(f"field {name!r} is not set on this config")
        return replace(obj, **{name: rebuild(child, parts[1:])})

    return rebuild(cfg, parts)
