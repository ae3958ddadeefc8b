"""Fixed-step time integration with optional structure-preserving projection.

One `step` advances an ensemble by a single dt; `simulate` runs the whole
horizon through the compiled loop, logging snapshots (with diagnostics) at
a fixed cadence plus the final time. If the horizon is not an exact
multiple of dt, a single shorter final step lands exactly on t_final.

Runs are deterministic: identical config and initial data reproduce logs
bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .diagnostics import DiagnosticsRecord, evaluate_record
from .dynamics import (
    BoostedModel,
    Ensemble,
    LSModel,
    MainModel,
    Model,
    TwoAgentModel,
    model_sigma,
)
from .errors import BlowupError, ConfigError, SingularityError
from .geometry import EPS_ANTI
from .kernels import DIST_SQ_FLOOR

# Any speed beyond this is declared divergence: the energy bound keeps true
# speeds a priori bounded, so exceeding it indicates numerical failure.
SPEED_CAP = 1e3

SCHEMES = {"euler": engine.SCHEME_EULER, "heun": engine.SCHEME_HEUN, "rk4": engine.SCHEME_RK4}
PROJECTIONS = {"none": 0, "renormalize": 1}

_KINDS = {
    "main": engine.KIND_MAIN,
    "boosted": engine.KIND_BOOSTED,
    "two_agent": engine.KIND_TWO_AGENT,
    "ls": engine.KIND_LS,
}

_PSI_KINDS = {"exp_decay": engine.PSI_EXP_DECAY, "constant": engine.PSI_CONSTANT}


@dataclass(frozen=True)
class IntegratorConfig:
    """Scheme, step size, horizon, projection mode, and output cadence."""

    dt: float = 1e-3
    t_final: float = 1.0
    scheme: str = "rk4"
    projection: str = "renormalize"
    output_every: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.dt <= 0.1:
            raise ConfigError(f"dt must lie in (0, 0.1], got {self.dt!r}")
        if self.t_final < 0.0 or (0.0 < self.t_final < self.dt):
            raise ConfigError("t_final must be 0 (log initial state only) or >= dt")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.projection not in PROJECTIONS:
            raise ConfigError(f"unknown projection {self.projection!r}")
        if self.output_every < 1:
            raise ConfigError("output_every must be >= 1")


@dataclass
class TrajectoryLog:
    """Time-indexed snapshots plus per-snapshot diagnostics and metadata."""

    times: np.ndarray                    # (S,)
    x: np.ndarray                        # (S, N, 3)
    v: np.ndarray                        # (S, N, 3)
    records: list[DiagnosticsRecord]
    meta: dict = field(default_factory=dict)

    @property
    def n_snapshots(self) -> int:
        return len(self.times)

    @property
    def n_agents(self) -> int:
        return self.x.shape[1]

    def ensemble_at(self, k: int) -> Ensemble:
        return Ensemble(self.x[k].copy(), self.v[k].copy())

    def final_ensemble(self) -> Ensemble:
        return self.ensemble_at(-1)


def pack_model(model: Model) -> tuple[int, np.ndarray]:
    """Flatten a model variant to the engine's (kind, params) encoding."""
    p = np.zeros(engine.N_PARAMS)
    p[engine.P_PSI_KIND] = engine.PSI_NONE
    p[engine.P_EPS_ANTI] = EPS_ANTI
    p[engine.P_DIST_SQ_FLOOR] = DIST_SQ_FLOOR
    if isinstance(model, (MainModel, BoostedModel)):
        p[engine.P_PSI_KIND] = _PSI_KINDS[model.psi.kind]
        p[engine.P_PSI_VALUE] = model.psi.value
        p[engine.P_SIGMA_A] = model.sigma.sigma_a
        p[engine.P_SIGMA_R] = model.sigma.sigma_r
        p[engine.P_BETA] = model.sigma.beta
        if isinstance(model, BoostedModel):
            p[engine.P_A] = model.boost.b
    elif isinstance(model, TwoAgentModel):
        p[engine.P_SIGMA_A] = model.sigma.sigma_a
        p[engine.P_SIGMA_R] = model.sigma.sigma_r
        p[engine.P_BETA] = model.sigma.beta
        p[engine.P_A] = float(model.weights.n)
        p[engine.P_B] = float(model.weights.n_total)
    elif isinstance(model, LSModel):
        p[engine.P_A] = model.params.k_v
        p[engine.P_B] = model.params.k_a
        p[engine.P_C] = model.params.k_r
        p[engine.P_D] = model.params.k_0
    else:
        raise ConfigError(f"unknown model variant {model!r}")
    return _KINDS[model.kind], p


def _raise_status(status: int, context: str) -> None:
    if status == engine.SINGULAR:
        raise SingularityError(f"agents collided during {context}")
    if status == engine.BLOWUP:
        raise BlowupError(f"speed exceeded {SPEED_CAP:g} during {context}")


def step(ens: Ensemble, model: Model, cfg: IntegratorConfig) -> Ensemble:
    """Advance the ensemble by one step of cfg.dt; the input is not mutated."""
    kind, p = pack_model(model)
    x = ens.x.copy()
    v = ens.v.copy()
    status = engine._step_once(
        kind, SCHEMES[cfg.scheme], x, v, cfg.dt, p, PROJECTIONS[cfg.projection]
    )
    if status == engine.OK and not engine._speeds_ok(v, SPEED_CAP):
        status = engine.BLOWUP
    _raise_status(status, "step")
    return Ensemble(x, v)


def _split_horizon(t_final: float, dt: float) -> tuple[int, float]:
    """Number of full dt steps plus the shorter remainder step (0 if the
    horizon is a multiple of dt up to roundoff)."""
    if t_final == 0.0:
        return 0, 0.0
    ratio = t_final / dt
    n_round = int(round(ratio))
    if abs(t_final - n_round * dt) <= 1e-9 * max(dt, t_final):
        return n_round, 0.0
    n_full = int(math.floor(ratio))
    return n_full, t_final - n_full * dt


def simulate(
    ens0: Ensemble,
    model: Model,
    cfg: IntegratorConfig,
    e_c_min: float = 0.0,
    meta: dict | None = None,
    record_diagnostics: bool = True,
) -> TrajectoryLog:
    """Integrate from ens0 over [0, t_final], returning the snapshot log.

    Snapshots are taken at t = 0, every output_every steps, and the final
    time; each carries a DiagnosticsRecord (skipped when record_diagnostics
    is off, for dense-cadence runs analyzed directly from the arrays). On a
    numerical failure the raised error carries the snapshots collected so
    far as `partial_log`.
    """
    kind, p = pack_model(model)
    n_full, rem = _split_horizon(cfg.t_final, cfg.dt)

    n_snap = 1 + n_full // cfg.output_every
    if rem > 0.0 or (n_full > 0 and n_full % cfg.output_every != 0):
        n_snap += 1

    n = ens0.n
    ts = np.zeros(n_snap)
    xs = np.zeros((n_snap, n, 3))
    vs = np.zeros((n_snap, n, 3))
    x = ens0.x.copy()
    v = ens0.v.copy()
    status, n_logged, steps_done = engine._simulate_loop(
        kind,
        SCHEMES[cfg.scheme],
        x,
        v,
        cfg.dt,
        n_full,
        rem,
        cfg.output_every,
        PROJECTIONS[cfg.projection],
        SPEED_CAP,
        p,
        ts,
        xs,
        vs,
    )

    sk = model_sigma(model)
    records = []
    if record_diagnostics:
        records = [
            evaluate_record(Ensemble(xs[k], vs[k]), ts[k], sk, e_c_min)
            for k in range(n_logged)
        ]
    log = TrajectoryLog(
        times=ts[:n_logged].copy(),
        x=xs[:n_logged].copy(),
        v=vs[:n_logged].copy(),
        records=records,
        meta=dict(meta or {}),
    )
    log.meta.setdefault("e_c_min", e_c_min)
    log.meta["steps_done"] = int(steps_done)

    if status != engine.OK:
        log.meta["status"] = "failed"
        try:
            _raise_status(status, f"simulation (step {steps_done + 1})")
        except (SingularityError, BlowupError) as err:
            err.partial_log = log
            raise
    log.meta["status"] = "ok"
    return log
