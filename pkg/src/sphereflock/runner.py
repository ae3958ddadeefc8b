"""Run orchestration: initial data, persistence, sweeps, verification.

File layout of a persisted run directory:

  trajectory.csv    one row per agent per snapshot,
                    header t,agent,x0,x1,x2,v0,v1,v2, 17 significant digits
  diagnostics.csv   one row per snapshot, undefined rho as an empty field
  metadata.json     full config echo plus everything needed to rerun

All files are written atomically (temp file, then rename).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, engine
from .config import InitialData, RunConfig, set_by_path
from .diagnostics import classify, two_agent_equilibrium_data
from .dynamics import Ensemble, Model, admissibilize, model_sigma
from .errors import BlowupError, ConfigError, SingularityError, SphereflockError
from .integrate import TrajectoryLog, pack_model, simulate
from .kernels import DIST_SQ_FLOOR
from .landscape import MinimizeConfig, config_energy_gradient, minimize_config_energy
from .scenarios import PAPER_N6_V, PAPER_N6_X


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

def _random_unit(rng) -> np.ndarray:
    while True:
        x = rng.uniform(-1.0, 1.0, 3)
        if np.linalg.norm(x) > 1e-6:
            return x / np.linalg.norm(x)


def _clustered_data(n: int, seed: int, cap_radius: float, max_speed: float):
    """Positions inside a spherical cap of the given angular radius around a
    random center, tangent velocities with speeds at most max_speed."""
    rng = np.random.default_rng(seed)
    center = _random_unit(rng)
    # orthonormal frame (center, p, q)
    helper = np.array([1.0, 0.0, 0.0])
    if abs(center @ helper) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    p = np.cross(center, helper)
    p /= np.linalg.norm(p)
    q = np.cross(center, p)
    x = np.empty((n, 3))
    v = np.empty((n, 3))
    for i in range(n):
        ang = cap_radius * math.sqrt(rng.uniform())  # area-uniform over a small cap
        azi = rng.uniform(0.0, 2.0 * math.pi)
        x[i] = math.cos(ang) * center + math.sin(ang) * (math.cos(azi) * p + math.sin(azi) * q)
        raw = rng.uniform(-1.0, 1.0, 3)
        raw -= (raw @ x[i]) * x[i]
        nr = np.linalg.norm(raw)
        if nr > 1e-12:
            v[i] = raw / nr * (max_speed * rng.uniform())
        else:
            v[i] = 0.0
    return x, v


def build_initial(cfg: RunConfig) -> Ensemble:
    """Construct the initial ensemble described by cfg.initial and
    post-process it onto the constraint manifold."""
    init = cfg.initial
    if init.kind == "explicit":
        x, v = np.array(init.x), np.array(init.v)
    elif init.kind == "paper_n6":
        if cfg.n_agents != 6:
            raise ConfigError("the reference dataset has exactly 6 agents")
        x, v = np.array(PAPER_N6_X), np.array(PAPER_N6_V)
    elif init.kind == "random":
        rng = np.random.default_rng(init.seed)
        x = np.array([_random_unit(rng) for _ in range(cfg.n_agents)])
        v = rng.uniform(-3.0, 3.0, (cfg.n_agents, 3))
    elif init.kind == "clustered":
        x, v = _clustered_data(cfg.n_agents, init.seed, init.cap_radius, init.max_speed)
    elif init.kind == "two_agent_eq":
        if cfg.model != "two_agent":
            raise ConfigError("two_agent_eq initial data belongs to the two_agent model")
        ens = two_agent_equilibrium_data(init.theta, cfg.sigma, cfg.weights)
        x, v = ens.x, ens.v
    else:  # unreachable; InitialData validates
        raise ConfigError(f"unknown initial-data kind {init.kind!r}")
    if x.shape[0] != cfg.n_agents:
        raise ConfigError(
            f"initial data has {x.shape[0]} agents, config says {cfg.n_agents}"
        )
    ens = admissibilize(x, v)
    sk = model_sigma(cfg.build_model())
    if sk.singular and ens.n >= 2:
        diff = ens.x[:, None, :] - ens.x[None, :, :]
        d_sq = np.sum(diff * diff, axis=2)
        d_sq[np.eye(ens.n, dtype=bool)] = np.inf
        if float(d_sq.min()) <= DIST_SQ_FLOOR:
            raise ConfigError(
                "initial positions must be pairwise distinct when repulsion is active"
            )
    return ens


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trajectory_csv(path: Path, log: TrajectoryLog) -> None:
    lines = ["t,agent,x0,x1,x2,v0,v1,v2"]
    for k in range(log.n_snapshots):
        t = _fmt(log.times[k])
        for a in range(log.n_agents):
            xs = ",".join(_fmt(c) for c in log.x[k, a])
            vs = ",".join(_fmt(c) for c in log.v[k, a])
            lines.append(f"{t},{a},{xs},{vs}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_diagnostics_csv(path: Path, log: TrajectoryLog) -> None:
    lines = [
        "t,e_total,e_kinetic,e_config,alignment,centroid_norm,rho,"
        "max_diameter,min_pair_dist,max_constraint_drift"
    ]
    for r in log.records:
        rho = "" if r.rho is None else _fmt(r.rho)
        lines.append(
            ",".join(
                [
                    _fmt(r.t),
                    _fmt(r.e_total),
                    _fmt(r.e_kinetic),
                    _fmt(r.e_config),
                    _fmt(r.alignment),
                    _fmt(r.centroid_norm),
                    rho,
                    _fmt(r.max_diameter),
                    _fmt(r.min_pair_dist),
                    _fmt(r.max_constraint_drift),
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def load_trajectory_csv(path: Path):
    """Parse a trajectory CSV back into (times, x, v) arrays; exact
    round-trip of the 17-digit format."""
    rows = Path(path).read_text().strip().split("\n")[1:]
    parsed = [row.split(",") for row in rows]
    n_agents = max(int(r[1]) for r in parsed) + 1
    n_snap = len(parsed) // n_agents
    times = np.empty(n_snap)
    x = np.empty((n_snap, n_agents, 3))
    v = np.empty((n_snap, n_agents, 3))
    for idx, r in enumerate(parsed):
        k, a = divmod(idx, n_agents)
        times[k] = float(r[0])
        x[k, a] = [float(c) for c in r[2:5]]
        v[k, a] = [float(c) for c in r[5:8]]
    return times, x, v


def write_metadata(path: Path, meta: dict) -> None:
    _atomic_write(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def landscape_minimum(cfg: RunConfig) -> tuple[float, float]:
    """(e_c_min, gradient norm at the minimizer) for the run's kernel."""
    sk = model_sigma(cfg.build_model())
    if sk.sigma_r == 0.0 or cfg.n_agents < 2:
        return 0.0, 0.0
    x_min, e_min = minimize_config_energy(cfg.n_agents, sk, MinimizeConfig())
    grad = config_energy_gradient(x_min, sk)
    return e_min, float(np.sqrt(np.sum(grad * grad)))


def _run_warnings(cfg: RunConfig) -> list[str]:
    warnings = []
    if cfg.psi is not None and not cfg.psi.admissible:
        warnings.append("non-admissible psi: psi(2) != 0")
    if cfg.model == "ls":
        warnings.append("comparison model assumes the complete graph with unit edge weights")
    return warnings


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> TrajectoryLog:
    """Simulate one config; persist trajectory, diagnostics, and metadata
    when out_dir is given. Numerical failures are persisted as partial
    outputs (flagged in metadata) and re-raised with run context."""
    model = cfg.build_model()
    ens0 = build_initial(cfg)
    e_c_min, grad_norm = landscape_minimum(cfg)
    meta = {
        "config": cfg.to_dict(),
        "code_version": __version__,
        "e_c_min": e_c_min,
        "e_c_min_grad_norm": grad_norm,
        "warnings": _run_warnings(cfg),
        "partial": False,
        "error": None,
    }
    try:
        log = simulate(ens0, model, cfg.integrator, e_c_min=e_c_min, meta=meta)
    except (SingularityError, BlowupError) as err:
        partial = getattr(err, "partial_log", None)
        if partial is not None:
            partial.meta.update(partial=True, error=str(err), snapshots=partial.n_snapshots)
            if out_dir is not None:
                _persist(Path(out_dir), partial)
        wrapped = type(err)(f"{cfg.label or cfg.model}: {err}")
        wrapped.partial_log = partial
        raise wrapped from err
    log.meta["snapshots"] = log.n_snapshots
    if out_dir is not None:
        _persist(Path(out_dir), log)
    return log


def _persist(out_dir: Path, log: TrajectoryLog) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / "trajectory.csv", log)
    write_diagnostics_csv(out_dir / "diagnostics.csv", log)
    write_metadata(out_dir / "metadata.json", log.meta)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _tail_rho_mean(log: TrajectoryLog) -> float:
    times = log.times
    tail = times >= times[-1] - 0.2 * (times[-1] - times[0])
    vals = [r.rho for r, keep in zip(log.records, tail) if keep]
    if any(v is None for v in vals) or not vals:
        return math.nan
    return float(np.mean(vals))


def _sweep_one(args) -> dict:
    index, base, param_path, value, out_dir = args
    row = {"index": index, "label": base.label, "status": "ok", "error": ""}
    try:
        cfg = set_by_path(base, param_path, float(value))
        row["label"] = cfg.label
        log = run(cfg, out_dir)
        row["max_diameter"] = log.records[-1].max_diameter
        row["rho_tail_mean"] = _tail_rho_mean(log)
        label = classify(log)
        row["regime"] = label.kind
        row["r0"] = label.r0 if label.r0 is not None else math.nan
    except SphereflockError as err:
        row.update(status="failed", error=str(err),
                   max_diameter=math.nan, rho_tail_mean=math.nan,
                   regime="", r0=math.nan)
    return row


def sweep(
    base: RunConfig,
    param_path: str,
    values,
    out_dir: str | Path | None = None,
    jobs: int = 1,
) -> list[dict]:
    """Run base with the dotted scalar field set to each value; aggregate
    final diameter, tail-mean rho, and the regime label into one report
    (written as sweep.csv under out_dir when given).

    Individual failures are recorded per row and do not stop the sweep.
    Rows are keyed by value order, so results are independent of the
    parallelism degree.
    """
    tasks = []
    for i, value in enumerate(values):
        sub = None
        if out_dir is not None:
            tag = param_path.replace(".", "_")
            sub = Path(out_dir) / f"run_{i:03d}_{tag}_{value:g}"
        tasks.append((i, base, param_path, value, sub))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    rows.sort(key=lambda r: r["index"])
    for row, value in zip(rows, values):
        row["value"] = float(value)

    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        header = "index,value,label,status,max_diameter,rho_tail_mean,regime,r0,error"
        lines = [header]
        for r in rows:
            lines.append(
                f"{r['index']},{_fmt(r['value'])},{r['label']},{r['status']},"
                f"{_fmt(r.get('max_diameter', math.nan))},{_fmt(r.get('rho_tail_mean', math.nan))},"
                f"{r.get('regime', '')},{_fmt(r.get('r0', math.nan))},{r['error']}"
            )
        _atomic_write(Path(out_dir) / "sweep.csv", "\n".join(lines) + "\n")
    return rows


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

def fd_energy_rate(ens: Ensemble, model: Model, e_c_min: float, h: float = 1e-5) -> float:
    """Centered finite-difference dE/dt at a state, via one unprojected
    integrator microstep of +/- h."""
    from .diagnostics import total_energy

    kind, p = pack_model(model)
    sk = model_sigma(model)
    energies = []
    for signed in (h, -h):
        x = ens.x.copy()
        v = ens.v.copy()
        status = engine._step_once(kind, engine.SCHEME_RK4, x, v, signed, p, 0)
        if status != engine.OK:
            raise SingularityError("finite-difference probe failed")
        energies.append(total_energy(Ensemble(x, v), sk, e_c_min))
    return (energies[0] - energies[1]) / (2.0 * h)


def _item(name: str, tolerance: float, observed: float, ok: bool | None = None) -> dict:
    passed = bool(observed <= tolerance) if ok is None else bool(ok)
    return {"name": name, "tolerance": tolerance, "observed": observed, "passed": passed}


def verify(include_battery: bool = False, seed: int = 0) -> dict:
    """Run the invariant suite; returns {"items": [...], "all_passed": bool}.

    Covers rotation algebra, the geodesic oracle, constraint drift, energy
    monotonicity, the dissipation identity, the rho identity, and the
    two-agent relative equilibrium. With include_battery, the regime
    battery cases are appended.
    """
    from .diagnostics import rho, rho_from_identity
    from .dynamics import MainModel
    from .geometry import rotation_matrix
    from .integrate import IntegratorConfig
    from .kernels import PsiKernel, SigmaKernel
    from .scenarios import scenario

    items = []
    rng = np.random.default_rng(seed)

    # rotation algebra on random non-antipodal unit pairs
    worst = 0.0
    for _ in range(1000):
        x1 = _random_unit(rng)
        x2 = _random_unit(rng)
        if np.linalg.norm(x1 + x2) <= 1e-6:
            continue
        r = rotation_matrix(x1, x2)
        worst = max(
            worst,
            float(np.max(np.abs(r.T @ r - np.eye(3)))),
            float(np.max(np.abs(r @ x1 - x2))),
            float(np.max(np.abs(r @ np.cross(x1, x2) - np.cross(x1, x2)))),
            float(np.max(np.abs(r @ x2 - (2.0 * (x1 @ x2) * x2 - x1)))),
        )
    items.append(_item("rotation_algebra", 1e-12, worst))

    # geodesic oracle
    ens = Ensemble(np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    free = MainModel(PsiKernel.constant(0.0), SigmaKernel(0.0, 0.0))
    gcfg = IntegratorConfig(dt=1e-3, t_final=math.pi / 2.0, projection="none",
                            output_every=10**9)
    glog = simulate(ens, free, gcfg)
    err = max(
        float(np.linalg.norm(glog.x[-1, 0] - [0.0, 1.0, 0.0])),
        float(np.linalg.norm(glog.v[-1, 0] - [-1.0, 0.0, 0.0])),
    )
    items.append(_item("geodesic_final_state", 1e-8, err))

    # fig2 reference run, structure preservation and energy behavior
    cfg2 = scenario("fig2")
    log2 = run(cfg2)
    pos_err = float(np.max(np.abs(np.linalg.norm(log2.x, axis=2) - 1.0)))
    tan_err = float(np.max(np.abs(np.sum(log2.x * log2.v, axis=2))))
    items.append(_item("constraint_position_norm", 1e-12, pos_err))
    items.append(_item("constraint_tangency", 1e-10, tan_err))

    e_c_min = log2.meta["e_c_min"]
    energies = np.array([r.e_total for r in log2.records])
    max_rise = float(np.max(np.diff(energies), initial=0.0))
    items.append(_item("energy_monotonicity", 1e-8, max_rise))

    model2 = cfg2.build_model()
    sk2 = model_sigma(model2)
    from .diagnostics import energy_rate_identity
    worst_fd = 0.0
    sample = np.linspace(0, log2.n_snapshots - 1, 50).astype(int)
    for k in sample:
        state = log2.ensemble_at(int(k))
        fd = fd_energy_rate(state, model2, e_c_min)
        ident = energy_rate_identity(state, cfg2.psi)
        worst_fd = max(worst_fd, abs(fd - ident))
    items.append(_item("dissipation_identity", 1e-8, worst_fd))

    # rho identity on random ensembles
    worst_rho = 0.0
    count = 0
    while count < 1000:
        x = np.array([_random_unit(rng) for _ in range(6)])
        e = Ensemble(x, np.zeros_like(x))
        if float(np.linalg.norm(x.mean(axis=0))) <= 1e-3:
            continue
        count += 1
        worst_rho = max(worst_rho, abs(rho(e) - rho_from_identity(e)))
    items.append(_item("rho_identity", 1e-10, worst_rho))

    # two-agent relative equilibrium holds distance and speeds
    cfg_two = scenario("two_agent_eq")
    log_two = run(cfg_two)
    dists = np.linalg.norm(log_two.x[:, 0] - log_two.x[:, 1], axis=1)
    speeds = np.linalg.norm(log_two.v, axis=2)
    spread = max(
        float(dists.max() - dists.min()),
        float(speeds.max() - speeds.min()),
    )
    items.append(_item("two_agent_equilibrium", 1e-4, spread))

    # rendezvous conclusion at clustered low-energy start
    ren_cfg = RunConfig(
        model="main",
        n_agents=6,
        psi=PsiKernel.exp_decay(2.0),
        sigma=SigmaKernel(1.0, 0.0),
        initial=InitialData(kind="clustered", seed=seed),
        integrator=IntegratorConfig(t_final=100.0, output_every=1000),
        label="verify_rendezvous",
    )
    ren_log = run(ren_cfg)
    items.append(_item("rendezvous_diameter", 1e-3, ren_log.records[-1].max_diameter))

    if include_battery:
        from .atlas import regime_battery

        battery = regime_battery(seed=seed)
        for case in battery["cases"]:
            if case.get("skipped"):
                continue
            items.append(
                _item(f"battery_{case['name']}", case["tolerance"], case["observed"],
                      ok=case["passed"])
            )

    return {"items": items, "all_passed": all(i["passed"] for i in items)}
