import math

import numpy as np
import pytest

from sphereflock.dynamics import (
    Ensemble,
    LSModel,
    LSParams,
    MainModel,
)
from sphereflock.errors import BlowupError, ConfigError, SingularityError
from sphereflock.integrate import IntegratorConfig, simulate, step
from sphereflock.kernels import PsiKernel, SigmaKernel

from conftest import random_ensemble

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])

FREE = MainModel(PsiKernel.constant(0.0), SigmaKernel(0.0, 0.0))
FIG2_MODEL = MainModel(PsiKernel.exp_decay(2.0), SigmaKernel(1.0, 0.5))


def geodesic_start():
    return Ensemble(E1[None, :], E2[None, :])


def geodesic_error(dt, t_final, projection="none", scheme="rk4"):
    cfg = IntegratorConfig(dt=dt, t_final=t_final, scheme=scheme,
                           projection=projection, output_every=10**9)
    log = simulate(geodesic_start(), FREE, cfg)
    x_exact = np.array([math.cos(t_final), math.sin(t_final), 0.0])
    v_exact = np.array([-math.sin(t_final), math.cos(t_final), 0.0])
    return max(
        float(np.linalg.norm(log.x[-1, 0] - x_exact)),
        float(np.linalg.norm(log.v[-1, 0] - v_exact)),
    )


def test_config_validation():
    with pytest.raises(ConfigError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ConfigError):
        IntegratorConfig(dt=0.2)  # beyond the meaningful-step guard
    with pytest.raises(ConfigError):
        IntegratorConfig(dt=1e-3, t_final=1e-4)
    with pytest.raises(ConfigError):
        IntegratorConfig(scheme="rk5")
    with pytest.raises(ConfigError):
        IntegratorConfig(projection="midpoint")
    with pytest.raises(ConfigError):
        IntegratorConfig(output_every=0)


def test_geodesic_quarter_circle():
    assert geodesic_error(1e-3, math.pi / 2.0) <= 1e-8


def test_zero_vector_field_is_fixed_point():
    ens = Ensemble(E1[None, :], np.zeros((1, 3)))
    out = step(ens, FREE, IntegratorConfig(dt=1e-3, t_final=1e-3, projection="none"))
    assert np.array_equal(out.x, ens.x)
    assert np.array_equal(out.v, ens.v)


def test_rk4_fourth_order_under_halving():
    # horizon chosen as an exact multiple of both steps
    coarse = geodesic_error(0.02, 1.6)
    fine = geodesic_error(0.01, 1.6)
    assert 8.0 <= coarse / fine <= 32.0


def test_heun_second_order_and_euler_first_order():
    c_h = geodesic_error(0.02, 1.6, scheme="heun")
    f_h = geodesic_error(0.01, 1.6, scheme="heun")
    assert 2.5 <= c_h / f_h <= 6.5
    c_e = geodesic_error(0.02, 1.6, scheme="euler")
    f_e = geodesic_error(0.01, 1.6, scheme="euler")
    assert 1.5 <= c_e / f_e <= 3.0


def test_richardson_single_vs_double_step(paper_ensemble):
    # one rk4 step against two half-steps: discrepancy scales as dt^5
    def discrepancy(dt):
        one = step(paper_ensemble, FIG2_MODEL,
                   IntegratorConfig(dt=dt, t_final=dt, projection="none"))
        half_cfg = IntegratorConfig(dt=dt / 2.0, t_final=dt, projection="none")
        half = step(step(paper_ensemble, FIG2_MODEL, half_cfg), FIG2_MODEL, half_cfg)
        return float(
            max(np.max(np.abs(one.x - half.x)), np.max(np.abs(one.v - half.v)))
        )

    d_coarse = discrepancy(0.02)
    d_fine = discrepancy(0.01)
    assert 16.0 <= d_coarse / d_fine <= 64.0


def test_snapshot_schedule():
    ens = geodesic_start()
    cfg = IntegratorConfig(dt=1e-3, t_final=1e-3, output_every=1)
    assert simulate(ens, FREE, cfg).n_snapshots == 2

    cfg = IntegratorConfig(dt=1e-3, t_final=0.0, output_every=1)
    log = simulate(ens, FREE, cfg)
    assert log.n_snapshots == 1 and log.times[0] == 0.0

    cfg = IntegratorConfig(dt=1e-3, t_final=1.0, output_every=100)
    assert simulate(ens, FREE, cfg).n_snapshots == 11

    # cadence not dividing the horizon: final state appended
    cfg = IntegratorConfig(dt=1e-3, t_final=1.0, output_every=7)
    log = simulate(ens, FREE, cfg)
    assert log.n_snapshots == 1 + 1000 // 7 + 1
    assert log.times[-1] == pytest.approx(1.0, abs=1e-12)


def test_final_partial_step_lands_on_t_final():
    # pi/2 is not a multiple of dt; the log must still end exactly there
    cfg = IntegratorConfig(dt=1e-3, t_final=math.pi / 2.0, output_every=10**9)
    log = simulate(geodesic_start(), FREE, cfg)
    assert log.times[-1] == math.pi / 2.0


def test_simulate_deterministic_bitwise(paper_ensemble):
    cfg = IntegratorConfig(dt=1e-3, t_final=2.0, output_every=100)
    a = simulate(paper_ensemble, FIG2_MODEL, cfg)
    b = simulate(paper_ensemble, FIG2_MODEL, cfg)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)
    assert np.array_equal(a.times, b.times)


def test_projection_enforces_constraints(paper_ensemble):
    cfg = IntegratorConfig(dt=1e-3, t_final=2.0, output_every=10)
    log = simulate(paper_ensemble, FIG2_MODEL, cfg)
    assert np.max(np.abs(np.linalg.norm(log.x, axis=2) - 1.0)) <= 1e-12
    assert np.max(np.abs(np.sum(log.x * log.v, axis=2))) <= 1e-10


def test_unprojected_drift_small(paper_ensemble):
    cfg = IntegratorConfig(dt=1e-3, t_final=2.0, projection="none", output_every=10)
    log = simulate(paper_ensemble, FIG2_MODEL, cfg)
    drift = max(
        float(np.max(np.abs(np.linalg.norm(log.x, axis=2) - 1.0))),
        float(np.max(np.abs(np.sum(log.x * log.v, axis=2)))),
    )
    assert drift <= 1e-8


def test_energy_monotone_on_logged_steps(fig2_log):
    energies = np.array([r.e_total for r in fig2_log.records])
    assert np.max(np.diff(energies)) <= 1e-8


def test_fig2_speeds_decay(fig2_log):
    speeds = np.linalg.norm(fig2_log.v[-1], axis=1)
    assert np.all(speeds < 1e-2)


def test_blowup_reports_partial_log():
    # stiff radial feedback + forward Euler + off-sphere start: the classic
    # instability the speed cap is meant to catch
    x = np.array([[1.1, 0.0, 0.0], [0.0, 1.0, 0.0]])
    v = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    model = LSModel(LSParams(k_v=0.0, k_a=0.0, k_r=0.0, k_0=1e4))
    cfg = IntegratorConfig(dt=1e-3, t_final=5.0, scheme="euler",
                           projection="none", output_every=100)
    with pytest.raises(BlowupError) as info:
        simulate(Ensemble(x, v), model, cfg)
    partial = info.value.partial_log
    assert partial.n_snapshots >= 1
    assert partial.meta["status"] == "failed"


def test_collision_raises_singularity():
    x = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    ens = Ensemble(x, np.zeros((2, 3)))
    model = MainModel(PsiKernel.exp_decay(2.0), SigmaKernel(1.0, 0.5))
    with pytest.raises(SingularityError):
        step(ens, model, IntegratorConfig(dt=1e-3, t_final=1e-3))


def test_step_does_not_mutate_input():
    rng = np.random.default_rng(21)
    ens = random_ensemble(rng, 3)
    x0, v0 = ens.x.copy(), ens.v.copy()
    step(ens, FIG2_MODEL, IntegratorConfig(dt=1e-3, t_final=1e-3))
    assert np.array_equal(ens.x, x0) and np.array_equal(ens.v, v0)
