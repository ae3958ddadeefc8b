import math

import pytest

from sphereflock.atlas import ThresholdSet, regime_battery, thresholds
from sphereflock.kernels import SigmaKernel


def test_threshold_values():
    ts = thresholds(6, SigmaKernel(1.0, 0.5))
    assert ts.e_c0 == pytest.approx(5.0 / 36.0, abs=1e-15)
    assert ts.rho_target == 1.25
    assert ts.deployment_boundary == pytest.approx(2.4, abs=1e-15)


def test_threshold_round_trip_exact():
    for n in (2, 3, 6, 11):
        for sigma_r in (0.01, 0.3, 2.0):
            sk = SigmaKernel(1.7, sigma_r)
            ts = thresholds(n, sk)
            assert ts.rho_target * 2.0 * sk.sigma_a / (n - 1) == sigma_r


def test_threshold_flags_undefined_formation_scale():
    ts = thresholds(6, SigmaKernel(0.0, 1.0))
    assert math.isinf(ts.rho_target)
    assert ts.deployment_boundary == 0.0
    assert ts.e_c0 == 0.0
    ts0 = thresholds(4, SigmaKernel(0.0, 0.0))
    assert math.isnan(ts0.rho_target)


def test_battery_budget_skips_cases_beyond_it():
    report = regime_battery(seed=1, budget=110.0)
    executed = [c["name"] for c in report["cases"] if not c["skipped"]]
    skipped = [c for c in report["cases"] if c["skipped"]]
    # the rendezvous case and the cheap two-agent case fit; the rest do not
    assert executed == ["rendezvous_low_energy", "two_agent_parallel_circles"]
    assert len(skipped) == 4
    assert report["simulated_time"] == 110.0


def test_battery_clause_cases_pass():
    # budget admits the rendezvous clause, the pure-repulsion deployment
    # clause, and the two-agent parallel-circle case (not the long
    # formation runs, which the acceptance suite covers)
    report = regime_battery(seed=0, budget=310.0)
    by_name = {c["name"]: c for c in report["cases"] if not c["skipped"]}
    assert set(by_name) == {
        "rendezvous_low_energy",
        "deployment_pure_repulsion",
        "two_agent_parallel_circles",
    }
    assert all(c["passed"] for c in by_name.values())
    ren = by_name["rendezvous_low_energy"]
    assert ren["details"]["initial_energy"] < ren["details"]["energy_bound"]
    assert report["all_passed"]


def test_battery_deterministic_for_fixed_seed():
    a = regime_battery(seed=2, budget=110.0)
    b = regime_battery(seed=2, budget=110.0)
    ca = [c for c in a["cases"] if not c["skipped"]][0]
    cb = [c for c in b["cases"] if not c["skipped"]][0]
    assert ca["observed"] == cb["observed"]
    assert ca["passed"] == cb["passed"]
    assert ca["details"] == cb["details"]
