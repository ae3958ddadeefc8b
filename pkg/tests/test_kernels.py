import math

import numpy as np
import pytest

from sphereflock.errors import DomainError, SingularityError
from sphereflock.kernels import PsiKernel, SigmaKernel, psi_eval, sigma_eval


def test_exp_decay_vanishes_at_diameter():
    assert psi_eval(PsiKernel.exp_decay(2.0), 2.0) == 0.0


def test_exp_decay_hand_values():
    # 2 (e^2 - 1) at contact, 2 (e - 1) at unit distance
    assert psi_eval(PsiKernel.exp_decay(2.0), 0.0) == pytest.approx(
        12.778112197861301, abs=1e-12
    )
    assert psi_eval(PsiKernel.exp_decay(2.0), 1.0) == pytest.approx(
        2.0 * (math.e - 1.0), abs=1e-12
    )


def test_constant_kernel():
    assert psi_eval(PsiKernel.constant(1.0), 1.7) == 1.0
    assert psi_eval(PsiKernel.constant(0.0), 0.3) == 0.0


def test_psi_strictly_decreasing_on_grid():
    k = PsiKernel.exp_decay(2.0)
    grid = np.linspace(0.0, 2.0, 41)
    vals = [psi_eval(k, d) for d in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(v >= 0.0 for v in vals)


def test_psi_domain_checks():
    k = PsiKernel.exp_decay(2.0)
    with pytest.raises(DomainError):
        psi_eval(k, -0.1)
    with pytest.raises(DomainError):
        psi_eval(k, 2.1)
    # roundoff slack above the diameter is clamped, not rejected
    assert psi_eval(k, 2.0 + 1e-9) == 0.0


def test_psi_kernel_validation():
    with pytest.raises(DomainError):
        PsiKernel.exp_decay(0.0)
    with pytest.raises(DomainError):
        PsiKernel.constant(-1.0)
    assert PsiKernel.exp_decay(2.0).admissible
    assert not PsiKernel.constant(1.0).admissible


def test_sigma_hand_values():
    assert sigma_eval(SigmaKernel(1.0, 0.5), 0.5) == 0.0
    assert sigma_eval(SigmaKernel(1.0, 0.5), 1.0) == 0.5
    assert sigma_eval(SigmaKernel(0.0, 1.0), 2.0) == -0.5


def test_sigma_beta_one_matches_direct_formula():
    k = SigmaKernel(1.3, 0.7)
    for d_sq in (0.1, 0.5, 1.0, 2.0, 4.0):
        assert sigma_eval(k, d_sq) == 1.3 - 0.7 / d_sq


def test_sigma_general_beta():
    # beta = 2: 1 - 0.5 / 0.25 = -1
    assert sigma_eval(SigmaKernel(1.0, 0.5, 2.0), 0.5) == pytest.approx(-1.0, abs=1e-15)
    # beta = 0 removes the distance dependence entirely
    k0 = SigmaKernel(1.0, 0.4, 0.0)
    assert sigma_eval(k0, 1e-12) == sigma_eval(k0, 4.0) == 0.6


def test_sigma_monotone_in_distance_with_repulsion():
    k = SigmaKernel(1.0, 0.5)
    grid = (0.1, 0.5, 1.0, 2.0, 4.0)
    vals = [sigma_eval(k, s) for s in grid]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_sigma_collision_floor():
    with pytest.raises(SingularityError):
        sigma_eval(SigmaKernel(1.0, 0.5), 1e-15)
    # no repulsion: the floor does not apply
    assert sigma_eval(SigmaKernel(1.0, 0.0), 0.0) == 1.0


def test_sigma_domain_and_validation():
    with pytest.raises(DomainError):
        sigma_eval(SigmaKernel(1.0, 0.5), -1.0)
    with pytest.raises(DomainError):
        SigmaKernel(-1.0, 0.5)
    with pytest.raises(DomainError):
        SigmaKernel(1.0, -0.5)
    with pytest.raises(DomainError):
        SigmaKernel(1.0, 0.5, -1.0)
