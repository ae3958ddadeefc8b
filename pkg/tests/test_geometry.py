import numpy as np
import pytest

from sphereflock.errors import AntipodalError, DomainError
from sphereflock.geometry import normalize, rotate, rotation_matrix, tangent_project

from conftest import random_unit

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def test_rotation_same_point_is_identity():
    assert np.array_equal(rotation_matrix(E1, E1), np.eye(3))


def test_rotation_e1_e2_matrix():
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(rotation_matrix(E1, E2), expected, atol=1e-15)


def test_rotation_antipodal_raises():
    with pytest.raises(AntipodalError):
        rotation_matrix(E1, -E1)


def test_rotation_rejects_non_unit_input():
    with pytest.raises(DomainError):
        rotation_matrix(2.0 * E1, E2)
    with pytest.raises(DomainError):
        rotation_matrix(E1, 0.5 * E2)


def test_rotate_transport_identities():
    # the rotation carries x1 to x2, fixes the axis, and reflects x2 back
    assert np.allclose(rotate(E1, E2, E1), E2, atol=1e-15)
    assert np.allclose(rotate(E1, E2, E3), E3, atol=1e-15)
    assert np.allclose(rotate(E1, E2, E2), -E1, atol=1e-15)


def test_rotation_algebra_random_pairs():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 1000:
        x1 = random_unit(rng)[0]
        x2 = random_unit(rng)[0]
        if np.linalg.norm(x1 + x2) <= 1e-6:
            continue
        checked += 1
        r = rotation_matrix(x1, x2)
        assert np.max(np.abs(r.T @ r - np.eye(3))) <= 1e-12
        assert np.max(np.abs(rotation_matrix(x2, x1) - r.T)) <= 1e-12
        assert np.linalg.norm(r @ x1 - x2) <= 1e-12
        axis = np.cross(x1, x2)
        assert np.linalg.norm(r @ axis - axis) <= 1e-12
        assert np.linalg.norm(r @ x2 - (2.0 * (x1 @ x2) * x2 - x1)) <= 1e-12


def test_rotate_maps_tangent_planes_isometrically():
    rng = np.random.default_rng(8)
    for _ in range(200):
        x1 = random_unit(rng)[0]
        x2 = random_unit(rng)[0]
        if np.linalg.norm(x1 + x2) <= 1e-6:
            continue
        v = rng.normal(size=3)
        v -= (v @ x1) * x1
        out = rotate(x1, x2, v)
        assert abs(out @ x2) <= 1e-10
        assert abs(np.linalg.norm(out) - np.linalg.norm(v)) <= 1e-12


def test_tangent_project_examples():
    assert np.array_equal(tangent_project(E1, E2), E2)
    assert np.array_equal(tangent_project(E1, E1), np.zeros(3))
    assert np.allclose(tangent_project(E1, np.array([1.0, 1.0, 0.0])), E2, atol=1e-15)


def test_tangent_project_orthogonal_output():
    rng = np.random.default_rng(9)
    for _ in range(100):
        x = random_unit(rng)[0]
        v = rng.normal(size=3) * 5.0
        assert abs(tangent_project(x, v) @ x) <= 1e-12


def test_tangent_project_rejects_non_unit():
    with pytest.raises(DomainError):
        tangent_project(2.0 * E1, E2)


def test_normalize_examples():
    assert np.array_equal(normalize(np.array([2.0, 0.0, 0.0])), E1)
    assert np.allclose(
        normalize(np.array([1.0, 1.0, 1.0])), np.ones(3) / np.sqrt(3.0), atol=1e-15
    )
    with pytest.raises(DomainError):
        normalize(np.zeros(3))


def test_normalize_unit_norm_and_direction():
    rng = np.random.default_rng(10)
    for _ in range(100):
        x = rng.normal(size=3) * rng.uniform(1e-6, 1e6)
        out = normalize(x)
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-15
        assert np.allclose(np.cross(out, x), 0.0, atol=1e-9 * np.linalg.norm(x))
