"""Vector algebra on the unit sphere S2 in R3.

Provides the rotation operator that transports tangent vectors between
tangent planes (the unique rotation taking x1 to x2 while fixing the
axis x1 x x2), plus the projection/normalization helpers used to keep
integrated states on the constraint manifold.

Vectors are plain numpy arrays of shape (3,); matrices are (3, 3).
All functions are pure.
"""

from __future__ import annotations

import numpy as np

from .errors import AntipodalError, DomainError

# Identity branch: below this separation the rotation axis is 0/0 and the
# limit of the formula is the identity.
EPS_SAME = 1e-12

# Antipodal guard on ||x1 + x2||: the axis direction is numerically
# meaningless near antipodal pairs, and every physical use multiplies the
# rotation by a factor vanishing there.
EPS_ANTI = 1e-8

# Unit-norm preconditions are checked loosely, not exactly, to tolerate
# integrator drift between projections.
UNIT_TOL = 1e-9


def _check_unit(x: np.ndarray, name: str) -> None:
    n = float(np.linalg.norm(x))
    if abs(n - 1.0) > UNIT_TOL:
        raise DomainError(f"{name} must be a unit vector (||{name}|| = {n!r})")


def rotation_matrix(x1: np.ndarray, x2: np.ndarray, eps_anti: float = EPS_ANTI) -> np.ndarray:
    """Rotation matrix taking the unit vector x1 to x2 about the axis x1 x x2.

    R = <x1,x2> I - x1 x2^T + x2 x1^T + (1 - <x1,x2>) u u^T,
    with u = (x1 x x2)/||x1 x x2||; R = I when x1 = x2.

    Raises AntipodalError when ||x1 + x2|| <= eps_anti (the axis is
    undefined there) and DomainError for non-unit inputs.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    _check_unit(x1, "x1")
    _check_unit(x2, "x2")
    if float(np.linalg.norm(x1 + x2)) <= eps_anti:
        raise AntipodalError("rotation is singular for an antipodal pair")
    if float(np.linalg.norm(x1 - x2)) <= EPS_SAME:
        return np.eye(3)
    d = float(x1 @ x2)
    axis = np.cross(x1, x2)
    u = axis / np.linalg.norm(axis)
    return d * np.eye(3) - np.outer(x1, x2) + np.outer(x2, x1) + (1.0 - d) * np.outer(u, u)


def rotate(x1: np.ndarray, x2: np.ndarray, v: np.ndarray, eps_anti: float = EPS_ANTI) -> np.ndarray:
    """Transport v by the rotation taking x1 to x2 (matrix-vector product)."""
    return rotation_matrix(x1, x2, eps_anti) @ np.asarray(v, dtype=np.float64)


def tangent_project(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Component of v tangent to the sphere at the unit vector x: v - <v,x> x."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _check_unit(x, "x")
    return v - (v @ x) * x


def normalize(x: np.ndarray) -> np.ndarray:
    """Rescale x to unit length, preserving direction.

    Raises DomainError for near-zero input (||x|| <= 1e-12).
    """
    x = np.asarray(x, dtype=np.float64)
    n = float(np.linalg.norm(x))
    if n <= 1e-12:
        raise DomainError("cannot normalize a near-zero vector")
    return x / n
