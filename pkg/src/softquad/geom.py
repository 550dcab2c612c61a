"""Vector and rotation algebra shared by every simulation module.

Conventions
-----------
* Vectors are plain numpy arrays of shape (3,).
* Rotation matrices map body coordinates to inertial coordinates.
* The inertial and body z axes point DOWN: gravity is +z and altitude
  above ground is -z.  Log writers flip the sign of z quantities so that
  exported files read as altitude-up; see `runlog`.
"""

from __future__ import annotations

import math

import numpy as np

E3 = np.array([0.0, 0.0, 1.0])

# Tolerance for declaring a matrix a valid rotation.
ROT_TOL = 1e-9


def hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix such that hat(v) @ w == cross(v, w).

    Parameters
    ----------
    v : array (3,)

    Returns
    -------
    array (3, 3), skew-symmetric.
    """
    x, y, z = v
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of `hat` for skew-symmetric matrices."""
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def is_rotation(r: np.ndarray, tol: float = ROT_TOL) -> bool:
    """Check orthonormality and det(+1) within `tol` (Frobenius norm)."""
    if not np.all(np.isfinite(r)):
        return False
    err = np.linalg.norm(r.T @ r - np.eye(3))
    return err <= tol and abs(np.linalg.det(r) - 1.0) <= tol


def orthonormalize(r: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix back onto SO(3).

    Gram-Schmidt on the first two columns, third column from the cross
    product so the determinant is +1.  Cheap and drift-free when applied
    every integration step.
    """
    c0 = r[:, 0]
    c0 = c0 / np.linalg.norm(c0)
    c1 = r[:, 1] - np.dot(c0, r[:, 1]) * c0
    c1 = c1 / np.linalg.norm(c1)
    c2 = np.cross(c0, c1)
    return np.column_stack((c0, c1, c2))


def rot_z(angle: float) -> np.ndarray:
    """Rotation about the z axis by `angle` radians."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([
        [c, -s, 0.0],
        [s, c, 0.0],
        [0.0, 0.0, 1.0],
    ])


def rot_to_quat(r: np.ndarray) -> np.ndarray:
    """Rotation matrix -> unit quaternion (w, x, y, z).

    Used only for logging; all kinematics stay in matrix form.  Shepperd's
    branch selection keeps the conversion numerically stable.
    """
    t = np.trace(r)
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        w = (r[2, 1] - r[1, 2]) / s
        x = 0.25 * s
        y = (r[0, 1] + r[1, 0]) / s
        z = (r[0, 2] + r[2, 0]) / s
    elif r[1, 1] > r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        w = (r[0, 2] - r[2, 0]) / s
        x = (r[0, 1] + r[1, 0]) / s
        y = 0.25 * s
        z = (r[1, 2] + r[2, 1]) / s
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        w = (r[1, 0] - r[0, 1]) / s
        x = (r[0, 2] + r[2, 0]) / s
        y = (r[1, 2] + r[2, 1]) / s
        z = 0.25 * s
    q = np.array([w, x, y, z])
    return q / np.linalg.norm(q)


def yaw_of(r: np.ndarray) -> float:
    """Heading angle of the body x axis projected into the horizontal plane."""
    return math.atan2(r[1, 0], r[0, 0])
