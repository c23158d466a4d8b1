"""Spatial (6D) vector algebra: velocities, wrenches, frame transforms, rotations.

Conventions used throughout the library:

* a spatial velocity stacks the linear part on top of the angular part,
  ``V = [v, omega]``, both expressed in the frame the quantity belongs to;
* a spatial wrench stacks force on top of moment, ``F = [f, m]``;
* the force/velocity transform between a frame ``A`` and a frame ``B`` whose
  pose in ``A`` is ``(R, r)`` is the 6x6

      U = [[R, 0], [skew(r) @ R, R]]

  with ``F_A = U @ F_B`` and ``V_B = U.T @ V_A``.  Power is invariant under
  the pair of maps, which is what makes the transform pair useful as a
  bookkeeping device for cutting a chain into subsystems.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ORTHO_TOL = 1e-9


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def skew(a) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector: ``skew(a) @ b == cross(a, b)``."""
    x, y, z = np.asarray(a, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def cross3(a, b) -> np.ndarray:
    # np.cross pays ~30x its arithmetic in dispatch for single 3-vectors,
    # and the propagation sweeps live on this operation
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def rot_x(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


_AXIS_ROT = {"x": rot_x, "y": rot_y, "z": rot_z}
_AXIS_VEC = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


def axis_rotation(axis: str, theta: float) -> np.ndarray:
    """Rotation about a named principal axis ('x', 'y' or 'z')."""
    return _AXIS_ROT[axis](theta)


def axis_vector(axis: str) -> np.ndarray:
    return _AXIS_VEC[axis]


def euler_xyz_to_rotation(alpha: float, beta: float, delta: float) -> np.ndarray:
    """R = Rx(alpha) @ Ry(beta) @ Rz(delta) (intrinsic XYZ angles)."""
    return rot_x(alpha) @ rot_y(beta) @ rot_z(delta)


def rotation_to_euler_xyz(R) -> np.ndarray:
    """Inverse of :func:`euler_xyz_to_rotation`; beta folded into [-pi/2, pi/2]."""
    R = np.asarray(R, dtype=float)
    beta = np.arcsin(np.clip(R[0, 2], -1.0, 1.0))
    alpha = np.arctan2(-R[1, 2], R[2, 2])
    delta = np.arctan2(-R[0, 1], R[0, 0])
    return np.array([alpha, beta, delta])


def euler_xyz_rate_matrix(alpha: float, beta: float) -> np.ndarray:
    """Map XYZ Euler-angle rates to the angular velocity in the reference frame.

    omega = E(alpha, beta) @ [alpha_dot, beta_dot, delta_dot].  Columns are the
    instantaneous axes of the three elementary rotations.
    """
    ex = np.array([1.0, 0.0, 0.0])
    rx = rot_x(alpha)
    return np.column_stack((ex, rx @ np.array([0.0, 1.0, 0.0]),
                            rx @ rot_y(beta) @ np.array([0.0, 0.0, 1.0])))


def _check_rotation(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {R.shape}")
    err = np.max(np.abs(R.T @ R - np.eye(3)))
    if err > _ORTHO_TOL:
        raise ValueError(f"matrix is not orthonormal (max |R'R - I| = {err:.3e})")
    if np.linalg.det(R) < 0.0:
        raise ValueError("matrix has determinant -1 (reflection, not a rotation)")
    return R


@dataclass(frozen=True)
class SpatialVelocity:
    """Linear/angular velocity pair expressed in a single frame."""

    v: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _freeze(self.v))
        object.__setattr__(self, "omega", _freeze(self.omega))
        if self.v.shape != (3,) or self.omega.shape != (3,):
            raise ValueError("SpatialVelocity parts must be 3-vectors")

    @classmethod
    def zero(cls) -> "SpatialVelocity":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_array(cls, a) -> "SpatialVelocity":
        a = np.asarray(a, dtype=float).reshape(6)
        return cls(a[:3], a[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate((self.v, self.omega))


@dataclass(frozen=True)
class SpatialWrench:
    """Force/moment pair expressed in a single frame."""

    f: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _freeze(self.f))
        object.__setattr__(self, "m", _freeze(self.m))
        if self.f.shape != (3,) or self.m.shape != (3,):
            raise ValueError("SpatialWrench parts must be 3-vectors")

    @classmethod
    def zero(cls) -> "SpatialWrench":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_array(cls, a) -> "SpatialWrench":
        a = np.asarray(a, dtype=float).reshape(6)
        return cls(a[:3], a[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate((self.f, self.m))


@dataclass(frozen=True)
class FrameTransform:
    """Pose of a frame B measured in a frame A: rotation ``R`` and offset ``r``.

    Stores the (R, r) pair rather than the 6x6 matrix; :meth:`matrix6`
    materializes the latter on demand.
    """

    R: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", _freeze(_check_rotation(self.R)))
        object.__setattr__(self, "r", _freeze(self.r))
        if self.r.shape != (3,):
            raise ValueError("offset must be a 3-vector")

    @classmethod
    def identity(cls) -> "FrameTransform":
        return cls(np.eye(3), np.zeros(3))

    def matrix6(self) -> np.ndarray:
        U = np.zeros((6, 6))
        U[:3, :3] = self.R
        U[3:, :3] = skew(self.r) @ self.R
        U[3:, 3:] = self.R
        return U

    def compose(self, other: "FrameTransform") -> "FrameTransform":
        """A_U_B.compose(B_U_C) -> A_U_C."""
        return FrameTransform(self.R @ other.R, self.r + self.R @ other.r)

    def inverse(self) -> "FrameTransform":
        return FrameTransform(self.R.T, -(self.R.T @ self.r))


def transform_velocity_raw(R, r, va) -> np.ndarray:
    """U.T @ V_A for U built from (R, r); 6-array in, 6-array out."""
    v, w = va[:3], va[3:]
    out = np.empty(6)
    out[:3] = R.T @ (v + cross3(w, r))
    out[3:] = R.T @ w
    return out


def transform_wrench_raw(R, r, fb) -> np.ndarray:
    """U @ F_B for U built from (R, r); 6-array in, 6-array out."""
    fa = R @ fb[:3]
    out = np.empty(6)
    out[:3] = fa
    out[3:] = cross3(r, fa) + R @ fb[3:]
    return out


def transform_velocity(U: FrameTransform, V_A: SpatialVelocity) -> SpatialVelocity:
    """Express a spatial velocity known in frame A in frame B (pose of B in A is U)."""
    return SpatialVelocity.from_array(transform_velocity_raw(U.R, U.r, V_A.as_array()))


def transform_wrench(U: FrameTransform, F_B: SpatialWrench) -> SpatialWrench:
    """Express a spatial wrench known in frame B in frame A (pose of B in A is U)."""
    return SpatialWrench.from_array(transform_wrench_raw(U.R, U.r, F_B.as_array()))


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion (w, vec) with the scalar part kept non-negative.

    The double cover is resolved by flipping the sign so that w >= 0; if w is
    zero the first nonzero vector component is made positive instead.
    """

    w: float
    vec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "vec", _freeze(self.vec))
        if self.vec.shape != (3,):
            raise ValueError("quaternion vector part must be a 3-vector")
        n = np.sqrt(self.w ** 2 + float(self.vec @ self.vec))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"quaternion is not unit norm (|q| = {n:.12g})")

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, np.zeros(3))

    def sign_normalized(self) -> "UnitQuaternion":
        q = np.concatenate(([self.w], self.vec))
        nz = q[np.abs(q) > 0.0]
        if self.w < 0.0 or (self.w == 0.0 and nz.size and nz[0] < 0.0):
            return UnitQuaternion(-self.w, -self.vec)
        return self

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.w], self.vec))

    def rotation(self) -> np.ndarray:
        w, (x, y, z) = self.w, self.vec
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])


def quat_from_rotation(R) -> UnitQuaternion:
    """Convert a rotation matrix to the sign-normalized unit quaternion.

    Uses the dominant-component (Shepperd) branch selection, which stays
    accurate for all rotation angles.
    """
    R = _check_rotation(R)
    t = np.trace(R)
    k = np.array([
        1.0 + t,
        1.0 + 2.0 * R[0, 0] - t,
        1.0 + 2.0 * R[1, 1] - t,
        1.0 + 2.0 * R[2, 2] - t,
    ])
    i = int(np.argmax(k))
    s = 2.0 * np.sqrt(max(k[i], 0.0))
    if i == 0:
        q = np.array([s / 4.0,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif i == 1:
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      s / 4.0,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif i == 2:
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      s / 4.0,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      s / 4.0])
    q = q / np.linalg.norm(q)
    return UnitQuaternion(q[0], q[1:]).sign_normalized()


def rotation_from_quat(q: UnitQuaternion) -> np.ndarray:
    return q.rotation()


def quat_from_euler_xyz(alpha: float, beta: float, delta: float) -> UnitQuaternion:
    return quat_from_rotation(euler_xyz_to_rotation(alpha, beta, delta))
