"""Rotation arithmetic on 3x3 matrices.

Rotations are plain ``(3, 3)`` float arrays and rotation sets are
``(n, 3, 3)`` stacks; most functions broadcast over leading dimensions.
Points on the sphere are acted on as columns (``v' = R @ v``) everywhere
except :func:`rotate_points`, which keeps the row convention ``P @ R``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateMatrix, EmptySet, NonConvergent

AXES = "xyz"


def axis_index(axis):
    if isinstance(axis, str):
        try:
            return AXES.index(axis.lower())
        except ValueError:
            raise ValueError(f"unknown axis {axis!r}") from None
    axis = int(axis)
    if axis not in (0, 1, 2):
        raise ValueError(f"unknown axis {axis!r}")
    return axis


def axis_rotation(axis, angle):
    """Right-handed rotation by ``angle`` radians about a coordinate axis.

    ``angle`` may be an array, in which case a stack is returned.
    """
    k = axis_index(axis)
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle), np.sin(angle)
    out = np.zeros(angle.shape + (3, 3))
    i, j = [a for a in range(3) if a != k]
    if k == 1:  # keep the cyclic order z -> x for the y axis
        i, j = 2, 0
    out[..., k, k] = 1.0
    out[..., i, i] = c
    out[..., j, j] = c
    out[..., i, j] = -s
    out[..., j, i] = s
    return out


def rotate_points(points, r):
    """Rotate row-vector points: ``points @ r``."""
    return np.asarray(points, dtype=np.float64) @ np.asarray(r, dtype=np.float64)


def is_rotation(m, tol=1e-9):
    m = np.asarray(m, dtype=np.float64)
    if m.shape[-2:] != (3, 3) or not np.all(np.isfinite(m)):
        return False
    eye = np.eye(3)
    ortho = np.abs(m @ np.swapaxes(m, -1, -2) - eye).max() <= tol
    return bool(ortho and np.abs(np.linalg.det(m) - 1.0).max() <= tol)


def _vee_skew(m):
    """Axial vector of the antisymmetric part of ``m``."""
    return 0.5 * np.stack(
        [m[..., 2, 1] - m[..., 1, 2], m[..., 0, 2] - m[..., 2, 0], m[..., 1, 0] - m[..., 0, 1]],
        axis=-1,
    )


def _rotation_angle(m):
    sin_t = np.linalg.norm(_vee_skew(m), axis=-1)
    cos_t = np.clip((np.trace(m, axis1=-2, axis2=-1) - 1.0) / 2.0, -1.0, 1.0)
    return np.arctan2(sin_t, cos_t)


def geodesic_angle(r1, r2):
    """Angle in radians of ``r1 @ r2.T``, in ``[0, pi]``.  Broadcasts."""
    r1 = np.asarray(r1, dtype=np.float64)
    r2 = np.asarray(r2, dtype=np.float64)
    ang = _rotation_angle(r1 @ np.swapaxes(r2, -1, -2))
    return float(ang) if np.ndim(ang) == 0 else ang


def project_to_so3(m, rank_tol=1e-12):
    """Nearest rotation to ``m`` in Frobenius norm.

    Raises
    ------
    DegenerateMatrix
        If the second singular value vanishes, so the projection is not unique.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise DegenerateMatrix("expected a finite 3x3 matrix")
    u, sv, vt = np.linalg.svd(m)
    if sv[1] <= rank_tol * max(sv[0], 1e-300):
        raise DegenerateMatrix(f"rank < 2 (singular values {sv})")
    d = np.sign(np.linalg.det(u @ vt)) or 1.0
    return u @ np.diag([1.0, 1.0, d]) @ vt


def hat(w):
    w = np.asarray(w, dtype=np.float64)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def exp_map(w):
    """Rodrigues' formula; ``w`` is a rotation vector (or a stack)."""
    w = np.asarray(w, dtype=np.float64)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    k = hat(w)
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    return np.eye(3) + a * k + b * (k @ k)


def log_map(r):
    """Rotation vector of ``r`` (inverse of :func:`exp_map`)."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim > 2:
        return np.stack([log_map(x) for x in r.reshape(-1, 3, 3)]).reshape(r.shape[:-2] + (3,))
    v = _vee_skew(r)
    sin_t = np.linalg.norm(v)
    theta = float(_rotation_angle(r))
    if theta < 1e-8:
        return v
    if np.pi - theta > 1e-6:
        return v * (theta / sin_t)
    # near pi the antisymmetric part vanishes; read the axis from the
    # symmetric part, sym(R) = cos(t) I + (1 - cos(t)) a a^T
    b = (0.5 * (r + r.T) - np.cos(theta) * np.eye(3)) / (1.0 - np.cos(theta))
    col = int(np.argmax(np.diag(b)))
    axis = b[:, col] / np.sqrt(max(b[col, col], 1e-300))
    axis /= np.linalg.norm(axis)
    if np.dot(axis, v) < 0:
        axis = -axis
    return axis * theta


def mean_rotation(rs, method="projected_arithmetic", tol=1e-10, max_iter=100):
    """Average a list of rotations.

    ``projected_arithmetic`` projects the element-wise mean onto SO(3);
    ``karcher`` iterates tangent-space averaging starting from the first
    element and stops when the mean log falls below ``tol``.
    """
    rs = np.asarray(rs, dtype=np.float64).reshape(-1, 3, 3)
    if rs.shape[0] == 0:
        raise EmptySet("mean of an empty rotation list")
    if method not in ("projected_arithmetic", "projected_mean", "projected", "karcher"):
        raise ValueError(f"unknown mean method {method!r}")
    if rs.shape[0] == 1:
        return rs[0].copy()
    if method != "karcher":
        return project_to_so3(rs.mean(axis=0))
    mean = rs[0].copy()
    for _ in range(max_iter):
        step = log_map(mean.T @ rs).mean(axis=0)
        mean = mean @ exp_map(step)
        if np.linalg.norm(step) < tol:
            return mean
    raise NonConvergent(f"Karcher mean did not converge in {max_iter} iterations")


# --------------------------------------------------------------------------
# quaternions (Hamilton, scalar first) and Euler angles


def quat_to_rotation(q):
    """Rotation matrix of a unit quaternion ``(w, x, y, z)``; broadcasts."""
    q = np.asarray(q, dtype=np.float64)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1 - 2 * (y * y + z * z)
    out[..., 0, 1] = 2 * (x * y - z * w)
    out[..., 0, 2] = 2 * (x * z + y * w)
    out[..., 1, 0] = 2 * (x * y + z * w)
    out[..., 1, 1] = 1 - 2 * (x * x + z * z)
    out[..., 1, 2] = 2 * (y * z - x * w)
    out[..., 2, 0] = 2 * (x * z - y * w)
    out[..., 2, 1] = 2 * (y * z + x * w)
    out[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return out


def rotation_to_quat(r):
    """Unit quaternion ``(w, x, y, z)`` with ``w >= 0``; broadcasts."""
    r = np.asarray(r, dtype=np.float64)
    m = r.reshape(-1, 3, 3)
    tr = np.trace(m, axis1=1, axis2=2)
    # Shepperd: pick the largest of 4w^2, 4x^2, 4y^2, 4z^2 for stability
    cand = np.stack([tr, m[:, 0, 0], m[:, 1, 1], m[:, 2, 2]], axis=1)
    which = np.argmax(cand, axis=1)
    q = np.empty((m.shape[0], 4))
    for n, k in enumerate(which):
        a = m[n]
        if k == 0:
            s = 2.0 * np.sqrt(max(1.0 + tr[n], 0.0))
            q[n] = (0.25 * s, (a[2, 1] - a[1, 2]) / s, (a[0, 2] - a[2, 0]) / s, (a[1, 0] - a[0, 1]) / s)
        elif k == 1:
            s = 2.0 * np.sqrt(max(1.0 + a[0, 0] - a[1, 1] - a[2, 2], 0.0))
            q[n] = ((a[2, 1] - a[1, 2]) / s, 0.25 * s, (a[0, 1] + a[1, 0]) / s, (a[0, 2] + a[2, 0]) / s)
        elif k == 2:
            s = 2.0 * np.sqrt(max(1.0 + a[1, 1] - a[0, 0] - a[2, 2], 0.0))
            q[n] = ((a[0, 2] - a[2, 0]) / s, (a[0, 1] + a[1, 0]) / s, 0.25 * s, (a[1, 2] + a[2, 1]) / s)
        else:
            s = 2.0 * np.sqrt(max(1.0 + a[2, 2] - a[0, 0] - a[1, 1], 0.0))
            q[n] = ((a[1, 0] - a[0, 1]) / s, (a[0, 2] + a[2, 0]) / s, (a[1, 2] + a[2, 1]) / s, 0.25 * s)
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    q[q[:, 0] < 0] *= -1.0
    return q.reshape(r.shape[:-2] + (4,))


def euler_to_rotation(angles, order="xyz", intrinsic=True):
    """Rotation from ``(roll, pitch, yaw)`` radians.

    Roll, pitch and yaw turn about x, y and z.  ``order`` is the sequence in
    which the axes are applied; the default intrinsic ``"xyz"`` gives
    ``Rx(roll) @ Ry(pitch) @ Rz(yaw)``.  Extrinsic composition reverses the
    product.
    """
    angles = np.asarray(angles, dtype=np.float64)
    if sorted(order) != list(AXES):
        raise ValueError(f"order must be a permutation of 'xyz', got {order!r}")
    factors = [axis_rotation(a, angles[..., axis_index(a)]) for a in order]
    if not intrinsic:
        factors = factors[::-1]
    return factors[0] @ factors[1] @ factors[2]


def rotation_to_euler(r):
    """Inverse of :func:`euler_to_rotation` for the default intrinsic xyz order."""
    r = np.asarray(r, dtype=np.float64)
    pitch = np.arcsin(np.clip(r[..., 0, 2], -1.0, 1.0))
    roll = np.arctan2(-r[..., 1, 2], r[..., 2, 2])
    yaw = np.arctan2(-r[..., 0, 1], r[..., 0, 0])
    return np.stack([roll, pitch, yaw], axis=-1)


# --------------------------------------------------------------------------


@dataclass
class RotationSet:
    """An ordered set of rotations with optional timestamps (seconds)."""

    matrices: np.ndarray
    timestamps: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=np.float64).reshape(-1, 3, 3)
        if self.timestamps is not None:
            self.timestamps = np.asarray(self.timestamps, dtype=np.float64).reshape(-1)
            if self.timestamps.shape[0] != self.matrices.shape[0]:
                raise ValueError("timestamps and rotations differ in length")

    def __len__(self):
        return self.matrices.shape[0]

    def __getitem__(self, idx):
        return self.matrices[idx]


def as_matrices(rs):
    """Return the ``(n, 3, 3)`` array behind a RotationSet or array-like."""
    if isinstance(rs, RotationSet):
        return rs.matrices
    return np.asarray(rs, dtype=np.float64).reshape(-1, 3, 3)
