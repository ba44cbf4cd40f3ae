"""Transformed Basis Vectors: rotation sets as three spherical point sets.

The x/y/z TBV of a rotation is its first/second/third row.  A set of
rotations therefore yields three ``(n, 3)`` arrays of unit vectors.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMean, EmptySet
from .rotation import as_matrices

NORTH = np.array([0.0, 0.0, 1.0])
MEAN_TOL = 1e-6


@dataclass(frozen=True)
class TbvTriple:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def __getitem__(self, axis):
        return (self.x, self.y, self.z)[axis]

    def __len__(self):
        return self.x.shape[0]

    def to_rotations(self):
        """Reassemble the rows into rotation matrices."""
        return np.stack([self.x, self.y, self.z], axis=1)


def tbvs_from_so3(rs):
    """Split a rotation set into its x, y and z TBV point sets."""
    m = as_matrices(rs)
    if m.shape[0] == 0:
        raise EmptySet("cannot extract TBVs from an empty rotation set")
    return TbvTriple(m[:, 0, :].copy(), m[:, 1, :].copy(), m[:, 2, :].copy())


def raw_mean(points):
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] == 0:
        raise EmptySet("mean of an empty point set")
    return points.mean(axis=0)


def mean_direction(points, tol=MEAN_TOL, axis=None):
    """Normalised arithmetic mean of a point set on the sphere.

    Raises :class:`DegenerateMean` when the mean's norm is below ``tol``,
    e.g. for antipodally balanced or near-uniform sets.
    """
    m = raw_mean(points)
    norm = np.linalg.norm(m)
    if not norm >= tol:
        where = f" on axis {axis}" if axis is not None else ""
        raise DegenerateMean(f"mean direction undefined{where} (|mean| = {norm:.3g})", axis=axis)
    return m / norm


def rotation_to_north(d):
    """Minimal-angle rotation taking the unit vector ``d`` to +z.

    The antipode ``-z`` maps through a fixed half turn about x.
    """
    d = np.asarray(d, dtype=np.float64)
    d = d / np.linalg.norm(d)
    axis = np.cross(d, NORTH)
    s = np.linalg.norm(axis)
    c = float(np.dot(d, NORTH))
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])
    k = axis / s
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * kx + (1.0 - c) * (kx @ kx)


def apply_rotation(points, r):
    """Map every point ``v`` to ``r @ v``."""
    return np.asarray(points, dtype=np.float64) @ np.asarray(r, dtype=np.float64).T


def angular_radius(points, centre_dir):
    """Largest angle (radians) between ``centre_dir`` and any point."""
    c = np.clip(np.asarray(points) @ centre_dir, -1.0, 1.0)
    return float(np.arccos(c.min()))


def trimmed_centre(points, radius, tol=MEAN_TOL, axis=None, max_iter=100):
    """Cap-trimmed mean: a fixed point of "average the points within ``radius``".

    Starts from the arithmetic mean direction and repeatedly averages the
    points inside the spherical cap of angular ``radius`` around the
    current direction, until the cap membership stops changing.  Uniform
    background points have no net pull inside a symmetric cap, so the
    result tracks the dominant cluster.  Returns ``(direction, centre)``
    where ``centre`` is the unnormalised mean of the final cap.
    """
    points = np.asarray(points, dtype=np.float64)
    d = mean_direction(points, tol=tol, axis=axis)
    cos_r = np.cos(radius)
    members = None
    centre = raw_mean(points)
    for _ in range(max_iter):
        inside = points @ d >= cos_r
        if not inside.any():
            break
        if members is not None and np.array_equal(inside, members):
            break
        members = inside
        centre = points[inside].mean(axis=0)
        norm = np.linalg.norm(centre)
        if norm < tol:
            break
        d = centre / norm
    return d, centre
