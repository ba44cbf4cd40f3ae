"""Seeded generators for synthetic rotation sets and their corruptions."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rotation import RotationSet, as_matrices, euler_to_rotation, exp_map, quat_to_rotation

DEG = np.pi / 180.0

CORRUPTION_LEVELS = {
    "B1": (0.0, 0.0),
    "B2": (0.01, 0.0),
    "B3": (0.01, 0.10),
    "B4": (0.01, 0.25),
    "B5": (0.01, 0.50),
    "B6": (0.01, 0.75),
    "B7": (0.01, 0.90),
}

SCENARIO_KINDS = ("bounded_euler", "gaussian_quaternion", "planted_pasi")


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str = "bounded_euler"
    n: int = 2000
    euler_ranges: tuple = ((-40 * DEG, 10 * DEG), (-20 * DEG, 20 * DEG), (-10 * DEG, 50 * DEG))
    gaussian_mean: tuple = (30 * DEG, 10 * DEG, 15.5 * DEG)
    gaussian_std: float = 10 * DEG
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for lo, hi in self.euler_ranges:
            if lo > hi:
                raise ValueError("each Euler range needs lo <= hi")


def scenario(number, n=2000, seed=0):
    """The three reference scenarios: 1 and 2 bounded Euler boxes, 3 Gaussian."""
    if number == 1:
        ranges = ((-40, 10), (-20, 20), (-10, 50))
    elif number == 2:
        ranges = ((-40.5, 10.5), (-20.5, 20.5), (-10.5, 50.5))
    elif number == 3:
        return ScenarioSpec(kind="gaussian_quaternion", n=n, seed=seed)
    else:
        raise ValueError(f"scenario must be 1, 2 or 3, got {number}")
    ranges = tuple((lo * DEG, hi * DEG) for lo, hi in ranges)
    return ScenarioSpec(kind="bounded_euler", n=n, euler_ranges=ranges, seed=seed)


@dataclass(frozen=True)
class CorruptionSpec:
    level: Optional[str] = None
    noise_std: float = 0.0
    outlier_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.level is not None:
            if self.level not in CORRUPTION_LEVELS:
                raise ValueError(f"unknown corruption level {self.level!r}")
            std, frac = CORRUPTION_LEVELS[self.level]
            object.__setattr__(self, "noise_std", std)
            object.__setattr__(self, "outlier_fraction", frac)
        if not 0.0 <= self.outlier_fraction <= 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1]")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


def _rng(seed):
    return np.random.default_rng(np.random.SeedSequence(seed))


def random_rotations(n, seed=None, rng=None):
    """``n`` Haar-uniform rotations from normalised 4D Gaussian quaternions."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng if rng is not None else _rng(seed)
    q = rng.standard_normal((n, 4))
    return quat_to_rotation(q / np.linalg.norm(q, axis=1, keepdims=True))


def generate_scenario(spec):
    rng = _rng(spec.seed)
    if spec.kind == "gaussian_quaternion":
        angles = rng.normal(spec.gaussian_mean, spec.gaussian_std, size=(spec.n, 3))
    else:
        lo = np.array([r[0] for r in spec.euler_ranges])
        hi = np.array([r[1] for r in spec.euler_ranges])
        angles = lo + (hi - lo) * rng.random((spec.n, 3))
    return RotationSet(euler_to_rotation(angles))


def corrupt(rs, spec):
    """Right-compose inliers with small random rotations and replace outliers.

    Exactly ``floor(outlier_fraction * n)`` indices are replaced by uniform
    rotations; replaced elements carry no noise.  Returns a new set and
    keeps timestamps.
    """
    m = as_matrices(rs).copy()
    n = m.shape[0]
    # independent streams: outlier picks and values do not depend on noise_std
    rng_idx, rng_noise, rng_out = (np.random.default_rng(s) for s in np.random.SeedSequence(spec.seed).spawn(3))
    n_out = int(np.floor(spec.outlier_fraction * n + 1e-9))
    out_idx = np.sort(rng_idx.choice(n, size=n_out, replace=False)) if n_out else np.empty(0, dtype=int)
    if spec.noise_std > 0:
        inl = np.setdiff1d(np.arange(n), out_idx)
        axis = rng_noise.standard_normal((inl.size, 3))
        axis /= np.linalg.norm(axis, axis=1, keepdims=True)
        angle = rng_noise.normal(0.0, spec.noise_std, size=inl.size)
        m[inl] = m[inl] @ exp_map(axis * angle[:, None])
    if n_out:
        m[out_idx] = random_rotations(n_out, rng=rng_out)
    ts = rs.timestamps if isinstance(rs, RotationSet) else None
    return RotationSet(m, None if ts is None else ts.copy())


def plant_global(rs, r_gt, l=None, shuffle_seed=None):
    """Apply the global model ``b = L.T @ a @ r_gt`` to every element.

    ``l`` is a SignedPermutation or 3x3 matrix (identity when omitted).
    With ``shuffle_seed`` the output order is permuted to destroy
    correspondences.
    """
    m = as_matrices(rs)
    lm = np.eye(3) if l is None else np.asarray(getattr(l, "matrix", l), dtype=np.float64)
    out = lm.T @ m @ np.asarray(r_gt, dtype=np.float64)
    if shuffle_seed is not None:
        out = out[_rng(shuffle_seed).permutation(out.shape[0])]
    return RotationSet(out)
