"""Correspondence-free registration of two point sets on the unit sphere.

Three matchers share one histogram/correlation core:

* :func:`spmc` rotates both set means to the north pole and resolves the
  remaining rotation about z with a 1D circular correlation of azimuth
  histograms.
* :func:`frs` keeps the target's mean-to-north frame fixed and repeatedly
  corrects the source with per-axis azimuth shifts about x, y and z.
* :func:`spmc_frs` warm-starts a short FRS run from the SPMC answer.

Every matcher returns a rotation ``R`` with ``R @ source_point`` landing on
the target pattern.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import _accel
from .errors import EmptySet, MismatchedBins
from .rotation import axis_index, axis_rotation
from .tbv import angular_radius, apply_rotation, mean_direction, raw_mean, rotation_to_north, trimmed_centre

MATCHER_KINDS = ("spmc", "frs", "spmc_frs")
CENTERS = ("trimmed", "mean")


@dataclass(frozen=True)
class MatcherConfig:
    """Histogram and iteration settings shared by all matchers.

    ``frs_max_iters``/``frs_tol`` drive a standalone FRS run;
    ``hybrid_max_iters``/``hybrid_tol`` the short refinement inside
    SPMC_FRS.  Tolerances are in bins.

    ``center`` picks the reference direction rotated to the north pole:
    ``"mean"`` is the plain arithmetic mean, ``"trimmed"`` the cap-trimmed
    mean of :func:`so3align.tbv.trimmed_centre` with the cap radius set by
    the target's angular spread plus ``center_margin_deg``.
    """

    bins: int = 360
    polar_bins: int = 180
    hemisphere_flip: bool = False
    frs_max_iters: int = 10
    frs_tol: int = 1
    hybrid_max_iters: int = 5
    hybrid_tol: int = 1
    kind: str = "spmc"
    mean_tol: float = 1e-6
    center: str = "trimmed"
    center_margin_deg: float = 1.0

    def __post_init__(self):
        if self.bins < 4:
            raise ValueError("bins must be >= 4")
        if self.polar_bins < 1:
            raise ValueError("polar_bins must be >= 1")
        if self.frs_max_iters < 1 or self.hybrid_max_iters < 1:
            raise ValueError("FRS iteration caps must be >= 1")
        for tol in (self.frs_tol, self.hybrid_tol):
            if not 0 <= tol < self.bins / 2:
                raise ValueError("FRS tolerance must lie in [0, bins/2)")
        if self.kind not in MATCHER_KINDS:
            raise ValueError(f"matcher kind must be one of {MATCHER_KINDS}")
        if self.center not in CENTERS:
            raise ValueError(f"center must be one of {CENTERS}")


@dataclass
class MatchResult:
    rotation: np.ndarray
    score: float
    aligned_source: np.ndarray
    shifts: tuple = ()
    iterations: int = 0
    converged: bool = True
    kind: str = "spmc"
    source_centre: np.ndarray = None
    history: list = field(default_factory=list, repr=False)


# --------------------------------------------------------------------------
# histograms and correlation


def _check_points(points):
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError("expected an (n, 3) array of points")
    if points.shape[0] == 0:
        raise EmptySet("empty spherical point set")
    return points


def azimuth_histogram(points, axis="z", bins=360):
    """Counts of point azimuths about ``axis`` in ``bins`` equal sectors.

    About z the azimuth is ``atan2(y, x)``; about x ``atan2(z, y)``; about
    y ``atan2(x, z)``; each wrapped to ``[0, 2*pi)``.
    """
    points = _check_points(points)
    return _accel.azimuth_histogram(points, axis_index(axis), bins)


def polar_azimuth_histogram(points, axis="z", bins=360, polar_bins=180):
    """2D occupancy grid, rows = polar angle from ``axis``, columns = azimuth.

    Summing over rows gives :func:`azimuth_histogram`.
    """
    points = _check_points(points)
    return _accel.polar_azimuth_histogram(points, axis_index(axis), bins, polar_bins)


def signed_shift(s, bins):
    """Map a shift index in ``[0, bins)`` to ``(-bins/2, bins/2]``."""
    return s - bins if s > bins // 2 else s


def circular_correlate(h_a, h_b):
    """Direct circular cross-correlation ``C(s) = sum_l h_a[l] h_b[(l+s) % K]``.

    Returns ``(s_star, peak, full)`` where ``s_star`` is the signed shift
    of the maximum.  Ties go to the smallest absolute signed shift, then
    to the smaller index.
    """
    h_a = np.asarray(h_a, dtype=np.float64)
    h_b = np.asarray(h_b, dtype=np.float64)
    if h_a.shape != h_b.shape or h_a.ndim != 1:
        raise MismatchedBins(f"histogram shapes differ: {h_a.shape} vs {h_b.shape}")
    k = h_a.shape[0]
    full = _accel.circular_correlation(h_a, h_b)
    peak = full.max()
    candidates = np.flatnonzero(full == peak)
    best = min(candidates, key=lambda s: (abs(signed_shift(int(s), k)), int(s)))
    return signed_shift(int(best), k), float(peak), full


def reference_centres(target, source, cfg, axis=None):
    """Unit reference directions and unnormalised centres of both sets.

    Returns ``(dir_target, dir_source, centre_source)``.
    """
    if cfg.center == "mean":
        d_a = mean_direction(target, tol=cfg.mean_tol, axis=axis)
        d_b = mean_direction(source, tol=cfg.mean_tol, axis=axis)
        return d_a, d_b, raw_mean(source)
    d0 = mean_direction(target, tol=cfg.mean_tol, axis=axis)
    radius = angular_radius(target, d0) + np.deg2rad(cfg.center_margin_deg)
    d_a, _ = trimmed_centre(target, radius, tol=cfg.mean_tol, axis=axis)
    d_b, c_b = trimmed_centre(source, radius, tol=cfg.mean_tol, axis=axis)
    return d_a, d_b, c_b


def _flip(points, cfg):
    if not cfg.hemisphere_flip:
        return points
    return np.where(points[:, 2:3] < 0.0, -points, points)


def _shift_rotation(axis, shift, bins):
    # undo a source azimuth lead of ``shift`` bins
    return axis_rotation(axis, -2.0 * np.pi * shift / bins)


# --------------------------------------------------------------------------
# matchers


def spmc(target, source, cfg=None, axis=None):
    """Spherical pattern matching by correlation.

    Returns ``R_A^T @ Rz(-2 pi s*/K) @ R_B`` where ``R_A``/``R_B`` take the
    reference directions to the north pole and ``s*`` is the correlation
    peak of the two z-azimuth histograms.  ``axis`` only labels errors.
    """
    cfg = cfg or MatcherConfig()
    target = _check_points(target)
    source = _check_points(source)
    d_a, d_b, c_b = reference_centres(target, source, cfg, axis)
    r_a, r_b = rotation_to_north(d_a), rotation_to_north(d_b)
    h_a = _accel.azimuth_histogram(_flip(apply_rotation(target, r_a), cfg), 2, cfg.bins)
    h_b = _accel.azimuth_histogram(_flip(apply_rotation(source, r_b), cfg), 2, cfg.bins)
    s_star, peak, _ = circular_correlate(h_a, h_b)
    rot = r_a.T @ _shift_rotation(2, s_star, cfg.bins) @ r_b
    return MatchResult(
        rotation=rot,
        score=peak,
        aligned_source=apply_rotation(source, rot),
        shifts=(s_star,),
        iterations=1,
        converged=True,
        kind="spmc",
        source_centre=c_b,
    )


def frs(target, source, cfg=None, warm_start=None, max_iters=None, tol=None, axis=None):
    """Fast rotation search by per-axis azimuth corrections.

    Works in the target's mean-to-north frame.  Each iteration correlates
    the x, y and z azimuth histograms of target and moving source and
    applies ``Rz @ Ry @ Rx`` built from the three shifts.  Stops once every
    shift is within ``tol`` bins.  Hitting ``max_iters`` is not an error:
    the best-scoring iterate is returned with ``converged=False``.
    """
    cfg = cfg or MatcherConfig()
    max_iters = cfg.frs_max_iters if max_iters is None else int(max_iters)
    tol = cfg.frs_tol if tol is None else tol
    target = _check_points(target)
    source = _check_points(source)
    d_a, _, c_b = reference_centres(target, source, cfg, axis)
    r_a = rotation_to_north(d_a)
    a_np = _flip(apply_rotation(target, r_a), cfg)
    h_a = [_accel.azimuth_histogram(a_np, u, cfg.bins) for u in range(3)]

    r = np.eye(3) if warm_start is None else np.asarray(warm_start, dtype=np.float64)
    best = None
    history = []
    converged = False
    for t in range(max_iters + 1):
        moving = _flip(apply_rotation(source, r_a @ r), cfg)
        shifts, peaks = [], []
        for u in range(3):
            s_u, p_u, _ = circular_correlate(h_a[u], _accel.azimuth_histogram(moving, u, cfg.bins))
            shifts.append(s_u)
            peaks.append(p_u)
        score = float(sum(peaks))
        history.append((r.copy(), score, tuple(shifts)))
        if best is None or score > best[1]:
            best = history[-1]
        if all(abs(s) <= tol for s in shifts):
            converged = True
            break
        if t == max_iters:
            break
        r_inc = (
            _shift_rotation(2, shifts[2], cfg.bins)
            @ _shift_rotation(1, shifts[1], cfg.bins)
            @ _shift_rotation(0, shifts[0], cfg.bins)
        )
        r = r_a.T @ r_inc @ r_a @ r

    rot, score, shifts = history[-1] if converged else best
    return MatchResult(
        rotation=rot,
        score=score,
        aligned_source=apply_rotation(source, rot),
        shifts=shifts,
        iterations=len(history),
        converged=converged,
        kind="frs",
        source_centre=c_b,
        history=history,
    )


def spmc_frs(target, source, cfg=None, axis=None):
    """SPMC proposal refined by a short, tight FRS run."""
    cfg = cfg or MatcherConfig()
    init = spmc(target, source, cfg, axis=axis)
    out = frs(
        target,
        source,
        cfg,
        warm_start=init.rotation,
        max_iters=cfg.hybrid_max_iters,
        tol=cfg.hybrid_tol,
        axis=axis,
    )
    out.kind = "spmc_frs"
    return out


_DISPATCH = {"spmc": spmc, "frs": frs, "spmc_frs": spmc_frs}


def match(target, source, cfg=None, axis=None):
    """Run the matcher named by ``cfg.kind``."""
    cfg = cfg or MatcherConfig()
    return _DISPATCH[cfg.kind](target, source, cfg, axis=axis)


def with_kind(cfg, kind):
    return replace(cfg, kind=kind)
