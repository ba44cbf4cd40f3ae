"""Error metrics, evaluation-only time pairing and the scaling benchmark."""

import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .align import AlignmentConfig, align
from .errors import EmptyPairing, MissingTimestamps
from .rotation import as_matrices, geodesic_angle
from .synthesis import generate_scenario, plant_global, random_rotations

DEFAULT_THRESHOLDS = (1.0, 2.0, 5.0, 10.0)


@dataclass
class ErrorReport:
    per_pair_errors: np.ndarray
    pairs: np.ndarray
    mae: Optional[float]
    rmse: Optional[float]
    median: Optional[float]
    success_rates: dict = field(default_factory=dict)
    runtime: Optional[float] = None


@dataclass
class ScalingReport:
    sizes: list
    times: list
    loglog_slope: Optional[float]
    window_min: int = 10_000
    mode: str = "single-threaded"
    backend: str = ""


def pair_by_timestamp(a, b, max_gap):
    """Greedy nearest-timestamp pairing of two rotation sets.

    Candidate pairs link every sample to its temporal neighbours in the
    other stream; they are accepted in order of increasing gap while both
    indices are unused and the gap is at most ``max_gap`` seconds.  Returns
    an ``(m, 2)`` int array sorted by the first index.
    """
    if a.timestamps is None or b.timestamps is None:
        raise MissingTimestamps("both rotation sets need timestamps")
    ta, tb = a.timestamps, b.timestamps
    if ta.size == 0 or tb.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    order_b = np.argsort(tb, kind="stable")
    order_a = np.argsort(ta, kind="stable")
    cand = set()
    pos = np.searchsorted(tb[order_b], ta)
    for i, p in enumerate(pos):
        for q in (p - 1, p):
            if 0 <= q < tb.size:
                cand.add((i, int(order_b[q])))
    pos = np.searchsorted(ta[order_a], tb)
    for j, p in enumerate(pos):
        for q in (p - 1, p):
            if 0 <= q < ta.size:
                cand.add((int(order_a[q]), j))
    ranked = sorted(cand, key=lambda ij: (abs(ta[ij[0]] - tb[ij[1]]), ij[0], ij[1]))
    used_a, used_b, pairs = set(), set(), []
    for i, j in ranked:
        if abs(ta[i] - tb[j]) > max_gap:
            break
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((i, j))
    pairs.sort()
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def summarize_errors(errors_deg, thresholds=DEFAULT_THRESHOLDS):
    e = np.asarray(errors_deg, dtype=np.float64)
    if e.size == 0:
        return None, None, None, {float(t): None for t in thresholds}
    rates = {float(t): float(np.mean(e < t)) for t in sorted(thresholds)}
    top = float(np.max(np.abs(e)))
    rmse = top * float(np.sqrt(np.mean((e / top) ** 2))) if top > 0 else 0.0  # scaled: no underflow
    return float(e.mean()), rmse, float(np.median(e)), rates


def error_report(targets, aligned_sources, pairs=None, thresholds=DEFAULT_THRESHOLDS, runtime=None):
    """Per-pair geodesic errors (degrees) and their summary statistics.

    ``pairs`` defaults to the identity pairing.  Success rates count
    errors strictly below each threshold.
    """
    a, b = as_matrices(targets), as_matrices(aligned_sources)
    if pairs is None:
        if a.shape[0] != b.shape[0]:
            raise EmptyPairing("identity pairing needs equal set sizes")
        pairs = np.stack([np.arange(a.shape[0])] * 2, axis=1)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise EmptyPairing("no index pairs to evaluate")
    errs = np.degrees(np.atleast_1d(geodesic_angle(a[pairs[:, 0]], b[pairs[:, 1]])))
    mae, rmse, med, rates = summarize_errors(errs, thresholds)
    return ErrorReport(errs, pairs, mae, rmse, med, rates, runtime)


def constant_delta_error(r_gt, r_est):
    """Geodesic angle between ground truth and estimate, in degrees."""
    return float(np.degrees(geodesic_angle(r_gt, r_est)))


def loglog_slope(sizes, times, window_min=10_000):
    sizes = np.asarray(sizes, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    keep = sizes >= window_min
    if keep.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log10(sizes[keep]), np.log10(times[keep]), 1)
    return float(slope)


def scaling_benchmark(sizes, scenario_spec, cfg=None, repeats=3, window_min=10_000, seed=0):
    """Median wall time of one end-to-end alignment per set size.

    Data generation is excluded from the timing.  One untimed warm-up run
    at the smallest size absorbs JIT compilation.
    """
    from . import _accel

    cfg = cfg or AlignmentConfig()
    sizes = sorted({int(n) for n in sizes})
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    r_gt = random_rotations(1, seed=seed)[0]

    def instance(n):
        a = generate_scenario(replace(scenario_spec, n=n, seed=seed))
        return a, plant_global(a, r_gt, shuffle_seed=seed + 1)

    align(*instance(sizes[0]), cfg)
    times = []
    for n in sizes:
        a, b = instance(n)
        runs = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            align(a, b, cfg)
            runs.append(time.perf_counter() - t0)
        times.append(float(np.median(runs)))
    mode = "multi-threaded" if cfg.threads and cfg.threads > 1 else "single-threaded"
    return ScalingReport(sizes, times, loglog_slope(sizes, times, window_min), window_min, mode, _accel.BACKEND)
