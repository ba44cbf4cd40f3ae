"""Hot numeric kernels: azimuth binning and direct circular correlation.

Each kernel exists twice, a numba ``@njit`` loop and a vectorised numpy
version.  The numba path is used when numba imports cleanly and the
environment variable ``SO3_ALIGN_DISABLE_NUMBA`` is unset or ``0``.
Both paths produce identical counts; correlations agree exactly whenever
the histograms hold integer counts.
"""

import os

import numpy as np

TWO_PI = 2.0 * np.pi

# (first, second) coordinate used by atan2(second, first) for the azimuth
# about axis x, y, z.  Each pair is right-handed about its axis.
_AZIMUTH_COORDS = ((1, 2), (2, 0), (0, 1))


def _flag_disabled():
    return os.environ.get("SO3_ALIGN_DISABLE_NUMBA", "0").strip().lower() not in (
        "",
        "0",
        "false",
        "no",
    )


# --------------------------------------------------------------------------
# numpy implementations


def _azimuth_bins_numpy(points, axis, n_bins):
    i, j = _AZIMUTH_COORDS[axis]
    phi = np.arctan2(points[:, j], points[:, i])
    phi = np.where(phi < 0.0, phi + TWO_PI, phi)
    idx = (phi * (n_bins / TWO_PI)).astype(np.int64)
    return np.minimum(idx, n_bins - 1)


def azimuth_histogram_numpy(points, axis, n_bins):
    idx = _azimuth_bins_numpy(points, axis, n_bins)
    return np.bincount(idx, minlength=n_bins).astype(np.float64)


def polar_azimuth_histogram_numpy(points, axis, n_bins, polar_bins):
    az = _azimuth_bins_numpy(points, axis, n_bins)
    cos_polar = np.clip(points[:, axis], -1.0, 1.0)
    pol = (np.arccos(cos_polar) * (polar_bins / np.pi)).astype(np.int64)
    pol = np.minimum(pol, polar_bins - 1)
    flat = np.bincount(pol * n_bins + az, minlength=polar_bins * n_bins)
    return flat.reshape(polar_bins, n_bins).astype(np.float64)


def circular_correlation_numpy(h_a, h_b):
    k = h_a.shape[0]
    lam = np.arange(k)
    idx = (lam[None, :] + lam[:, None]) % k  # row s, column lambda
    return h_b[idx] @ h_a


# --------------------------------------------------------------------------
# numba implementations

try:  # pragma: no cover - exercised implicitly when numba is installed
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False


if _HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _azimuth_bin(v0, v1, n_bins):
        phi = np.arctan2(v1, v0)
        if phi < 0.0:
            phi += TWO_PI
        b = int(phi * (n_bins / TWO_PI))
        if b >= n_bins:
            b = n_bins - 1
        return b

    @numba.njit(cache=True, nogil=True)
    def _azimuth_histogram_nb(points, i, j, n_bins):
        hist = np.zeros(n_bins, dtype=np.float64)
        for p in range(points.shape[0]):
            hist[_azimuth_bin(points[p, i], points[p, j], n_bins)] += 1.0
        return hist

    @numba.njit(cache=True, nogil=True)
    def _polar_azimuth_histogram_nb(points, axis, i, j, n_bins, polar_bins):
        hist = np.zeros((polar_bins, n_bins), dtype=np.float64)
        for p in range(points.shape[0]):
            c = min(1.0, max(-1.0, points[p, axis]))
            r = int(np.arccos(c) * (polar_bins / np.pi))
            if r >= polar_bins:
                r = polar_bins - 1
            hist[r, _azimuth_bin(points[p, i], points[p, j], n_bins)] += 1.0
        return hist

    @numba.njit(cache=True, nogil=True)
    def circular_correlation_numba(h_a, h_b):
        k = h_a.shape[0]
        out = np.zeros(k, dtype=np.float64)
        for s in range(k):
            acc = 0.0
            for lam in range(k):
                acc += h_a[lam] * h_b[(lam + s) % k]
            out[s] = acc
        return out

    def azimuth_histogram_numba(points, axis, n_bins):
        i, j = _AZIMUTH_COORDS[axis]
        return _azimuth_histogram_nb(points, i, j, n_bins)

    def polar_azimuth_histogram_numba(points, axis, n_bins, polar_bins):
        i, j = _AZIMUTH_COORDS[axis]
        return _polar_azimuth_histogram_nb(points, axis, i, j, n_bins, polar_bins)


IMPLEMENTATIONS = {
    "numpy": {
        "azimuth_histogram": azimuth_histogram_numpy,
        "polar_azimuth_histogram": polar_azimuth_histogram_numpy,
        "circular_correlation": circular_correlation_numpy,
    }
}
if _HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "azimuth_histogram": azimuth_histogram_numba,
        "polar_azimuth_histogram": polar_azimuth_histogram_numba,
        "circular_correlation": circular_correlation_numba,
    }

BACKEND = "numba" if (_HAVE_NUMBA and not _flag_disabled()) else "numpy"
USING_NUMBA = BACKEND == "numba"

_active = IMPLEMENTATIONS[BACKEND]


def azimuth_histogram(points, axis, n_bins):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    return _active["azimuth_histogram"](pts, int(axis), int(n_bins))


def polar_azimuth_histogram(points, axis, n_bins, polar_bins):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    return _active["polar_azimuth_histogram"](pts, int(axis), int(n_bins), int(polar_bins))


def circular_correlation(h_a, h_b):
    return _active["circular_correlation"](
        np.ascontiguousarray(h_a, dtype=np.float64),
        np.ascontiguousarray(h_b, dtype=np.float64),
    )
