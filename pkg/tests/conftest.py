import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from so3align.rotation import quat_to_rotation


def _quat(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


coord = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
quaternions = st.tuples(coord, coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 0.1).map(_quat)
rotations = quaternions.map(quat_to_rotation)
unit_vectors = st.tuples(coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 0.1).map(_quat)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def cap_points(rng, centre, n, radius_deg):
    """Points uniform (in area) inside a spherical cap."""
    from so3align.tbv import rotation_to_north

    cos_r = np.cos(np.deg2rad(radius_deg))
    z = 1.0 - rng.random(n) * (1.0 - cos_r)
    phi = rng.random(n) * 2 * np.pi
    s = np.sqrt(1 - z**2)
    pts = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    return pts @ rotation_to_north(np.asarray(centre, float))  # rotate north -> centre


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
