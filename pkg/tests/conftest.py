import numpy as np
import pytest

from coehetnet import ScenarioConfig
from coehetnet.simulator import run_drops


def mc_intersection_area(circles, n_points=10_000_000, seed=0):
    """Rejection-sampling oracle: area of the common intersection of discs.

    Samples uniformly over the tightest axis-aligned box around the
    intersection candidates; independent of the quadrature code under test.
    """
    lo_x = max(c.cx - c.r for c in circles)
    hi_x = min(c.cx + c.r for c in circles)
    lo_y = max(c.cy - c.r for c in circles)
    hi_y = min(c.cy + c.r for c in circles)
    if hi_x <= lo_x or hi_y <= lo_y:
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo_x, hi_x, n_points)
    y = rng.uniform(lo_y, hi_y, n_points)
    inside = np.ones(n_points, dtype=bool)
    for c in circles:
        inside &= (x - c.cx) ** 2 + (y - c.cy) ** 2 <= c.r ** 2
    return inside.mean() * (hi_x - lo_x) * (hi_y - lo_y)


@pytest.fixture(scope="session")
def cfg():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def drop_pool(cfg):
    """400 drops at the default operating point (B=10, w=1/2, eta=0.2, rho=0.5)."""
    return run_drops(cfg, 400, base_seed=20240808)
