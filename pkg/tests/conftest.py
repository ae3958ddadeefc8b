import numpy as np
import pytest

from sphereflock.dynamics import Ensemble, admissibilize
from sphereflock.runner import build_initial, run
from sphereflock.scenarios import scenario


def random_unit(rng, n=1):
    x = rng.normal(size=(n, 3))
    return x / np.linalg.norm(x, axis=1)[:, None]


def random_ensemble(rng, n, speed=1.0):
    """Admissible ensemble with unit positions and tangent velocities."""
    x = random_unit(rng, n)
    v = rng.normal(size=(n, 3)) * speed
    return admissibilize(x, v)


@pytest.fixture(scope="session")
def paper_ensemble():
    return build_initial(scenario("fig2"))


@pytest.fixture(scope="session")
def fig2_log():
    return run(scenario("fig2"))
