import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from horolab import catalog

settings.register_profile(
    "horolab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("horolab")


@pytest.fixture(scope="session")
def bump():
    return catalog.get_manifold("bump-surface")


@pytest.fixture(scope="session")
def wave():
    return catalog.get_manifold("wave-surface")


@pytest.fixture(scope="session")
def disk():
    return catalog.poincare_disk()


@pytest.fixture(scope="session")
def flat():
    return catalog.flat_surface()


def random_tangent(m, p, rng, length):
    """Tangent vector at ``p`` with metric norm ``length`` and random direction."""
    c = rng.normal(size=m.dim)
    c *= length / np.linalg.norm(c)
    return m.from_coefficients(p, c)
