import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
probabilities = st.floats(min_value=0.02, max_value=0.98)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_probs(rng, k, floor=0.0):
    x = rng.dirichlet(np.ones(k))
    x = floor + (1 - k * floor) * x
    return x
