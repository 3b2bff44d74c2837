import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "microlax",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("microlax")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, n, lo=0.5, hi=3.0):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.T
