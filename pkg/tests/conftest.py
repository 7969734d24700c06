import numpy as np
import pytest
from hypothesis import settings

from ajwave import kernels

settings.register_profile("ajwave", deadline=None, max_examples=60)
settings.load_profile("ajwave")


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Route every library call through one kernel backend."""
    impl = kernels.get_backend(request.param)
    for name in ("jacobi_eigh", "line_minimize", "ppm_synthesize", "ppm_correlate"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
