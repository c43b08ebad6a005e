"""Shared fixtures: reference specs and cached integration runs."""

import numpy as np
import pytest

from rpcidnp.core.system_model import SpinSystemSpec
from rpcidnp.dynamics.deterministic import TimeSeries, integrate


@pytest.fixture(scope="session")
def fig3_spec():
    return SpinSystemSpec.single_nucleus(A=1.0, omega=0.1)


@pytest.fixture(scope="session")
def fig4_spec():
    return SpinSystemSpec.single_nucleus(A=1.0, omega=0.1, model="kominis", k=4.0)


@pytest.fixture(scope="session")
def fig3_series(fig3_spec):
    return integrate(fig3_spec, t_end=300.0, dt=0.025, sample_every=2)


@pytest.fixture(scope="session")
def fig4_series(fig4_spec):
    return integrate(fig4_spec, t_end=5.0, dt=0.01)


@pytest.fixture(scope="session")
def jones_hore_series():
    spec = SpinSystemSpec.single_nucleus(A=1.0, omega=0.1, model="jones_hore", k=4.0)
    return integrate(spec, t_end=5.0, dt=0.005)


@pytest.fixture(scope="session")
def haberkorn_series():
    spec = SpinSystemSpec.single_nucleus(A=1.0, omega=0.1, model="haberkorn", k=4.0)
    return integrate(spec, t_end=1.25, dt=0.0025)


@pytest.fixture
def make_series():
    """Build a TimeSeries from times and iz; other columns are zero."""

    def build(times, iz, qs=None):
        times = np.asarray(times, dtype=float)
        zeros = np.zeros_like(times)
        return TimeSeries(
            times=times, trace=np.ones_like(times),
            qs=zeros if qs is None else np.asarray(qs, dtype=float),
            iz=np.asarray(iz, dtype=float), iz_norm=np.asarray(iz, dtype=float),
            izS=zeros, izT=zeros, jz=zeros, iz_proj=zeros,
        )

    return build


@pytest.fixture
def random_hermitian():
    """Random Hermitian matrices from a fixed stream."""
    rng = np.random.default_rng(1234)

    def draw(dim):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return 0.5 * (m + m.conj().T)

    return draw
