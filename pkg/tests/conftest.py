import math
from types import SimpleNamespace

import numpy as np
import pytest

from spectral_limits.geometry import Circle, FlatTorus, Sphere, Spindle
from spectral_limits.graph import WeightedGraph, gamma_N_eps
from spectral_limits.sampling import DensitySpec, sample_dataset


def fake_cloud(embedded, m=1, total_volume=2.0 * math.pi):
    """A minimal stand-in cloud with prescribed embedded coordinates."""
    embedded = np.asarray(embedded, dtype=float)
    if embedded.ndim == 1:
        embedded = embedded[:, None]
    manifold = SimpleNamespace(m=m, total_volume=total_volume)
    return SimpleNamespace(embedded=embedded, n=len(embedded), manifold=manifold)


def custom_graph(n, edges, w_V, w_E, eps=1.0, kind="custom"):
    return WeightedGraph(
        n_vertices=n,
        epsilon=eps,
        edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        w_V=np.asarray(w_V, dtype=float),
        w_E=np.asarray(w_E, dtype=float),
        kind=kind,
    )


@pytest.fixture(scope="session")
def circle():
    return Circle(1.0)


@pytest.fixture(scope="session")
def sphere2():
    return Sphere(2, 1.0)


@pytest.fixture(scope="session")
def torus():
    return FlatTorus((1.0, 1.0))


@pytest.fixture(scope="session")
def spindle2():
    return Spindle(2)


@pytest.fixture(scope="session")
def spindle3():
    return Spindle(3)


@pytest.fixture(scope="session")
def circle_cloud_200(circle):
    return sample_dataset(circle, DensitySpec("uniform"), 200, seed=3)


@pytest.fixture(scope="session")
def circle_graph_200(circle_cloud_200):
    from spectral_limits.sampling import epsilon_schedule

    eps = epsilon_schedule(200, 1)
    return gamma_N_eps(circle_cloud_200, eps)


@pytest.fixture(scope="session")
def path3_gamma_N():
    """Collinear points 0, 0.5, 1.2 at eps 1: the two-edge path graph."""
    cloud = fake_cloud([0.0, 0.5, 1.2], m=1)
    return gamma_N_eps(cloud, 1.0)
