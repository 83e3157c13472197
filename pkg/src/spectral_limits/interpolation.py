"""Kernel interpolation between graph functions and manifold functions.

The truncated-parabola kernel vanishes beyond eps; normalizing it against
the empirical kernel density turns a vertex function into a Lipschitz
function on the sample's eps-neighborhood (a convex combination of vertex
values, hence a partition of unity).  The continuum counterparts of the
kernel density and the Dirichlet-form / L2-norm comparison reports of the
discretization direction live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .geometry import Circle, FlatTorus, ManifoldModel, Point, Sphere, Spindle, \
    model_sn, sphere_area, unit_ball_volume
from .sampling import Density, DensitySpec, PointCloud, make_density
from .graph import build_edges

__all__ = [
    "KernelContext",
    "TestFunction",
    "psi_eps",
    "theta_n_eps",
    "theta_eps",
    "theta_K_eps",
    "interpolate",
    "discretize",
    "EnergyComparison",
    "L2Comparison",
    "energy_comparison_report",
    "l2_norm_comparison_report",
]


def psi_eps(dist, eps: float):
    """Truncated parabola kernel (1 - (d/eps)^2)/2 on [0, eps]."""
    d = np.asarray(dist, dtype=float)
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    out = np.where(d <= eps, 0.5 * (1.0 - (d / eps) ** 2), 0.0)
    return float(out) if out.ndim == 0 else out


class KernelContext:
    """A sample with its eps-kernel; caches kernel sums at query points."""

    def __init__(self, cloud: PointCloud, eps: float):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.cloud = cloud
        self.eps = float(eps)
        self._cache: dict = {}

    def kernel_row(self, x: Point) -> np.ndarray:
        key = x.intrinsic.tobytes()
        row = self._cache.get(key)
        if row is None:
            d = self.cloud.manifold.geodesic_to_many(x.intrinsic, self.cloud.intrinsic)
            row = psi_eps(d, self.eps)
            self._cache[key] = row
        return row


def theta_n_eps(ctx: KernelContext, x: Point) -> float:
    """Empirical kernel density (1/(n-1)) * sum_i psi_eps(d_g(x, x_i))."""
    row = ctx.kernel_row(x)
    return float(np.sum(row) / (ctx.cloud.n - 1))


def theta_eps(mfd: ManifoldModel, dens, x: Point, n_mc: int = 20000,
              seed: int = 0, eps: Optional[float] = None) -> float:
    """Continuum kernel density: integral of psi_eps(d_g(x, .)) against rho.

    Radial quadrature on the circle, sphere and torus (below the
    injectivity radius); Monte-Carlo on the spindle.
    """
    if eps is None:
        raise ValueError("eps is required")
    if isinstance(dens, DensitySpec):
        dens = make_density(mfd, dens)
    if isinstance(mfd, Circle):
        R = mfd.radius
        half = min(eps, math.pi * R)
        th0 = float(x.intrinsic[0])

        def f(s):
            return psi_eps(abs(s), eps) * float(dens.pdf(np.array([[th0 + s / R]]))[0])

        val, _ = integrate.quad(f, -half, half, epsabs=0.0, epsrel=1e-10, limit=200)
        return float(val)
    if dens.spec.kind != "uniform":
        raise ValueError("only the uniform density is supported off the circle")
    rho0 = 1.0 / mfd.total_volume
    if isinstance(mfd, Sphere):
        R, m = mfd.radius, mfd.m
        top = min(eps, math.pi * R)
        val, _ = integrate.quad(
            lambda r: psi_eps(r, eps) * (R * math.sin(r / R)) ** (m - 1),
            0.0, top, epsabs=0.0, epsrel=1e-10, limit=200,
        )
        return rho0 * sphere_area(m - 1) * val
    if isinstance(mfd, FlatTorus):
        if eps > mfd.injectivity_radius:
            raise ValueError("torus radial quadrature needs eps below min period/2")
        m = mfd.m
        val, _ = integrate.quad(
            lambda r: psi_eps(r, eps) * r ** (m - 1),
            0.0, eps, epsabs=0.0, epsrel=1e-10, limit=200,
        )
        return rho0 * m * unit_ball_volume(m) * val
    if isinstance(mfd, Spindle):
        rng = np.random.Generator(np.random.PCG64(seed))
        z = mfd.uniform_intrinsic(n_mc, rng)
        emb = mfd.embed(z)
        chord = np.linalg.norm(emb - x.embedded, axis=1)
        close = np.nonzero(chord < eps)[0]
        acc = 0.0
        if len(close):
            dg = mfd.geodesic_to_many(x.intrinsic, z[close])
            acc = float(np.sum(psi_eps(dg, eps)))
        return acc / n_mc  # rho0 * vol(M) = 1
    raise ValueError(f"unsupported manifold {mfd.kind!r}")


def theta_K_eps(m: int, K: float, eps: float) -> float:
    """Comparison-model kernel mass m omega_m int_0^eps psi_eps sn_K^{m-1}."""
    val, _ = integrate.quad(
        lambda r: psi_eps(r, eps) * model_sn(K, r) ** (m - 1),
        0.0, eps, epsabs=0.0, epsrel=1e-10, limit=200,
    )
    return m * unit_ball_volume(m) * val


def interpolate(ctx: KernelContext, phi, x: Point) -> float:
    """Kernel-weighted extension of a vertex function to the point x.

    The weights form a partition of unity on the support of the kernel
    density, so the value is a convex combination of vertex values.
    """
    phi = np.asarray(phi, dtype=float)
    row = ctx.kernel_row(x)
    total = float(np.sum(row))
    if total <= 0.0:
        raise ValueError("point lies outside the kernel support (theta_n = 0)")
    return float(np.dot(row, phi) / total)


def discretize(f: Callable, cloud: PointCloud) -> np.ndarray:
    """Pointwise restriction of a manifold function to the sample."""
    return np.asarray(f(cloud.intrinsic, cloud.embedded), dtype=float)


# ---------------------------------------------------------------------------
# comparison reports


@dataclass(frozen=True)
class TestFunction:
    """A smooth test function bundled with its analytic reference integrals.

    ``values`` maps (intrinsic, embedded) arrays to one value per point.
    The integrals are against the bound density: ``grad_sq_rho2`` is
    int |grad f|^2 rho^2 dvol, ``sq_rho`` is int f^2 rho dvol, and
    ``sq_rho2`` is int f^2 rho^2 dvol.
    """

    __test__ = False  # not a pytest class, despite the name

    name: str
    values: Callable
    grad_sq_rho2: Optional[float] = None
    sq_rho: Optional[float] = None
    sq_rho2: Optional[float] = None


@dataclass(frozen=True)
class EnergyComparison:
    n: int
    eps: float
    discrete: float
    continuous: float
    difference: float


@dataclass(frozen=True)
class L2Comparison:
    n: int
    eps: float
    plain_discrete: float
    plain_continuous: float
    degree_discrete: float
    degree_continuous: float


def energy_comparison_report(mfd, dens, cloud: PointCloud, eps: float,
                             f: TestFunction) -> EnergyComparison:
    """Discrete vs continuous Dirichlet energy of a test function.

    The discrete side sums squared difference quotients over surrogate-metric
    eps-neighbor pairs with the sampling normalization; the continuous side
    is int |grad f|^2 rho^2 dvol / (m+2).  Reporting only; no bound is
    asserted.
    """
    if f.grad_sq_rho2 is None:
        raise ValueError("test function needs the gradient-square integral")
    n, m = cloud.n, mfd.m
    vals = discretize(f.values, cloud)
    edges = build_edges(cloud, "embedded", eps)
    diff = (vals[edges[:, 0]] - vals[edges[:, 1]]) / eps
    scale = n * (n - 1) * unit_ball_volume(m) * eps**m
    discrete = 2.0 * float(np.sum(diff**2)) / scale
    continuous = f.grad_sq_rho2 / (m + 2.0)
    return EnergyComparison(
        n=n, eps=eps, discrete=discrete, continuous=continuous,
        difference=discrete - continuous,
    )


def l2_norm_comparison_report(mfd, dens, cloud: PointCloud, eps: float,
                              f: TestFunction) -> L2Comparison:
    """Discrete vs continuous L2 norms, plain and degree-weighted."""
    if f.sq_rho is None or f.sq_rho2 is None:
        raise ValueError("test function needs both squared-norm integrals")
    n, m = cloud.n, mfd.m
    vals = discretize(f.values, cloud)
    plain = float(np.mean(vals**2))
    edges = build_edges(cloud, "embedded", eps)
    deg = np.zeros(n)
    np.add.at(deg, edges[:, 0], 1.0)
    np.add.at(deg, edges[:, 1], 1.0)
    scale = n * (n - 1) * unit_ball_volume(m) * eps**m
    weighted = float(np.sum(vals**2 * deg)) / scale
    return L2Comparison(
        n=n, eps=eps,
        plain_discrete=plain, plain_continuous=f.sq_rho,
        degree_discrete=weighted, degree_continuous=f.sq_rho2,
    )
