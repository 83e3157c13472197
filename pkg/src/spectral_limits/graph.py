"""Weighted epsilon-neighborhood graphs and their Laplacian.

Two constructions are provided.  Both connect sample points whose surrogate
distance is strictly below epsilon; they differ in the weights:

* ``gamma_m``: vertex weight 1/n, constant edge weight
  vol(M) / (n (n-1) omega_m eps^m)  (needs the total volume),
* ``gamma_N``: vertex weight deg / (n (n-1) omega_m eps^m), constant edge
  weight 1 / (n (n-1) omega_m eps^m)  (volume-free, random-walk flavor).

The Laplacian acts by
``(L phi)(x) = 2 / (w_V(x) eps^2) * sum_{xy in E} (phi(x) - phi(y)) w_E(xy)``
and is self-adjoint, nonnegative in the inner product weighted by w_V.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from .geometry import unit_ball_volume
from .sampling import PointCloud

__all__ = [
    "WeightedGraph",
    "build_edges",
    "gamma_m_eps",
    "gamma_N_eps",
    "laplacian_apply",
    "random_walk_matrix",
    "graph_distance",
    "hop_distances",
    "ball",
    "graph_volume",
    "dirichlet_energy",
    "save_graph_csv",
]


@dataclass
class WeightedGraph:
    """Finite weighted graph (V, E, w_V, w_E, eps) with a degree cache."""

    n_vertices: int
    epsilon: float
    edges: np.ndarray          # (E, 2) int array, i < j, lexicographically sorted
    w_V: np.ndarray            # (n,)
    w_E: np.ndarray            # (E,)
    kind: str = "custom"

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.w_V = np.asarray(self.w_V, dtype=float)
        self.w_E = np.asarray(self.w_E, dtype=float)
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if len(self.w_V) != self.n_vertices:
            raise ValueError("w_V length does not match n_vertices")
        if len(self.w_E) != len(self.edges):
            raise ValueError("w_E length does not match edge count")
        if len(self.edges) and np.any(self.edges[:, 0] == self.edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        if np.any(self.w_V < 0) or np.any(self.w_E < 0):
            raise ValueError("weights must be nonnegative")
        key = self.edges[:, 0] * self.n_vertices + self.edges[:, 1]
        if len(key) != len(np.unique(key)):
            raise ValueError("duplicate edges are not allowed")
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        self.degrees = deg
        self._adj = None
        self._wadj = None

    # -- cached sparse views ------------------------------------------------

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency with zero diagonal."""
        if self._adj is None:
            i, j = self.edges[:, 0], self.edges[:, 1]
            ones = np.ones(len(self.edges))
            a = sparse.coo_matrix(
                (np.r_[ones, ones], (np.r_[i, j], np.r_[j, i])),
                shape=(self.n_vertices, self.n_vertices),
            )
            self._adj = a.tocsr()
        return self._adj

    def weighted_adjacency(self) -> sparse.csr_matrix:
        """Symmetric adjacency carrying the edge weights."""
        if self._wadj is None:
            i, j = self.edges[:, 0], self.edges[:, 1]
            w = self.w_E
            a = sparse.coo_matrix(
                (np.r_[w, w], (np.r_[i, j], np.r_[j, i])),
                shape=(self.n_vertices, self.n_vertices),
            )
            self._wadj = a.tocsr()
        return self._wadj

    def incident_edge_weight(self) -> np.ndarray:
        """Per-vertex sum of incident edge weights."""
        return np.asarray(self.weighted_adjacency().sum(axis=1)).ravel()

    @property
    def isolated(self) -> np.ndarray:
        return np.nonzero(self.degrees == 0)[0]

    def total_volume(self) -> float:
        return float(np.sum(self.w_V))


# ---------------------------------------------------------------------------
# construction


def build_edges(cloud: PointCloud, metric: str, eps: float) -> np.ndarray:
    """All pairs i < j at strict distance < eps, sorted lexicographically."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if metric == "embedded":
        tree = cKDTree(cloud.embedded)
        pairs = tree.query_pairs(r=eps, output_type="ndarray")
        if len(pairs):
            d = np.linalg.norm(
                cloud.embedded[pairs[:, 0]] - cloud.embedded[pairs[:, 1]], axis=1
            )
            pairs = pairs[d < eps]
    elif metric == "geodesic":
        mfd = cloud.manifold
        rows = []
        for i in range(cloud.n - 1):
            d = mfd.geodesic_to_many(cloud.intrinsic[i], cloud.intrinsic[i + 1 :])
            js = np.nonzero(d < eps)[0] + i + 1
            if len(js):
                rows.append(np.column_stack([np.full(len(js), i), js]))
        pairs = (
            np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
        )
    else:
        raise ValueError(f"unknown metric {metric!r}")
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    pairs.sort(axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def _edge_scale(n: int, m: int, eps: float) -> float:
    return n * (n - 1) * unit_ball_volume(m) * eps**m


def gamma_m_eps(cloud: PointCloud, eps: float, total_volume: Optional[float] = None,
                metric: str = "embedded") -> WeightedGraph:
    """Volume-normalized graph: w_V = 1/n, constant edge weight."""
    if total_volume is None:
        total_volume = cloud.manifold.total_volume
    if total_volume <= 0:
        raise ValueError("total_volume must be positive")
    n = cloud.n
    edges = build_edges(cloud, metric, eps)
    scale = _edge_scale(n, cloud.manifold.m, eps)
    return WeightedGraph(
        n_vertices=n,
        epsilon=eps,
        edges=edges,
        w_V=np.full(n, 1.0 / n),
        w_E=np.full(len(edges), total_volume / scale),
        kind="gamma_m",
    )


def gamma_N_eps(cloud: PointCloud, eps: float, metric: str = "embedded") -> WeightedGraph:
    """Degree-weighted (random-walk) graph; needs no knowledge of vol(M)."""
    n = cloud.n
    edges = build_edges(cloud, metric, eps)
    scale = _edge_scale(n, cloud.manifold.m, eps)
    deg = np.zeros(n, dtype=np.int64)
    if len(edges):
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
    g = WeightedGraph(
        n_vertices=n,
        epsilon=eps,
        edges=edges,
        w_V=deg / scale,
        w_E=np.full(len(edges), 1.0 / scale),
        kind="gamma_N",
    )
    return g


# ---------------------------------------------------------------------------
# operators


def laplacian_apply(g: WeightedGraph, phi: np.ndarray) -> np.ndarray:
    """Apply the graph Laplacian to a vertex function."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape[0] != g.n_vertices:
        raise ValueError("function length does not match vertex count")
    bad = np.nonzero(g.w_V == 0)[0]
    if len(bad):
        raise ValueError(f"vertices with zero weight w_V: {bad[:10].tolist()}")
    wa = g.weighted_adjacency()
    dw = g.incident_edge_weight()
    out = dw * phi - wa @ phi
    return 2.0 / (g.w_V * g.epsilon**2) * out


def random_walk_matrix(cloud: PointCloud, eps: float) -> sparse.csr_matrix:
    """The scaled random-walk Laplacian 2 eps^-2 (I - D^-1 A) as sparse CSR.

    A is the 0/1 adjacency with zero diagonal (so D counts true neighbors);
    its action coincides with the Laplacian of the gamma_N graph.
    """
    edges = build_edges(cloud, "embedded", eps)
    n = cloud.n
    i, j = edges[:, 0], edges[:, 1]
    ones = np.ones(len(edges))
    A = sparse.coo_matrix(
        (np.r_[ones, ones], (np.r_[i, j], np.r_[j, i])), shape=(n, n)
    ).tocsr()
    deg = np.asarray(A.sum(axis=1)).ravel()
    if np.any(deg == 0):
        raise ValueError(
            f"zero-degree rows at {np.nonzero(deg == 0)[0][:10].tolist()}"
        )
    Dinv = sparse.diags(1.0 / deg)
    eye = sparse.identity(n, format="csr")
    return (2.0 / eps**2) * (eye - Dinv @ A)


# ---------------------------------------------------------------------------
# metric structure


def hop_distances(g: WeightedGraph, i: int) -> np.ndarray:
    """BFS hop counts from vertex i (inf when unreachable)."""
    return csgraph.shortest_path(g.adjacency(), method="D", unweighted=True,
                                 indices=i)


def graph_distance(g: WeightedGraph, i: int, j: int) -> float:
    """Graph distance: hop count times eps; inf when disconnected."""
    hops = hop_distances(g, i)[j]
    return float(hops * g.epsilon) if np.isfinite(hops) else float("inf")


def ball(g: WeightedGraph, i: int, r: float, hops: Optional[np.ndarray] = None) -> np.ndarray:
    """Vertices at graph distance strictly less than r from vertex i."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if hops is None:
        hops = hop_distances(g, i)
    return np.nonzero(hops * g.epsilon < r)[0]


def graph_volume(g: WeightedGraph, subset) -> float:
    """Sum of vertex weights over a subset."""
    subset = np.asarray(subset, dtype=np.int64)
    return float(np.sum(g.w_V[subset])) if len(subset) else 0.0


def dirichlet_energy(g: WeightedGraph, phi: np.ndarray) -> float:
    """Double-counted edge energy sum_x sum_{y~x} ((phi_x-phi_y)/eps)^2 w_E."""
    phi = np.asarray(phi, dtype=float)
    if len(g.edges) == 0:
        return 0.0
    diff = (phi[g.edges[:, 0]] - phi[g.edges[:, 1]]) / g.epsilon
    return float(2.0 * np.sum(diff**2 * g.w_E))


# ---------------------------------------------------------------------------
# serialization


def save_graph_csv(g: WeightedGraph, edge_path, vertex_path):
    """Edge list `i,j,w_E` and vertex list `i,w_V,deg`, with a header line."""
    header = f"# eps={g.epsilon:.17g} kind={g.kind} n={g.n_vertices}\n"
    with open(edge_path, "w") as fh:
        fh.write(header)
        fh.write("i,j,w_E\n")
        for (i, j), w in zip(g.edges, g.w_E):
            fh.write(f"{i},{j},{w:.17g}\n")
    with open(vertex_path, "w") as fh:
        fh.write(header)
        fh.write("i,w_V,deg\n")
        for i in range(g.n_vertices):
            fh.write(f"{i},{g.w_V[i]:.17g},{g.degrees[i]}\n")
