"""Experiment orchestration: spectrum runs, eigenspace alignment, sweeps.

Every run is a deterministic function of its configuration: sampling seeds
come from the config, eigensolver start vectors from graph hashes, and all
output rows are sorted before writing, so identical configs produce
byte-identical CSVs.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .distortion import s_eps, v_p_eps
from .geometry import Circle, FlatTorus, ManifoldModel, Sphere, Spindle
from .graph import WeightedGraph, gamma_N_eps, gamma_m_eps
from .interpolation import TestFunction, energy_comparison_report, \
    l2_norm_comparison_report
from .plotting import svg_line_chart
from .reference import ReferenceSpectrum, circle_spectrum, sphere_spectrum, \
    spindle_spectrum, torus_spectrum, weighted_circle_spectrum
from .regularity import certify, moser_check
from .sampling import DensitySpec, PointCloud, make_density, sample_dataset, \
    epsilon_schedule
from .spectral import SpectralResult, eigen_decompose, volume_inner, volume_norm

__all__ = [
    "ExperimentConfig",
    "AlignmentReport",
    "parse_config_text",
    "load_config",
    "make_manifold",
    "reference_spectrum_for",
    "run_spectrum_experiment",
    "align_eigenspaces",
    "run_alignment",
    "run_convergence_sweep",
    "run_regularity",
    "run_distortion",
    "run_energy",
    "run_moser",
    "write_rows_csv",
    "write_run_meta",
]

ALL_REPORTS = (
    "sample", "graph", "spectrum", "align", "regularity", "distortion",
    "energy", "moser", "sweep",
)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    manifold: str = "circle"
    radius: float = 1.0
    m: int = 2
    periods: Sequence[float] = (1.0, 1.0)
    warp: float = 1.0 / math.sqrt(2.0)
    density: str = "uniform"
    amplitude: float = 0.0
    n_list: Sequence[int] = (500,)
    seeds: Sequence[int] = (1,)
    eps_rule: object = "schedule"     # "schedule" or a fixed float
    graph_kind: str = "gamma_N"
    k_max: int = 3
    reports: Sequence[str] = ALL_REPORTS
    cluster: Sequence[int] = (1, 1)
    mesh: int = 4096
    l_max: int = 6
    p: float = 4.0
    K: float = 1.0
    mc_outer: int = 20000
    mc_inner: int = 2000
    threads: int = 1
    raw_text: str = ""

    def __post_init__(self):
        if any(n < 16 for n in self.n_list):
            raise ValueError("all n values must be >= 16")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.graph_kind not in ("gamma_N", "gamma_m"):
            raise ValueError(f"unknown graph kind {self.graph_kind!r}")
        unknown = set(self.reports) - set(ALL_REPORTS)
        if unknown:
            raise ValueError(f"unknown reports: {sorted(unknown)}")

    def epsilon_for(self, n: int, m: int) -> float:
        if self.eps_rule == "schedule":
            return epsilon_schedule(n, m)
        return float(self.eps_rule)


def _parse_value(text: str):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_value(t) for t in inner.split(",")]
    if text.startswith('"') and text.endswith('"'):
        return text[1:-1]
    if text.startswith("'") and text.endswith("'"):
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    """Flat `key = value` lines (a TOML-compatible subset); # comments."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, val = line.split("=", 1)
        out[key.strip()] = _parse_value(val)
    return out


_KEY_MAP = {
    "manifold": "manifold", "radius": "radius", "m": "m", "periods": "periods",
    "warp": "warp", "density": "density", "amplitude": "amplitude",
    "n": "n_list", "seeds": "seeds", "eps": "eps_rule", "graph": "graph_kind",
    "k_max": "k_max", "reports": "reports", "cluster": "cluster",
    "mesh": "mesh", "l_max": "l_max", "p": "p", "K": "K",
    "mc_outer": "mc_outer", "mc_inner": "mc_inner", "threads": "threads",
}


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    raw = parse_config_text(text)
    kwargs = {}
    for key, val in raw.items():
        if key not in _KEY_MAP:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[_KEY_MAP[key]] = val
    for listkey in ("n_list", "seeds", "reports", "cluster", "periods"):
        if listkey in kwargs and not isinstance(kwargs[listkey], list):
            kwargs[listkey] = [kwargs[listkey]]
    return ExperimentConfig(raw_text=text, **kwargs)


def make_manifold(cfg: ExperimentConfig) -> ManifoldModel:
    if cfg.manifold == "circle":
        return Circle(cfg.radius)
    if cfg.manifold == "sphere":
        return Sphere(cfg.m, cfg.radius)
    if cfg.manifold == "flat_torus":
        return FlatTorus(cfg.periods)
    if cfg.manifold == "spindle":
        return Spindle(cfg.m, cfg.warp)
    raise ValueError(f"unknown manifold {cfg.manifold!r}")


def make_density_spec(cfg: ExperimentConfig) -> DensitySpec:
    return DensitySpec(kind=cfg.density, amplitude=cfg.amplitude)


def reference_spectrum_for(cfg: ExperimentConfig, mfd: ManifoldModel) -> ReferenceSpectrum:
    """Continuum reference matching the configured manifold and density."""
    k_max = max(cfg.k_max, max(cfg.cluster) + 1 if cfg.cluster else cfg.k_max)
    if isinstance(mfd, Circle):
        if cfg.density == "uniform":
            return circle_spectrum(mfd.radius, k_max)
        return weighted_circle_spectrum(
            mfd.radius, make_density_spec(cfg), k_max, mesh=cfg.mesh
        )
    if cfg.density != "uniform":
        raise ValueError("non-uniform densities are circle-only")
    if isinstance(mfd, Sphere):
        return sphere_spectrum(mfd.m, mfd.radius, k_max)
    if isinstance(mfd, FlatTorus):
        return torus_spectrum(mfd.periods, k_max)
    if isinstance(mfd, Spindle):
        return spindle_spectrum(
            mfd.m, mfd.c, l_max=cfg.l_max, k_max=k_max,
            mesh=min(cfg.mesh, 2048),
        )
    raise ValueError(f"no reference spectrum for {mfd.kind!r}")


def build_graph(cfg: ExperimentConfig, cloud: PointCloud, eps: float) -> WeightedGraph:
    if cfg.graph_kind == "gamma_N":
        return gamma_N_eps(cloud, eps)
    return gamma_m_eps(cloud, eps)


# ---------------------------------------------------------------------------
# spectrum experiment


def _spectrum_cell(cfg, mfd, dens_spec, ref, n, seed):
    eps = cfg.epsilon_for(n, mfd.m)
    cloud = sample_dataset(mfd, dens_spec, n, seed)
    g = build_graph(cfg, cloud, eps)
    rows = []
    try:
        spec = eigen_decompose(g, cfg.k_max)
        connected = 1
    except ValueError:
        spec = None
        connected = 0
    for k in range(cfg.k_max + 1):
        lam_ref = float(ref.eigenvalues[k])
        if spec is None:
            rows.append(dict(n=n, seed=seed, eps=eps, k=k, connected=0,
                             lam_graph=math.nan, estimate=math.nan,
                             lam_ref=lam_ref, abs_err=math.nan,
                             rel_err=math.nan))
            continue
        lam = float(spec.eigenvalues[k])
        est = (mfd.m + 2) * lam
        abs_err = abs(est - lam_ref)
        rel = abs_err / lam_ref if lam_ref > 0 else abs_err
        rows.append(dict(n=n, seed=seed, eps=eps, k=k, connected=1,
                         lam_graph=lam, estimate=est, lam_ref=lam_ref,
                         abs_err=abs_err, rel_err=rel))
    return rows


def _run_cells(cfg, worker, cells):
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(worker, cells))
    else:
        chunks = [worker(c) for c in cells]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: tuple(r[k] for k in ("n", "seed", "k") if k in r))
    return rows


def run_spectrum_experiment(cfg: ExperimentConfig, ref: Optional[ReferenceSpectrum] = None):
    """Graph eigenvalues vs continuum reference, one row per (n, seed, k)."""
    mfd = make_manifold(cfg)
    dens_spec = make_density_spec(cfg)
    if ref is None:
        ref = reference_spectrum_for(cfg, mfd)
    cells = [(n, s) for n in cfg.n_list for s in cfg.seeds]
    return _run_cells(
        cfg, lambda c: _spectrum_cell(cfg, mfd, dens_spec, ref, c[0], c[1]), cells
    )


# ---------------------------------------------------------------------------
# eigenspace alignment


@dataclass
class AlignmentReport:
    """Projection and alignment residuals for one eigenvalue cluster."""

    cluster: tuple
    gamma: float
    span_width: float
    graph_eigenvalues: np.ndarray
    reference_eigenvalues: np.ndarray
    projection_residuals: np.ndarray        # ||(I - p)(f|_X)|| per reference f
    relative_residuals: np.ndarray          # divided by ||f|_X||
    norm_defects: np.ndarray                # | ||f|| - ||p(f|_X)|| |
    aligned_residuals: np.ndarray           # ||ftilde_j|_X - phi_j|| after rotation
    thm12_residuals: np.ndarray             # literal 1/n-weighted squared residuals
    rotation: np.ndarray

    def max_relative_residual(self) -> float:
        return float(np.max(self.relative_residuals))


def align_eigenspaces(g: WeightedGraph, spectral: SpectralResult,
                      reference: ReferenceSpectrum, cloud: PointCloud,
                      cluster) -> AlignmentReport:
    """Compare graph eigenvectors with discretized reference eigenfunctions.

    Reference functions are restricted to the sample, projected onto the
    span of the graph eigenvectors of the same indices in the discrete
    weighted inner product, and finally rotated onto them by orthogonal
    Procrustes on the cross-Gram matrix.
    """
    k, l = int(cluster[0]), int(cluster[1])
    if not 0 <= k <= l:
        raise ValueError("cluster must satisfy 0 <= k <= l")
    lam_ref = reference.eigenvalues
    if l + 1 >= len(lam_ref):
        raise ValueError("reference spectrum too short for the cluster")
    tol = 1e-9
    if (k > 0 and lam_ref[k] - lam_ref[k - 1] <= tol) or lam_ref[l + 1] - lam_ref[l] <= tol:
        ref_gaps = np.diff(lam_ref).tolist()
        graph_gaps = np.diff(spectral.eigenvalues).tolist()
        raise ValueError(
            f"cluster [{k},{l}] does not match reference multiplicity "
            f"structure; reference gaps {ref_gaps}, graph gaps {graph_gaps}"
        )
    if l >= spectral.eigenvectors.shape[1]:
        raise ValueError("spectral result holds too few eigenvectors")

    weight = "rho2_vol" if g.kind == "gamma_N" else "rho_vol"
    dim = l - k + 1
    fmat = np.column_stack([
        np.asarray(reference.evaluator(j, weight)(cloud.intrinsic, cloud.embedded))
        for j in range(k, l + 1)
    ])
    phi = spectral.eigenvectors[:, k : l + 1]

    coeff = phi.T @ (fmat * g.w_V[:, None])        # (dim, dim): <phi_i, f_j>_w
    proj = phi @ coeff
    resid = fmat - proj
    proj_norms = np.array([volume_norm(g, resid[:, j]) for j in range(dim)])
    f_norms = np.array([volume_norm(g, fmat[:, j]) for j in range(dim)])
    rel = proj_norms / f_norms
    pnorm = np.sqrt(np.sum(coeff**2, axis=0))
    norm_defects = np.abs(1.0 - pnorm)             # continuum norms are one

    u, _, vt = np.linalg.svd(coeff.T)              # cross-Gram <f_i, phi_j>
    rot = u @ vt
    aligned = fmat @ rot
    aligned_resid = np.array(
        [volume_norm(g, aligned[:, j] - phi[:, j]) for j in range(dim)]
    )
    thm12 = np.array([
        float(np.sum((aligned[:, j] - phi[:, j]) ** 2 * g.w_V)) / g.n_vertices
        for j in range(dim)
    ])

    lam_k = lam_ref[k]
    gaps = [lam_ref[l + 1] - lam_ref[l], 1.0]
    if k > 0:
        gaps.append(lam_ref[k] - lam_ref[k - 1])
    gamma = 0.5 * min(gaps)
    return AlignmentReport(
        cluster=(k, l),
        gamma=float(gamma),
        span_width=float(lam_ref[l] - lam_k),
        graph_eigenvalues=spectral.eigenvalues[k : l + 1].copy(),
        reference_eigenvalues=lam_ref[k : l + 1].copy(),
        projection_residuals=proj_norms,
        relative_residuals=rel,
        norm_defects=norm_defects,
        aligned_residuals=aligned_resid,
        thm12_residuals=thm12,
        rotation=rot,
    )


def run_alignment(cfg: ExperimentConfig, ref: Optional[ReferenceSpectrum] = None):
    """Alignment rows per (n, seed) for the configured cluster."""
    mfd = make_manifold(cfg)
    dens_spec = make_density_spec(cfg)
    if ref is None:
        ref = reference_spectrum_for(cfg, mfd)
    k, l = int(cfg.cluster[0]), int(cfg.cluster[1])
    rows = []
    for n in cfg.n_list:
        for seed in cfg.seeds:
            eps = cfg.epsilon_for(n, mfd.m)
            cloud = sample_dataset(mfd, dens_spec, n, seed)
            g = build_graph(cfg, cloud, eps)
            spec = eigen_decompose(g, max(cfg.k_max, l))
            rep = align_eigenspaces(g, spec, ref, cloud, (k, l))
            for j in range(l - k + 1):
                rows.append(dict(
                    n=n, seed=seed, eps=eps, k=k + j,
                    gamma=rep.gamma, span_width=rep.span_width,
                    proj_residual=float(rep.projection_residuals[j]),
                    rel_residual=float(rep.relative_residuals[j]),
                    norm_defect=float(rep.norm_defects[j]),
                    aligned_residual=float(rep.aligned_residuals[j]),
                    thm12_residual=float(rep.thm12_residuals[j]),
                ))
    rows.sort(key=lambda r: (r["n"], r["seed"], r["k"]))
    return rows


# ---------------------------------------------------------------------------
# convergence sweep


def run_convergence_sweep(cfg: ExperimentConfig, ref: Optional[ReferenceSpectrum] = None,
                          svg_path=None):
    """Medians over seeds per n and the log-log error slope per k."""
    if len(cfg.n_list) < 3 or len(cfg.seeds) < 3:
        raise ValueError("sweep needs at least 3 n values and 3 seeds")
    rows = run_spectrum_experiment(cfg, ref=ref)
    summary = []
    series = {}
    for k in range(1, cfg.k_max + 1):
        ns, meds = [], []
        for n in cfg.n_list:
            errs = [r["abs_err"] for r in rows
                    if r["k"] == k and r["n"] == n and r["connected"]]
            if errs:
                ns.append(n)
                meds.append(float(np.median(errs)))
        slope = _loglog_slope(ns, meds)
        for n, med in zip(ns, meds):
            summary.append(dict(k=k, n=n, median_abs_err=med, slope=slope))
        if all(m > 0 for m in meds):
            series[f"k={k}"] = (ns, meds)
    summary.sort(key=lambda r: (r["k"], r["n"]))
    if svg_path is not None and series:
        svg_line_chart(series, svg_path, xlabel="n", ylabel="median |error|")
    return summary


def _loglog_slope(ns, errs) -> float:
    pts = [(math.log(n), math.log(e)) for n, e in zip(ns, errs) if e > 0]
    if len(pts) < 2:
        return math.nan
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    return float(np.polyfit(xs, ys, 1)[0])


# ---------------------------------------------------------------------------
# thin orchestration reports


def run_regularity(cfg: ExperimentConfig):
    if "regularity" not in cfg.reports:
        return []
    mfd = make_manifold(cfg)
    dens_spec = make_density_spec(cfg)
    rows = []
    for n in cfg.n_list:
        for seed in cfg.seeds:
            eps = cfg.epsilon_for(n, mfd.m)
            cloud = sample_dataset(mfd, dens_spec, n, seed)
            g = build_graph(cfg, cloud, eps)
            spec = eigen_decompose(g, min(cfg.k_max, g.n_vertices - 1))
            cert = certify(g, spectral=spec, seed=seed)
            rows.append(dict(n=n, seed=seed, eps=eps, Q=cert.Q, P=cert.P,
                             sigma=cert.sigma, R=cert.R,
                             **{f"moser_k{k}_p{pp}": r
                                for (k, pp, r) in cert.moser_table}))
    rows.sort(key=lambda r: (r["n"], r["seed"]))
    return rows


def run_distortion(cfg: ExperimentConfig):
    if "distortion" not in cfg.reports:
        return []
    mfd = make_manifold(cfg)
    rows = []
    for n in cfg.n_list:
        for seed in cfg.seeds:
            eps = cfg.epsilon_for(n, mfd.m)
            v = v_p_eps(mfd, cfg.p, eps, cfg.K, cfg.mc_outer, seed)
            s = s_eps(mfd, ("geodesic", "embedded"), eps,
                      n_mc_outer=max(cfg.mc_outer // cfg.mc_inner, 50),
                      n_mc_inner=cfg.mc_inner, seed=seed)
            rows.append(dict(n=n, seed=seed, eps=eps,
                             v_p_eps=v.value, v_stderr=v.stderr,
                             s_eps=s.value, s_stderr=s.stderr))
    rows.sort(key=lambda r: (r["n"], r["seed"]))
    return rows


def default_test_function(mfd: ManifoldModel, dens) -> TestFunction:
    """A smooth built-in test function with analytic reference integrals."""
    if isinstance(mfd, Circle) and dens.spec.kind == "uniform":
        R = mfd.radius
        # f = cos(theta): |grad f|^2 = sin^2/R^2, rho = 1/(2 pi R)
        return TestFunction(
            name="cos_theta",
            values=lambda zi, ze: np.cos(np.atleast_2d(zi)[:, 0]),
            grad_sq_rho2=1.0 / (4.0 * math.pi * R**3),
            sq_rho=0.5,
            sq_rho2=1.0 / (4.0 * math.pi * R),
        )
    if isinstance(mfd, Sphere) and mfd.m == 2 and dens.spec.kind == "uniform":
        R = mfd.radius
        # f = z/R on S^2: int f^2 dvol = vol/3, int |grad f|^2 dvol = (2/R^2)(vol/3)
        vol = mfd.total_volume
        return TestFunction(
            name="z_coordinate",
            values=lambda zi, ze: np.atleast_2d(ze)[:, 2] / R,
            grad_sq_rho2=(2.0 / R**2) * (1.0 / 3.0) / vol,
            sq_rho=1.0 / 3.0,
            sq_rho2=1.0 / (3.0 * vol),
        )
    if isinstance(mfd, FlatTorus) and dens.spec.kind == "uniform":
        p0 = mfd.periods[0]
        vol = mfd.total_volume
        w = 2.0 * math.pi / p0
        return TestFunction(
            name="cos_first_axis",
            values=lambda zi, ze: np.cos(w * np.atleast_2d(zi)[:, 0]),
            grad_sq_rho2=w**2 * 0.5 / vol,
            sq_rho=0.5,
            sq_rho2=0.5 / vol,
        )
    raise ValueError(f"no built-in test function for {mfd.kind}/{dens.spec.kind}")


def run_energy(cfg: ExperimentConfig):
    if "energy" not in cfg.reports:
        return []
    mfd = make_manifold(cfg)
    dens = make_density(mfd, make_density_spec(cfg))
    f = default_test_function(mfd, dens)
    rows = []
    for n in cfg.n_list:
        for seed in cfg.seeds:
            eps = cfg.epsilon_for(n, mfd.m)
            cloud = sample_dataset(mfd, dens, n, seed)
            er = energy_comparison_report(mfd, dens, cloud, eps, f)
            l2 = l2_norm_comparison_report(mfd, dens, cloud, eps, f)
            rows.append(dict(
                n=n, seed=seed, eps=eps,
                energy_discrete=er.discrete, energy_continuous=er.continuous,
                energy_difference=er.difference,
                l2_plain_discrete=l2.plain_discrete,
                l2_plain_continuous=l2.plain_continuous,
                l2_degree_discrete=l2.degree_discrete,
                l2_degree_continuous=l2.degree_continuous,
            ))
    rows.sort(key=lambda r: (r["n"], r["seed"]))
    return rows


def run_moser(cfg: ExperimentConfig):
    if "moser" not in cfg.reports:
        return []
    mfd = make_manifold(cfg)
    dens_spec = make_density_spec(cfg)
    rows = []
    for n in cfg.n_list:
        for seed in cfg.seeds:
            eps = cfg.epsilon_for(n, mfd.m)
            cloud = sample_dataset(mfd, dens_spec, n, seed)
            g = build_graph(cfg, cloud, eps)
            spec = eigen_decompose(g, cfg.k_max)
            for k in range(1, cfg.k_max + 1):
                for p in (2, 4, 8, math.inf):
                    ratio, shape = moser_check(g, spec, k, p)
                    rows.append(dict(n=n, seed=seed, eps=eps, k=k,
                                     p=(p if p != math.inf else -1),
                                     ratio=ratio, bound_shape=shape))
    rows.sort(key=lambda r: (r["n"], r["seed"], r["k"], r["p"]))
    return rows


# ---------------------------------------------------------------------------
# output


def _format_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_rows_csv(rows, path):
    """Write dict rows with a stable header; floats at 17 significant digits."""
    if not rows:
        return
    header = list(rows[0].keys())
    for r in rows:
        for key in r:
            if key not in header:
                header.append(key)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_format_cell(r.get(h, "")) for h in header) + "\n")


def write_run_meta(cfg: ExperimentConfig, out_dir, reports_written):
    meta = {
        "tool": "spectral-limits",
        "version": __version__,
        "config_hash": hashlib.sha256(cfg.raw_text.encode()).hexdigest(),
        "seeds": list(cfg.seeds),
        "n": list(cfg.n_list),
        "reports": list(reports_written),
    }
    with open(os.path.join(out_dir, "run_meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
