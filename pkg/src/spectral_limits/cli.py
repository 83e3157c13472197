"""Command-line entry point.

    spectral-limits <command> --config <file> [--out dir] [--seed s] [--threads t]

Commands: sample, graph, spectrum, align, regularity, distortion, energy,
moser, sweep.  The config file is flat `key = value` text; see
docs/formats.md for all keys and the CSV column layouts.  Every run writes
run_meta.json with the tool version, a config hash, and the seeds used.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import (
    ExperimentConfig,
    load_config,
    make_density_spec,
    make_manifold,
    run_alignment,
    run_convergence_sweep,
    run_distortion,
    run_energy,
    run_moser,
    run_regularity,
    run_spectrum_experiment,
    write_rows_csv,
    write_run_meta,
)
from .graph import save_graph_csv
from .sampling import sample_dataset

COMMANDS = (
    "sample", "graph", "spectrum", "align", "regularity", "distortion",
    "energy", "moser", "sweep",
)


def _wants(cfg: ExperimentConfig, name: str) -> bool:
    return name in cfg.reports


def _cmd_sample(cfg, out):
    written = []
    mfd = make_manifold(cfg)
    dens = make_density_spec(cfg)
    for n in cfg.n_list:
        for seed in cfg.seeds:
            cloud = sample_dataset(mfd, dens, n, seed)
            path = os.path.join(out, f"points_n{n}_seed{seed}.csv")
            cloud.save(path)
            written.append(path)
    return written


def _cmd_graph(cfg, out):
    from .experiments import build_graph

    written = []
    mfd = make_manifold(cfg)
    dens = make_density_spec(cfg)
    for n in cfg.n_list:
        for seed in cfg.seeds:
            eps = cfg.epsilon_for(n, mfd.m)
            cloud = sample_dataset(mfd, dens, n, seed)
            g = build_graph(cfg, cloud, eps)
            epath = os.path.join(out, f"edges_n{n}_seed{seed}.csv")
            vpath = os.path.join(out, f"vertices_n{n}_seed{seed}.csv")
            save_graph_csv(g, epath, vpath)
            written.extend([epath, vpath])
    return written


def _write_report(rows, out, name):
    if not rows:
        return []
    path = os.path.join(out, f"{name}.csv")
    write_rows_csv(rows, path)
    return [path]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spectral-limits",
        description="Graph-Laplacian spectral approximation experiments",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="flat key=value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed list with one seed")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seeds = [args.seed]
    if args.threads is not None:
        cfg.threads = args.threads
    os.makedirs(args.out, exist_ok=True)

    written = []
    cmd = args.command
    if not _wants(cfg, cmd):
        write_run_meta(cfg, args.out, [])
        return 0
    if cmd == "sample":
        written += _cmd_sample(cfg, args.out)
    elif cmd == "graph":
        written += _cmd_graph(cfg, args.out)
    elif cmd == "spectrum":
        written += _write_report(run_spectrum_experiment(cfg), args.out, "spectrum")
    elif cmd == "align":
        written += _write_report(run_alignment(cfg), args.out, "alignment")
    elif cmd == "regularity":
        written += _write_report(run_regularity(cfg), args.out, "regularity")
    elif cmd == "distortion":
        written += _write_report(run_distortion(cfg), args.out, "distortion")
    elif cmd == "energy":
        written += _write_report(run_energy(cfg), args.out, "energy")
    elif cmd == "moser":
        written += _write_report(run_moser(cfg), args.out, "moser")
    elif cmd == "sweep":
        svg = os.path.join(args.out, "sweep.svg")
        rows = run_convergence_sweep(cfg, svg_path=svg)
        written += _write_report(rows, args.out, "sweep_summary")
        if rows:
            written.append(svg)
    write_run_meta(cfg, args.out, written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
