"""Command-line experiment runner.

Subcommands (each writes CSV, or JSON for fuzz, with the resolved config
embedded as comment lines):

  fig1-sphere    witness over a sphere of observation directions for the
                 three-atom chain state with relative phase Lambda
  dicke-sweep    in-plane witness sweep for a large timed-Dicke chain,
                 analytic O(N^2) moment path
  decay          exact Lindblad decay of a small ensemble with the
                 direction-minimized witness and global concurrence
  cumulant-tent  detection-time grid over (N, kd) from the second-order
                 cumulant flow at a fixed observation angle
  fuzz           separable-state fuzzing of all eight witness bounds

Exit codes: 0 success, 2 config error, 3 numerical failure.  The worker
count comes from --workers or the FIELDWITNESS_WORKERS env var.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .concurrence import global_concurrence
from .cumulant import (
    antisymmetric_angles,
    cumulant_detection_time,
    init_from_product,
)
from .dicke import DickeSpec, chebyshev_phases, dicke_moments, dicke_state, s_k
from .dynamics import (
    IntegrationError,
    couplings,
    first_crossing,
    integrate,
    witness_min_series,
)
from .field import moments
from .geometry import (
    AtomConfig,
    Direction,
    PackingError,
    chain,
    in_plane_angle,
    plane_sweep,
    sphere_grid,
    spherical_cloud,
)
from .oracle import fuzz_witnesses
from .qstate import (
    EXACT_CAP,
    antisymmetric_product_state,
    excited_state,
    maximally_mixed,
    product_state,
    three_atom_phase_state,
)
from .witness import WitnessReport, detection_epsilon, witness_report


class ConfigError(ValueError):
    """Bad or inconsistent experiment configuration."""


# --------------------------------------------------------------------------
# configuration blocks (strict: unknown keys are rejected)
# --------------------------------------------------------------------------

@dataclass
class GeometryConfig:
    kind: str = "chain"            # chain | cloud
    n: int = 3
    spacing: float = 0.3
    radius: float = 2.0
    seed: int = 1
    min_separation: float = 0.05
    polarization: list = field(default_factory=lambda: [0.0, 0.0, 1.0])


@dataclass
class StateConfig:
    kind: str = "eq5"              # eq5 | dicke | excited | mixed | antisym | product
    lambda_: float = np.pi / 3.0   # JSON key "lambda"
    phases: list | None = None     # dicke; None -> Chebyshev auto
    bloch_angles: list | None = None


@dataclass
class DirectionsConfig:
    kind: str = "sphere"           # sphere | plane
    n_theta: int = 64
    n_phi: int = 128
    n_angles: int = 64
    chi: float = 0.0


@dataclass
class IntegratorConfig:
    t_max: float = 10.0
    rtol: float = 1e-8
    atol: float = 1e-10
    samples: int = 121


@dataclass
class WitnessConfig:
    epsilon: float | None = None   # None -> 1e-6 * N
    chi_optimize: bool = False
    chi_grid: int = 64


@dataclass
class FuzzConfig:
    n_min: int = 2
    n_max: int = 6
    trials: int = 10000
    dirs_per_trial: int = 4
    chi_per_trial: int = 4
    n_terms_max: int = 4
    seed: int = 2024
    bell_control: bool = False


@dataclass
class CumulantConfig:
    n_list: list = field(default_factory=lambda: [4, 8, 12, 16])
    kd_list: list = field(default_factory=lambda: [0.2, 0.3, 0.5, 0.8])
    theta: float = 0.45 * np.pi
    t_max: float = 5.0
    samples: int = 401
    rtol: float = 1e-8
    atol: float = 1e-10


@dataclass
class OutputConfig:
    concurrence: bool = True


@dataclass
class ExperimentConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    state: StateConfig = field(default_factory=StateConfig)
    directions: DirectionsConfig = field(default_factory=DirectionsConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    witness: WitnessConfig = field(default_factory=WitnessConfig)
    fuzz: FuzzConfig = field(default_factory=FuzzConfig)
    cumulant: CumulantConfig = field(default_factory=CumulantConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    convention: str = "standard"


_BLOCKS = {
    "geometry": GeometryConfig,
    "state": StateConfig,
    "directions": DirectionsConfig,
    "integrator": IntegratorConfig,
    "witness": WitnessConfig,
    "fuzz": FuzzConfig,
    "cumulant": CumulantConfig,
    "output": OutputConfig,
}
_KEY_ALIASES = {"lambda": "lambda_"}


def _update_block(block, data: dict, name: str) -> None:
    known = {f.name for f in fields(block)}
    for key, value in data.items():
        attr = _KEY_ALIASES.get(key, key)
        if attr not in known:
            raise ConfigError(f"unknown key {key!r} in config block {name!r}")
        setattr(block, attr, value)


def apply_config_dict(cfg: ExperimentConfig, data: dict) -> None:
    for key, value in data.items():
        if key == "convention":
            cfg.convention = value
            continue
        if key not in _BLOCKS:
            raise ConfigError(f"unknown config block {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"config block {key!r} must be an object")
        _update_block(getattr(cfg, key), value, key)


def apply_override(cfg: ExperimentConfig, dotted: str) -> None:
    if "=" not in dotted:
        raise ConfigError(f"override {dotted!r} is not of the form path=value")
    path, raw = dotted.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = path.strip().split(".")
    if parts == ["convention"]:
        cfg.convention = value
        return
    if len(parts) != 2 or parts[0] not in _BLOCKS:
        raise ConfigError(f"override path {path!r} must be block.key or convention")
    _update_block(getattr(cfg, parts[0]), {parts[1]: value}, parts[0])


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.convention not in ("standard", "literal"):
        raise ConfigError(f"convention must be standard|literal, got {cfg.convention!r}")
    if cfg.geometry.kind not in ("chain", "cloud"):
        raise ConfigError(f"geometry.kind must be chain|cloud, got {cfg.geometry.kind!r}")
    if cfg.state.kind not in ("eq5", "dicke", "excited", "mixed", "antisym", "product"):
        raise ConfigError(f"unknown state.kind {cfg.state.kind!r}")
    if cfg.directions.kind not in ("sphere", "plane"):
        raise ConfigError(f"directions.kind must be sphere|plane, got {cfg.directions.kind!r}")


def config_as_dict(cfg: ExperimentConfig) -> dict:
    def clean(obj):
        if isinstance(obj, dict):
            return {("lambda" if k == "lambda_" else k): clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        return obj

    return clean(asdict(cfg))


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def build_geometry(cfg: ExperimentConfig) -> AtomConfig:
    g = cfg.geometry
    if g.kind == "chain":
        return chain(g.n, g.spacing, polarization=g.polarization)
    return spherical_cloud(
        g.n, g.radius, rng_seed=g.seed,
        min_separation=g.min_separation, polarization=g.polarization,
    )


def build_state(cfg: ExperimentConfig, n: int):
    s = cfg.state
    if s.kind == "eq5":
        if n != 3:
            raise ConfigError("state.kind eq5 requires a three-atom geometry")
        return three_atom_phase_state(s.lambda_)
    if s.kind == "dicke":
        return dicke_state(build_dicke_spec(cfg, n))
    if s.kind == "excited":
        return excited_state(n)
    if s.kind == "mixed":
        return maximally_mixed(n)
    if s.kind == "antisym":
        return antisymmetric_product_state(n)
    if s.kind == "product":
        if s.bloch_angles is None or len(s.bloch_angles) != n:
            raise ConfigError("state.kind product needs n (theta, phi) pairs")
        return product_state([tuple(a) for a in s.bloch_angles])
    raise ConfigError(f"unknown state.kind {s.kind!r}")


def build_dicke_spec(cfg: ExperimentConfig, n: int) -> DickeSpec:
    phases = cfg.state.phases
    if phases is None:
        phases = chebyshev_phases(n)
    elif len(phases) != n:
        raise ConfigError(f"state.phases must list {n} values")
    return DickeSpec(np.asarray(phases, dtype=float), n)


def build_directions(cfg: ExperimentConfig) -> list[Direction]:
    d = cfg.directions
    if d.kind == "sphere":
        return sphere_grid(d.n_theta, d.n_phi, chi=d.chi)
    return plane_sweep(d.n_angles, chi=d.chi)


def resolve_epsilon(cfg: ExperimentConfig, n: int) -> float:
    if cfg.witness.epsilon is not None:
        return float(cfg.witness.epsilon)
    return detection_epsilon(n)


def worker_count(args_workers: int | None) -> int:
    if args_workers is not None:
        return max(1, args_workers)
    env = os.environ.get("FIELDWITNESS_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# experiment results
# --------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    columns: list[str]
    rows: list[tuple]
    comments: list[str]
    summary: dict


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: str, result: ExperimentResult) -> None:
    with open(path, "w") as handle:
        for line in result.comments:
            handle.write(f"# {line}\n")
        handle.write(",".join(result.columns) + "\n")
        for row in result.rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")
        for key, value in result.summary.items():
            handle.write(f"# summary: {key} = {_fmt(value)}\n")


def _header(cfg: ExperimentConfig, command: str) -> list[str]:
    return [
        f"fieldwitness {__version__} :: {command}",
        "config: " + json.dumps(config_as_dict(cfg), sort_keys=True),
    ]


def _report_values_row(report: WitnessReport) -> tuple:
    return (
        report.w1, report.w2,
        report.w3["X"], report.w3["Y"], report.w3["Z"],
        report.w4["X"], report.w4["Y"], report.w4["Z"],
        report.w_min,
    )


_WITNESS_COLUMNS = ["w1", "w2", "w3_X", "w3_Y", "w3_Z", "w4_X", "w4_Y", "w4_Z", "W"]


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_fig1_sphere(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    config = build_geometry(cfg)
    state = build_state(cfg, config.n_atoms)
    directions = build_directions(cfg)
    epsilon = resolve_epsilon(cfg, config.n_atoms)
    chi_values = [cfg.directions.chi]
    if cfg.witness.chi_optimize:
        chi_values = list(np.arange(cfg.witness.chi_grid)
                          * 2.0 * np.pi / cfg.witness.chi_grid)

    rows = []
    detected = 0
    for direction in directions:
        best = None
        for chi in chi_values:
            rep = witness_report(moments(state, config, direction.with_chi(chi)))
            if best is None or rep.w_min < best.w_min:
                best = rep
        khat = direction.khat
        theta = float(np.arccos(np.clip(khat[2], -1.0, 1.0)))
        phi = float(np.arctan2(khat[1], khat[0]) % (2.0 * np.pi))
        rows.append((theta, phi, best.direction.chi) + _report_values_row(best))
        if best.w_min < -epsilon:
            detected += 1

    from .witness import spin_squeezing_report

    w0 = spin_squeezing_report(state, config).w_min
    summary = {
        "detected_fraction": detected / len(directions),
        "w0": w0,
        "epsilon": epsilon,
    }
    return ExperimentResult(
        columns=["theta", "phi", "chi"] + _WITNESS_COLUMNS,
        rows=rows,
        comments=_header(cfg, "fig1-sphere"),
        summary=summary,
    )


def cmd_dicke_sweep(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    if cfg.geometry.kind != "chain":
        raise ConfigError("dicke-sweep runs on a chain geometry")
    config = build_geometry(cfg)
    n = config.n_atoms
    spec = build_dicke_spec(cfg, n)
    if cfg.directions.kind != "plane":
        raise ConfigError("dicke-sweep uses the in-plane direction sweep")
    directions = build_directions(cfg)
    epsilon = resolve_epsilon(cfg, n)

    rows = []
    detected = 0
    for direction in directions:
        rep = witness_report(dicke_moments(spec, config, direction))
        theta = in_plane_angle(direction)
        rows.append((theta, s_k(spec, config, direction)) + _report_values_row(rep))
        if rep.w_min < -epsilon:
            detected += 1
    summary = {
        "detected_fraction": detected / len(directions),
        "epsilon": epsilon,
        "delta": float(np.cos(spec.phases[0])),
    }
    return ExperimentResult(
        columns=["theta", "s_k"] + _WITNESS_COLUMNS,
        rows=rows,
        comments=_header(cfg, "dicke-sweep"),
        summary=summary,
    )


def cmd_decay(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    config = build_geometry(cfg)
    n = config.n_atoms
    if n > EXACT_CAP:
        raise ConfigError(f"decay needs n <= {EXACT_CAP} (exact-state cap)")
    state = build_state(cfg, n)
    rho0 = state if hasattr(state, "entries") else state.density()
    c = couplings(config, cfg.convention)
    t_grid = np.linspace(0.0, cfg.integrator.t_max, cfg.integrator.samples)
    if cfg.directions.kind != "plane":
        raise ConfigError("decay minimizes over the in-plane direction sweep")
    directions = build_directions(cfg)
    epsilon = resolve_epsilon(cfg, n)

    traj = integrate(rho0, c, t_grid,
                     rtol=cfg.integrator.rtol, atol=cfg.integrator.atol)
    w_min, theta_arg = witness_min_series(traj, config, directions)
    c_glob = None
    if cfg.output.concurrence:
        c_glob = np.array([global_concurrence(dm) for dm in traj.states])

    rows = []
    for i, t in enumerate(traj.times):
        rows.append((
            t, w_min[i], theta_arg[i],
            None if c_glob is None else c_glob[i],
            traj.trace_drift[i], traj.min_eig[i],
        ))
    t_ent = first_crossing(traj.times, w_min, -epsilon)
    summary = {
        "t_ent": t_ent,
        "epsilon": epsilon,
        "max_trace_drift": traj.trace_drift.max(),
        "min_eigenvalue": traj.min_eig.min(),
    }
    if c_glob is not None:
        t_conc = first_crossing(traj.times, -c_glob, -1e-3)
        summary["t_concurrence"] = t_conc
    return ExperimentResult(
        columns=["t", "W_min_over_dirs", "theta_argmin", "C_glob",
                 "trace_drift", "min_eig"],
        rows=rows,
        comments=_header(cfg, "decay"),
        summary=summary,
    )


def _tent_cell(args: tuple) -> tuple:
    (n, kd, theta, t_max, samples, rtol, atol, convention, epsilon) = args
    config = chain(n, kd)
    c = couplings(config, convention)
    state0 = init_from_product(antisymmetric_angles(n))
    direction = Direction([np.cos(theta), np.sin(theta), 0.0])
    eps = epsilon if epsilon is not None else detection_epsilon(n)
    t_ent, status = cumulant_detection_time(
        state0, c, config, direction, eps, t_max,
        n_samples=samples, rtol=rtol, atol=atol,
    )
    return (n, kd, t_ent, status)


def cmd_cumulant_tent(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    cu = cfg.cumulant
    cells = [
        (int(n), float(kd), cu.theta, cu.t_max, cu.samples, cu.rtol, cu.atol,
         cfg.convention, cfg.witness.epsilon)
        for n in cu.n_list for kd in cu.kd_list
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_tent_cell, cells))
    else:
        results = [_tent_cell(cell) for cell in cells]
    detected = sum(1 for r in results if r[3] == "detected")
    return ExperimentResult(
        columns=["n", "kd", "t_ent", "status"],
        rows=results,
        comments=_header(cfg, "cumulant-tent"),
        summary={"cells": len(results), "detected": detected},
    )


def cmd_fuzz(cfg: ExperimentConfig, workers: int = 1):
    f = cfg.fuzz
    return fuzz_witnesses(
        n_range=range(f.n_min, f.n_max + 1),
        trials=f.trials,
        dirs_per_trial=f.dirs_per_trial,
        chi_per_trial=f.chi_per_trial,
        rng_seed=f.seed,
        n_terms_max=f.n_terms_max,
        bell_control=f.bell_control,
        max_workers=workers,
    )


# --------------------------------------------------------------------------
# plotting (optional convenience; the CSV is always the data source)
# --------------------------------------------------------------------------

def _plot_result(command: str, result: ExperimentResult, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = np.array(
        [[np.nan if v is None or isinstance(v, str) else float(v) for v in row]
         for row in result.rows]
    )
    fig, ax = plt.subplots(figsize=(6, 4))
    if command == "fig1-sphere":
        sc = ax.scatter(rows[:, 1], rows[:, 0], c=rows[:, -1], s=4, cmap="RdBu")
        fig.colorbar(sc, ax=ax, label="W")
        ax.set_xlabel("phi")
        ax.set_ylabel("theta")
    elif command == "dicke-sweep":
        ax.plot(rows[:, 0], rows[:, -1], label="W")
        ax.plot(rows[:, 0], rows[:, 1], label="S_k", alpha=0.6)
        ax.set_xlabel("theta")
        ax.legend()
    elif command == "decay":
        ax.plot(rows[:, 0], rows[:, 1], label="W_min")
        if not np.all(np.isnan(rows[:, 3])):
            ax.plot(rows[:, 0], rows[:, 3], label="C_glob")
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_xlabel("t")
        ax.legend()
    elif command == "cumulant-tent":
        ns = np.unique(rows[:, 0])
        kds = np.unique(rows[:, 1])
        grid = np.full((len(ns), len(kds)), np.nan)
        for n, kd, t_ent, *_ in rows:
            grid[list(ns).index(n), list(kds).index(kd)] = t_ent
        im = ax.imshow(grid, origin="lower", aspect="auto",
                       extent=(kds.min(), kds.max(), ns.min(), ns.max()))
        fig.colorbar(im, ax=ax, label="t_ent")
        ax.set_xlabel("kd")
        ax.set_ylabel("N")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

_COMMANDS = {
    "fig1-sphere": cmd_fig1_sphere,
    "dicke-sweep": cmd_dicke_sweep,
    "decay": cmd_decay,
    "cumulant-tent": cmd_cumulant_tent,
    "fuzz": cmd_fuzz,
}


def default_config(command: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if command == "fig1-sphere":
        cfg.geometry = GeometryConfig(kind="chain", n=3, spacing=0.3)
        cfg.state = StateConfig(kind="eq5")
        cfg.directions = DirectionsConfig(kind="sphere", n_theta=64, n_phi=128)
    elif command == "dicke-sweep":
        cfg.geometry = GeometryConfig(kind="chain", n=100, spacing=np.pi / 2.0)
        cfg.state = StateConfig(kind="dicke", phases=None)
        # 513 endpoint-included angles land exactly on theta = pi/2
        cfg.directions = DirectionsConfig(kind="plane", n_angles=513)
    elif command == "decay":
        cfg.geometry = GeometryConfig(kind="chain", n=8, spacing=0.3)
        cfg.state = StateConfig(kind="mixed")
        cfg.directions = DirectionsConfig(kind="plane", n_angles=64)
    elif command == "cumulant-tent":
        cfg.state = StateConfig(kind="antisym")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldwitness",
        description="electric-field entanglement witness experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                       help="override one config key (dotted path, JSON value)")
        p.add_argument("--output", "-o", default=None, help="output file path")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes/threads (default: "
                            "FIELDWITNESS_WORKERS or 1)")
        p.add_argument("--plot", action="store_true",
                       help="also write a simple SVG next to the output")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        cfg = default_config(command)
        if args.config:
            try:
                with open(args.config) as handle:
                    data = json.load(handle)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
            apply_config_dict(cfg, data)
        for override in args.set:
            apply_override(cfg, override)
        validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    workers = worker_count(args.workers)
    default_ext = "json" if command == "fuzz" else "csv"
    out_path = args.output or f"{command.replace('-', '_')}.{default_ext}"
    try:
        result = _COMMANDS[command](cfg, workers=workers)
    except (IntegrationError, PackingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        # bare ValueErrors out of the library surface bad config values
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if command == "fuzz":
        with open(out_path, "w") as handle:
            handle.write(result.to_json())
            handle.write("\n")
        print(f"wrote {out_path} (min = {result.min_value:.3e}, "
              f"violations = {result.violations})")
        return 0

    write_csv(out_path, result)
    print(f"wrote {out_path} ({len(result.rows)} rows)")
    for key, value in result.summary.items():
        print(f"  {key} = {value}")
    if args.plot:
        plot_path = os.path.splitext(out_path)[0] + ".svg"
        _plot_result(command, result, plot_path)
        print(f"wrote {plot_path}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
