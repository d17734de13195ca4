"""``projdyn`` command-line driver.

Subcommands ``simulate``, ``project``, ``verify`` and ``correspond`` share the
flags ``--config PATH``, ``--out DIR``, ``--seed N`` and ``--rtol X``.

Exit codes: 0 success, 1 a verification check failed, 2 configuration error,
3 the integration left its domain.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .dynamics import (
    ConstrainedSystem,
    PhaseState,
    Trajectory,
    constraint_drift,
    integrate_constrained,
    integrate_free,
    step_stats,
)
from .errors import DomainError, IntegrationError
from .io import read_trajectory_csv, write_json, write_trajectory_csv
from .problems import (
    braden_system,
    integrate_jacobi,
    neumann_system,
    orbit_exchange_report,
)
from .projective import compare_trajectories, matched_initial_state, project_trajectory
from .verification import Check, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3

# default bounds for ``correspond``; ``verify.tolerances`` in the config overrides them
CORRESPOND_TOLERANCES = {
    "eta_drift": 1e-8,
    "step1_residual": 1e-6,
    "multiplier_gap": 1e-7,
    "multiplier_spread": 1e-8,
    "chain_deviation": 1e-6,
}


def _drift(values: np.ndarray | None, relative: bool = False) -> float | None:
    if values is None:
        return None
    dev = float(np.max(np.abs(values - values[0])))
    return dev / max(abs(float(values[0])), 1e-300) if relative else dev


def summarize(traj: Trajectory, screen=None) -> dict:
    """Final state, invariant drifts, multiplier range and step counts of a run."""
    ch = traj.channels
    stats = step_stats(traj)
    out = {
        "samples": len(traj),
        "t_final": float(traj.t[-1]),
        "final": {"q": traj.q[-1], "p": traj.p[-1]},
        "energy_drift": _drift(ch.get("energy")),
        "eta_drift": _drift(ch.get("eta"), relative=True),
        "steps": {"accepted": stats.accepted, "rejected": stats.rejected, "evaluations": stats.evaluations},
    }
    if "tau" in ch:
        out["tau_final"] = float(ch["tau"][-1])
    if "lambda" in ch:
        out["lambda_range"] = [float(np.min(ch["lambda"])), float(np.max(ch["lambda"]))]
    if "eta" in ch:
        out["eta"] = float(ch["eta"][0])
    if screen is not None and traj.meta.get("kind") == "constrained":
        h_dev, v_dev = constraint_drift(traj, screen)
        out["h_drift"] = h_dev
        out["tangency_drift"] = v_dev
    return out


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.output.get("dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    return cfg.with_overrides(seed=args.seed, rtol=args.rtol)


def _problem_system(cfg: RunConfig) -> ConstrainedSystem:
    if cfg.problem == "neumann":
        return neumann_system(cfg.ellipsoid(), cfg.eta)
    if cfg.problem == "braden":
        return braden_system(cfg.ellipsoid(), cfg.eta)
    return cfg.build_system()


def run_simulation(cfg: RunConfig):
    """Integrate the configured problem; returns ``(trajectory, screen)``."""
    options = cfg.options()
    if cfg.problem == "free":
        screen = cfg.build_screen() if cfg.screen else None
        state = cfg.initial_state(None)
        return integrate_free(cfg.build_field(), state, cfg.t_end, options, screen=screen), screen
    if cfg.problem == "jacobi":
        params = cfg.jacobi_params()
        state = cfg.initial_state(params.data.a_screen)
        return integrate_jacobi(params, state, cfg.t_end, options), params.data.a_screen
    system = _problem_system(cfg)
    state = cfg.initial_state(system.screen)
    return integrate_constrained(system, state, cfg.t_end, options), system.screen


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    traj, screen = run_simulation(cfg)
    write_trajectory_csv(out / cfg.output.get("csv", "trajectory.csv"), traj)
    summary = {"command": "simulate", "problem": cfg.problem, "seed": cfg.seed, **summarize(traj, screen)}
    write_json(out / cfg.output.get("summary", "summary.json"), summary)
    print(f"simulate: {len(traj)} samples to t={traj.t[-1]:.6g}")
    return EXIT_OK


def _resolve_source(cfg: RunConfig, config_path: str | None) -> Path:
    if not cfg.source:
        raise ConfigError("project needs a 'source' trajectory file")
    src = Path(cfg.source)
    if not src.is_absolute() and not src.exists() and config_path:
        src = Path(config_path).parent / src
    if not src.exists():
        raise ConfigError(f"source trajectory {cfg.source} does not exist")
    return src


def cmd_project(cfg: RunConfig, out: Path, config_path: str | None = None) -> int:
    src = _resolve_source(cfg, config_path)
    try:
        source = read_trajectory_csv(src)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    screen = cfg.build_screen()
    proj = project_trajectory(source, screen)
    write_trajectory_csv(out / cfg.output.get("csv", "projected.csv"), proj, time=proj.t_origin, tau=proj.tau)
    summary = {
        "command": "project",
        "source": str(src),
        "samples": len(proj),
        "tau_final": float(proj.tau[-1]),
        "final": {"q": proj.q[-1], "p": proj.p[-1]},
    }
    code = EXIT_OK
    if cfg.reference:
        system = ConstrainedSystem(cfg.build_field(), screen, cfg.build_system().reaction)
        state0 = matched_initial_state(screen, PhaseState(source.q[0], source.p[0]))
        ref = integrate_constrained(system, state0, float(proj.tau[-1]), cfg.options())
        cmp = compare_trajectories(proj, ref, initial_tol=None)
        check = Check("projection_deviation", cmp.position, cfg.verify.get("deviation_tol", 1e-6))
        summary["deviation"] = cmp.position
        summary["velocity_deviation"] = cmp.velocity
        summary["check"] = check.to_dict()
        print(check.line())
        code = EXIT_OK if check.passed else EXIT_FAIL
    write_json(out / cfg.output.get("summary", "summary.json"), summary)
    return code


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    report = run_suite(
        seed=cfg.seed,
        dim=cfg.dim,
        options=cfg.options(),
        projection_field=cfg.verify.get("projection_field", "braden"),
        groups=cfg.verify.get("groups"),
    )
    for check in report.checks:
        print(check.line())
    write_json(out / cfg.output.get("report", "report.json"), report.to_dict())
    print(f"verify: {len(report.checks) - len(report.failures())}/{len(report.checks)} checks passed")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_correspond(cfg: RunConfig, out: Path) -> int:
    params = cfg.jacobi_params()
    state = cfg.initial_state(params.data.a_screen)
    rep = orbit_exchange_report(params, cfg.t_end, state, cfg.options())
    bounds = {**CORRESPOND_TOLERANCES, **cfg.verify.get("tolerances", {})}
    checks = [Check(name, getattr(rep, name), tol) for name, tol in bounds.items()]
    for check in checks:
        print(check.line())
    write_json(
        out / cfg.output.get("report", "correspond.json"),
        {"command": "correspond", "seed": cfg.seed, **rep.as_dict(), "checks": [c.to_dict() for c in checks]},
    )
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("simulate", "integrate a configured problem and write trajectory + summary"),
        ("project", "centrally project a stored trajectory onto a screen"),
        ("verify", "run the invariant battery"),
        ("correspond", "run the Jacobi -> intermediate -> Neumann chain"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--out", metavar="DIR", help="output directory (default: config output.dir or .)")
        p.add_argument("--seed", type=int, metavar="N", help="override the config seed")
        p.add_argument("--rtol", type=float, metavar="X", help="override the integrator rtol")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        out = _out_dir(args, cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "project":
            return cmd_project(cfg, out, args.config)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        return cmd_correspond(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, IntegrationError) as exc:
        t = getattr(exc, "t", None)
        where = f" at t={t:.17g}" if t is not None else ""
        print(f"domain error{where}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
