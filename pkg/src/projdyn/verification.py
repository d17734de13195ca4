"""The invariant battery behind ``projdyn verify``.

Every check yields a residual and a tolerance. Most are upper bounds; the
degree-sensitivity control is a lower bound (the reduction must *fail* for a
field of degree -2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import ConstrainedSystem, PhaseState, Trajectory, integrate_constrained, integrate_free
from .forces import (
    braden_field,
    euler_residual,
    gradient_field,
    homogeneity_residual,
    inverse_quadratic_potential,
    kepler_field,
    linear_field,
    neumann_potential,
    projective_extension,
    quadratic_power_field,
    unit_scale_points,
    zero_field,
)
from .errors import DomainError, IntegrationError
from .geometry import SymForm
from .ode import IntegratorOptions
from .problems import (
    EllipsoidData,
    JacobiParams,
    braden_system,
    joachimsthal,
    orbit_exchange_report,
    projection_instance,
    random_ellipsoid,
    random_tangent_state,
)
from .projective import compare_trajectories, equivalence_test, lambda_consistency, project_trajectory
from .screens import LinearScreen, QuadricScreen
from .sl2 import random_phase_points, verify_beta, verify_sl2

PROJECTION_FIELDS = ("braden", "degree-2")


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    bound: str = "max"  # "max": value <= tolerance; "min": value >= tolerance

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.tolerance if self.bound == "max" else self.value >= self.tolerance

    def line(self) -> str:
        op = "<=" if self.bound == "max" else ">="
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} {op} {self.tolerance:.1e}"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.value,
            "tolerance": self.tolerance,
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass
class VerificationReport:
    seed: int
    checks: list[Check] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class Context:
    seed: int
    dim: int
    options: IntegratorOptions
    projection_field: str = "braden"

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def ellipsoid(self, stream: int = 0) -> EllipsoidData:
        return random_ellipsoid(self.rng(stream), self.dim)


# --------------------------------------------------------------------------
# individual groups


def shipped_fields(ctx: Context):
    data = ctx.ellipsoid(0)
    G, A = data.G, data.A
    return [
        zero_field(ctx.dim),
        linear_field(data.M),
        kepler_field(ctx.dim),
        braden_field(G, A),
        quadratic_power_field(G, A, -2.0),
        gradient_field(data.B, inverse_quadratic_potential(G, -0.5)),
        gradient_field(G, neumann_potential(G, A)),
        projective_extension(np.eye(ctx.dim)[-1], kepler_field(ctx.dim - 1)),
    ]


def check_homogeneity(ctx: Context) -> list[Check]:
    rng = ctx.rng(1)
    homog = euler_a = euler_fd = 0.0
    for f in shipped_fields(ctx):
        for q in unit_scale_points(f, rng, 50):
            s = rng.uniform(0.5, 2.0)
            homog = max(homog, homogeneity_residual(f, q, s))
            if f.jacobian is not None:
                euler_a = max(euler_a, euler_residual(f, q))
            euler_fd = max(euler_fd, euler_residual(f, q, analytic=False))
    return [
        Check("homogeneity", homog, 1e-8),
        Check("euler_analytic", euler_a, 1e-8),
        Check("euler_fd", euler_fd, 1e-5),
    ]


def check_closed_form(ctx: Context) -> list[Check]:
    circle = QuadricScreen(SymForm.identity(2))
    system = ConstrainedSystem(zero_field(2), circle)
    traj = integrate_constrained(system, PhaseState([1.0, 0.0], [0.0, 1.0]), 2 * np.pi, ctx.options)
    exact = np.column_stack([np.cos(traj.t), np.sin(traj.t)])
    great = float(np.max(np.linalg.norm(traj.q - exact, axis=1)))

    line = integrate_free(zero_field(2), PhaseState([1.0, 0.0], [0.0, 1.0]), 20.0, ctx.options, screen=circle)
    proj = project_trajectory(line, circle)
    tau_err = float(np.max(np.abs(proj.tau - np.arctan(line.t))))
    curve = np.column_stack([np.cos(proj.tau), np.sin(proj.tau)])
    line_err = float(np.max(np.linalg.norm(proj.q - curve, axis=1)))
    return [
        Check("great_circle", great, 1e-8),
        Check("projected_line_tau", tau_err, 1e-8),
        Check("projected_line_curve", line_err, 1e-8),
    ]


def check_projection(ctx: Context) -> list[Check]:
    f, screen, state = projection_instance(ctx.seed, ctx.dim, -3.0 if ctx.projection_field == "braden" else -2.0)
    eq = equivalence_test(f, screen, state, 1.0, ctx.options)
    free = integrate_free(f, state, 50.0, ctx.options, screen=screen, tau_end=1.0)
    f2, screen2, state2 = projection_instance(ctx.seed, ctx.dim, -2.0)
    control = equivalence_test(f2, screen2, state2, 1.0, ctx.options)
    return [
        Check("projection_equivalence", eq.deviation, 1e-6),
        Check("projection_tau_range", float(eq.comparison.tau_range[1]), 1.0 - 1e-9, "min"),
        Check("lambda_consistency", lambda_consistency(free, f, screen), 1e-8),
        Check("degree_sensitivity", control.deviation, 1e-2, "min"),
    ]


def check_energy_multiplier(ctx: Context) -> list[Check]:
    checks = []
    sphere = QuadricScreen(SymForm.identity(ctx.dim))
    pot = inverse_quadratic_potential(SymForm.identity(ctx.dim), 1.0)
    system = ConstrainedSystem(
        gradient_field(SymForm.identity(ctx.dim), pot), sphere, metric=SymForm.identity(ctx.dim), potential=pot
    )
    data = ctx.ellipsoid(4)
    cases = [
        ("unit_sphere", system, random_tangent_state(ctx.rng(5), sphere, 0.8)),
        ("braden_B", braden_system(data), random_tangent_state(ctx.rng(6), data.b_screen, 0.8)),
    ]
    for label, sys_, state in cases:
        traj = integrate_constrained(sys_, state, 10.0, ctx.options)
        lam, e = traj.channels["lambda"], traj.channels["energy"]
        checks.append(Check(f"energy_multiplier_{label}_lambda", float(np.max(np.abs(lam + 2 * e))), 1e-8))
        checks.append(Check(f"energy_multiplier_{label}_energy", float(np.max(np.abs(e - e[0]))), 1e-9))
    return checks


def check_sl2(ctx: Context) -> list[Check]:
    data = ctx.ellipsoid(7)
    rng = ctx.rng(8)
    braden = braden_field(data.G, data.A)
    rep = verify_sl2(braden, random_phase_points(rng, braden, 100))
    kepler = kepler_field(2)
    counter = verify_sl2(kepler, [(np.array([1.0, 0.0]), np.zeros(2))])
    beta = {
        -3: verify_beta(braden, random_phase_points(rng, braden, 20)),
        -2: verify_beta(kepler_field(ctx.dim), random_phase_points(rng, kepler_field(ctx.dim), 20)),
        1: verify_beta(linear_field(data.M), random_phase_points(rng, linear_field(data.M), 20)),
    }
    checks = [
        Check("sl2_XY", rep.xy, 1e-5),
        Check("sl2_YZ", rep.yz, 1e-5),
        Check("sl2_ZX", rep.zx, 1e-5),
        Check("sl2_degree2_counterexample", abs(counter.xy - 1.0), 1e-5),
    ]
    checks += [Check(f"beta_alpha{a}", r, 1e-5) for a, r in beta.items()]
    return checks


def check_joachimsthal(ctx: Context) -> list[Check]:
    G = SymForm.identity(2)
    A = SymForm.diag([0.25, 1.0])
    eta = joachimsthal(JacobiParams(EllipsoidData(G, A), 0.0), PhaseState([2.0, 0.0], [0.0, 1.0]))
    return [Check("joachimsthal_hand", abs(eta + 0.25), 1e-12)]


def check_correspondence(ctx: Context) -> list[Check]:
    checks = []
    data = ctx.ellipsoid(9)
    for nu in (0.0, 0.5):
        rep = orbit_exchange_report(
            JacobiParams(data, nu),
            10.0,
            random_tangent_state(ctx.rng(10), data.a_screen, 1.0),
            ctx.options,
        )
        tag = f"nu{nu:g}"
        checks += [
            Check(f"eta_drift_{tag}", rep.eta_drift, 1e-8),
            Check(f"step1_residual_{tag}", rep.step1_residual, 1e-6),
            Check(f"b_constraint_{tag}", rep.b_constraint, 1e-10),
            Check(f"multiplier_gap_{tag}", rep.multiplier_gap, 1e-7),
            Check(f"multiplier_spread_{tag}", rep.multiplier_spread, 1e-8),
            Check(f"chain_deviation_{tag}", rep.chain_deviation, 1e-6),
        ]
    return checks


def check_projective_extension(ctx: Context) -> list[Check]:
    base = kepler_field(2)
    ext = projective_extension([0.0, 0.0, 1.0], base)
    plane = LinearScreen([0.0, 0.0, 1.0])
    x0, v0 = np.array([1.0, 0.0]), np.array([0.0, 1.2])
    affine = integrate_free(base, PhaseState(x0, v0), 5.0, ctx.options)
    lifted = integrate_constrained(
        ConstrainedSystem(ext, plane), PhaseState(np.append(x0, 1.0), np.append(v0, 0.0)), 5.0, ctx.options
    )
    flat = Trajectory(lifted.t, lifted.q[:, :2], lifted.p[:, :2])
    dev = compare_trajectories(affine, flat).position
    return [
        Check("extension_roundtrip", dev, 1e-8),
        Check("extension_transverse", float(np.max(np.abs(lifted.q[:, 2] - 1.0))), 1e-10),
        Check("extension_lambda", float(np.max(np.abs(lifted.channels["lambda"]))), 1e-10),
    ]


GROUPS: dict[str, Callable[[Context], list[Check]]] = {
    "homogeneity": check_homogeneity,
    "closed_form": check_closed_form,
    "projection": check_projection,
    "energy_multiplier": check_energy_multiplier,
    "sl2": check_sl2,
    "joachimsthal": check_joachimsthal,
    "correspondence": check_correspondence,
    "projective_extension": check_projective_extension,
}


def run_suite(
    seed: int = 0,
    dim: int = 3,
    options: IntegratorOptions | None = None,
    projection_field: str = "braden",
    groups: list[str] | None = None,
) -> VerificationReport:
    """Run the named check groups (all by default) and collect a report."""
    if projection_field not in PROJECTION_FIELDS:
        raise ValueError(f"projection_field must be one of {PROJECTION_FIELDS}")
    options = options or IntegratorOptions()
    ctx = Context(seed, dim, options, projection_field)
    names = list(GROUPS) if groups is None else groups
    report = VerificationReport(seed, metadata={"dim": dim, "options": options.to_dict(), "projection_field": projection_field})
    for name in names:
        if name not in GROUPS:
            raise ValueError(f"unknown check group {name!r}")
        try:
            report.checks.extend(GROUPS[name](ctx))
        except (DomainError, IntegrationError, ValueError) as exc:
            # a group that cannot even run counts as a failed check
            report.checks.append(Check(f"{name}_error", math.inf, 0.0))
            report.metadata.setdefault("errors", {})[name] = str(exc)
    return report
