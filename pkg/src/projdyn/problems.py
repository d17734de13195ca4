"""Neumann, Braden (intermediate) and Jacobi systems built from a pair ``(G, A)``.

``G`` is the ambient inner product and ``A`` defines the ellipsoid
``<AQ,Q> = 1``. With ``M = G^-1 A`` and ``B = G A^-1 G``:

* Neumann: Braden field on the sphere ``<Gq,q> = 1``;
* Braden / intermediate: the same field on ``<Bq,q> = 1``;
* Jacobi: ``Q'' = mu M Q + nu Q`` on the ellipsoid.

``Q -> q = M Q`` carries Jacobi trajectories to intermediate ones with no
change of time; central projection onto the ``G``-sphere then carries them
to Neumann trajectories with the Appell time change.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    ConstrainedSystem,
    IntegratorOptions,
    PhaseState,
    Trajectory,
    _raw_multiplier,
    central_reaction,
    integrate_constrained,
    linear_reaction,
    multiplier,
)
from .errors import DomainError
from .forces import (
    braden_field,
    braden_operators,
    inverse_quadratic_potential,
    linear_field,
    neumann_potential,
    quadratic_potential,
    quadratic_power_field,
)
from .geometry import SymForm, as_vector, random_spd
from .projective import ReparamTrajectory, compare_trajectories, project_trajectory
from .screens import QuadricScreen, Screen, project_point, tangent_project

#: largest accepted condition number of ``A``
MAX_CONDITION = 1e8


@dataclass(frozen=True, eq=False)
class EllipsoidData:
    """The pair ``(G, A)`` with derived ``M = G^-1 A`` and ``B = G A^-1 G``."""

    G: SymForm
    A: SymForm
    M: np.ndarray = field(init=False)
    B: SymForm = field(init=False)
    g_screen: QuadricScreen = field(init=False, repr=False)
    a_screen: QuadricScreen = field(init=False, repr=False)
    b_screen: QuadricScreen = field(init=False, repr=False)

    def __post_init__(self):
        if self.A.condition_number() > MAX_CONDITION:
            raise DomainError(f"A is too ill-conditioned (condition > {MAX_CONDITION:g})")
        M, B = braden_operators(self.G, self.A)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "g_screen", QuadricScreen(self.G))
        object.__setattr__(self, "a_screen", QuadricScreen(self.A))
        object.__setattr__(self, "b_screen", QuadricScreen(B))

    @property
    def dim(self) -> int:
        return self.G.dim

    def symmetry_residual(self) -> float:
        """Entrywise max of ``G M - M^T G``."""
        G = self.G.entries
        return float(np.max(np.abs(G @ self.M - self.M.T @ G)))


@dataclass(frozen=True, eq=False)
class JacobiParams:
    data: EllipsoidData
    nu: float = 0.0


def random_ellipsoid(rng: np.random.Generator, dim: int, low: float = 0.5, high: float = 2.0) -> EllipsoidData:
    return EllipsoidData(random_spd(rng, dim, low, high), random_spd(rng, dim, low, high))


def random_tangent_state(rng: np.random.Generator, screen: Screen, speed: float = 1.0) -> PhaseState:
    """A random point on ``screen`` with a tangent velocity of Euclidean norm ``speed``."""
    q = project_point(screen, rng.standard_normal(screen.dim))
    v = tangent_project(screen, q, rng.standard_normal(screen.dim))
    return PhaseState(q, speed * v / np.linalg.norm(v))


def projection_instance(seed: int, dim: int = 3, degree: float = -3.0):
    """Standard instance of the projection test: ``(field, G-screen, initial state)``.

    ``G, A`` are seeded random SPD forms; the free run starts inside the
    ``G``-sphere (``h = 0.7``) with a generic, non-tangent velocity of norm 0.3,
    so the matched initial state exercises both terms of ``h qdot - hdot q``.
    ``degree`` other than -3 swaps in the control field ``M q <Gq,q>**((degree-1)/2)``.
    """
    data = random_ellipsoid(np.random.default_rng([seed, 2]), dim)
    rng = np.random.default_rng([seed, 3])
    q = rng.standard_normal(dim)
    q = 0.7 * q / data.g_screen.h(q)
    p = rng.standard_normal(dim)
    p *= 0.3 / np.linalg.norm(p)
    if degree == -3.0:
        field_ = braden_field(data.G, data.A)
    else:
        field_ = quadratic_power_field(data.G, data.A, degree)
    return field_, data.g_screen, PhaseState(q, p)


# --------------------------------------------------------------------------
# the three systems


def neumann_system(data: EllipsoidData, scale: float = 1.0) -> ConstrainedSystem:
    """Braden field constrained to the ``G``-sphere; energy uses ``<Aq,q> / (2 <Gq,q>**2)``."""
    return ConstrainedSystem(
        braden_field(data.G, data.A, scale),
        data.g_screen,
        central_reaction(),
        metric=data.G,
        potential=neumann_potential(data.G, data.A, scale),
        name="neumann",
    )


def braden_system(data: EllipsoidData, scale: float = 1.0) -> ConstrainedSystem:
    """Braden field constrained to the ``B``-sphere.

    In the metric ``B`` the field is the gradient of ``-scale / (2 <Gq,q>)``,
    so the multiplier equals ``-2`` times the ``B``-energy.
    """
    return ConstrainedSystem(
        braden_field(data.G, data.A, scale),
        data.b_screen,
        central_reaction(),
        metric=data.B,
        potential=inverse_quadratic_potential(data.G, -0.5 * scale),
        name="braden",
    )


def jacobi_system(params: JacobiParams) -> ConstrainedSystem:
    """``Q'' = nu Q + mu M Q`` on ``<AQ,Q> = 1``; ``mu`` is the multiplier."""
    data = params.data
    return ConstrainedSystem(
        linear_field(params.nu * np.eye(data.dim)),
        data.a_screen,
        linear_reaction(data.M),
        metric=data.G,
        potential=quadratic_potential(data.G, params.nu),
        name="jacobi",
    )


def jacobi_multiplier(params: JacobiParams, Q, Qdot) -> float:
    """``mu = -(<A Qdot, Qdot> + nu) / <AQ, MQ>`` on the ellipsoid."""
    return multiplier(jacobi_system(params), Q, Qdot)


def joachimsthal(params: JacobiParams, state: PhaseState, tol: float = 1e-8) -> float:
    """``eta = mu <AQ, MQ>**2``."""
    data = params.data
    mu = multiplier(jacobi_system(params), state.q, state.p, tol)
    AQ = data.A.entries @ state.q
    return float(mu * (AQ @ (data.M @ state.q)) ** 2)


def _eta_monitor(params: JacobiParams):
    system = jacobi_system(params)
    Am, M = params.data.A.entries, params.data.M

    def eta(Q, P):
        return _raw_multiplier(system, Q, P) * ((Am @ Q) @ (M @ Q)) ** 2

    return eta


def gauss_map(data: EllipsoidData, Q) -> np.ndarray:
    """``M Q / |M Q|_G``."""
    return project_point(data.g_screen, data.M @ as_vector(Q, data.dim))


def integrate_jacobi(
    params: JacobiParams, state0: PhaseState, t_end: float, options: IntegratorOptions | None = None
) -> Trajectory:
    """Jacobi run with an ``"eta"`` channel and the Appell time of ``MQ`` on the ``G``-sphere.

    Along the image ``q = MQ`` one has ``<Gq,q> = <AQ,MQ>``, so the ``tau``
    channel integrates ``1 / <AQ,MQ>``.
    """
    data = params.data
    Am, M = data.A.entries, data.M
    return integrate_constrained(
        jacobi_system(params),
        state0,
        t_end,
        options,
        monitors={"eta": _eta_monitor(params)},
        quadratures={"tau": lambda Q, P: 1.0 / ((Am @ Q) @ (M @ Q))},
        tau_screen=data.g_screen,
    )


def knorrer_step1(params: JacobiParams, jacobi_traj: Trajectory, eta: float | None = None) -> Trajectory:
    """Map a Jacobi trajectory by ``q = M Q``, keeping the time parameter.

    Channels: ``h`` (``B``-norm of ``q``), ``tau`` and ``eta`` carried over
    when present, and ``residual``: the norm of
    ``q'' - eta M q / <Gq,q>**2 - nu q`` with ``q'' = M Q''`` and ``eta``
    frozen at its initial value.
    """
    data = params.data
    M, Gm = data.M, data.G.entries
    system = jacobi_system(params)
    if eta is None:
        eta = joachimsthal(params, jacobi_traj.state(0), tol=1e-6)
    qs = jacobi_traj.q @ M.T
    ps = jacobi_traj.p @ M.T
    residual = np.empty(len(jacobi_traj))
    for i, (Q, P, q) in enumerate(zip(jacobi_traj.q, jacobi_traj.p, qs)):
        Qdd = system.field.func(Q) + _raw_multiplier(system, Q, P) * (M @ Q)
        qdd = M @ Qdd
        g = q @ Gm @ q
        residual[i] = np.linalg.norm(qdd - eta * (M @ q) / g**2 - params.nu * q)
    channels = {"h": np.array([data.b_screen.h(q) for q in qs]), "residual": residual}
    for name in ("tau", "eta"):
        if name in jacobi_traj.channels:
            channels[name] = jacobi_traj.channels[name]
    meta = {
        "kind": "knorrer_step1",
        "eta": eta,
        "nu": params.nu,
        "tau_screen": data.g_screen if jacobi_traj.meta.get("tau_screen") is data.g_screen else None,
    }
    return Trajectory(jacobi_traj.t.copy(), qs, ps, channels, meta)


def knorrer_step2(data: EllipsoidData, intermediate: Trajectory) -> ReparamTrajectory:
    """Central projection onto the ``G``-sphere with the Appell time change."""
    return project_trajectory(intermediate, data.g_screen)


# --------------------------------------------------------------------------
# orbit exchange


@dataclass(frozen=True)
class ExchangeReport:
    eta: float
    nu: float
    eta_drift: float
    b_constraint: float
    step1_residual: float
    multiplier_gap: float
    multiplier_spread: float
    intermediate_deviation: float
    chain_deviation: float
    chain_tau: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def orbit_exchange_report(
    params: JacobiParams,
    t_end: float,
    state0: PhaseState | None = None,
    options: IntegratorOptions | None = None,
    seed: int = 0,
) -> ExchangeReport:
    """Run the Jacobi -> intermediate -> Neumann chain and measure every link.

    The Jacobi run measures ``eta`` (the field scale of the intermediate
    system); the intermediate run started from ``(M Q0, M Qdot0)`` must have a
    multiplier equal to ``nu``, and the projected chain must match a Neumann
    run of scale ``eta`` from matched data.
    """
    data = params.data
    if state0 is None:
        state0 = random_tangent_state(np.random.default_rng(seed), data.a_screen, 1.0)
    jac = integrate_jacobi(params, state0, t_end, options)
    eta_ch = jac.channels["eta"]
    eta = float(eta_ch[0])
    eta_drift = float(np.max(np.abs(eta_ch - eta)) / max(abs(eta), 1e-300))

    step1 = knorrer_step1(params, jac, eta)
    b_dev = float(np.max(np.abs(step1.channels["h"] - 1.0)))

    inter_sys = braden_system(data, eta)
    inter = integrate_constrained(inter_sys, PhaseState(step1.q[0], step1.p[0]), t_end, options)
    lam = inter.channels["lambda"]
    inter_dev = compare_trajectories(step1, inter, initial_tol=None).position

    chain = knorrer_step2(data, step1)
    neumann = integrate_constrained(
        neumann_system(data, eta), PhaseState(chain.q[0], chain.p[0]), float(chain.tau[-1]), options
    )
    chain_dev = compare_trajectories(chain, neumann, initial_tol=None).position

    return ExchangeReport(
        eta=eta,
        nu=float(params.nu),
        eta_drift=eta_drift,
        b_constraint=b_dev,
        step1_residual=float(np.max(step1.channels["residual"])),
        multiplier_gap=float(np.max(np.abs(lam - params.nu))),
        multiplier_spread=float(np.max(lam) - np.min(lam)),
        intermediate_deviation=float(inter_dev),
        chain_deviation=float(chain_dev),
        chain_tau=float(chain.tau[-1]),
    )


def jacobi_energy_drift(params: JacobiParams, traj: Trajectory) -> float:
    e = traj.channels["energy"]
    return float(np.max(np.abs(e - e[0])))

