"""Central projection of free trajectories onto screens with the Appell time change.

For a field of degree -3, a free trajectory ``q(t)`` projected to
``q1 = q / h(q)`` and reparametrized by ``dtau/dt = h(q(t))**-2`` solves the
constrained equations ``q1'' = f(q1) + lam q1`` on the screen ``h = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .dynamics import ConstrainedSystem, PhaseState, Trajectory, multiplier
from .errors import DomainError
from .forces import ForceField
from .screens import Screen

# 5-point Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(eq=False)
class ReparamTrajectory(Trajectory):
    """A trajectory on a screen, parametrized by the Appell time ``tau``.

    ``t`` holds ``tau``; the original time of every sample is the
    ``"t_origin"`` channel.
    """

    screen: Screen | None = None

    @property
    def tau(self) -> np.ndarray:
        return self.t

    @property
    def t_origin(self) -> np.ndarray:
        return self.channels["t_origin"]


def _check_domain(traj: Trajectory, screen: Screen) -> np.ndarray:
    hs = np.empty(len(traj))
    for i, q in enumerate(traj.q):
        if not screen.contains(q):
            raise DomainError(f"sample {i} is outside the screen's cone", t=traj.t[i])
        hs[i] = screen.h(q)
        if not hs[i] > 0.0:
            raise DomainError(f"h <= 0 at sample {i}", t=traj.t[i])
    return hs


def appell_time(traj: Trajectory, screen: Screen, use_channel: bool = True) -> np.ndarray:
    """Appell time ``tau(t) = int_0^t h(q(s))**-2 ds`` at every sample.

    A ``"tau"`` channel integrated for this very screen is used when present.
    Otherwise ``tau`` is computed after the fact with 5-point Gauss-Legendre
    quadrature on each step, positions interpolated by cubic Hermite
    polynomials through the stored velocities.
    """
    _check_domain(traj, screen)
    if use_channel and "tau" in traj.channels and traj.meta.get("tau_screen") is screen:
        return traj.channels["tau"] - traj.channels["tau"][0]
    if len(traj) == 1:
        return np.zeros(1)
    spline = CubicHermiteSpline(traj.t, traj.q, traj.p)
    t0, t1 = traj.t[:-1], traj.t[1:]
    dt = t1 - t0
    nodes = t0[:, None] + dt[:, None] * _GL_X[None, :]
    pts = spline(nodes.ravel())
    for q in pts:
        if not screen.contains(q) or not screen.h(q) > 0.0:
            raise DomainError("interpolated path leaves the screen's cone")
    vals = np.array([screen.h(q) ** -2 for q in pts]).reshape(nodes.shape)
    increments = dt * (vals @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(increments)])


def project_trajectory(traj: Trajectory, screen: Screen, use_channel: bool = True) -> ReparamTrajectory:
    """Project every sample onto ``screen`` and attach the Appell time.

    Positions become ``q / h(q)`` and velocities ``h qdot - hdot q``, which is
    the derivative of the projected curve with respect to ``tau``.
    """
    hs = _check_domain(traj, screen)
    tau = appell_time(traj, screen, use_channel)
    if len(tau) > 1 and not np.all(np.diff(tau) > 0):
        raise DomainError("Appell time is not strictly increasing")
    q1 = traj.q / hs[:, None]
    hdot = np.einsum("ij,ij->i", np.array([screen.dh(q) for q in traj.q]), traj.p)
    v1 = hs[:, None] * traj.p - hdot[:, None] * traj.q
    channels = {"t_origin": traj.t.copy(), "h_origin": hs}
    meta = {"kind": "projected", "source": traj.meta.get("kind"), "tau_screen": screen}
    return ReparamTrajectory(tau, q1, v1, channels, meta, screen=screen)


def matched_initial_state(screen: Screen, state: PhaseState) -> PhaseState:
    """Initial data of the constrained run matching a free run from ``state``."""
    h = screen.value(state.q)
    hdot = screen.dh(state.q) @ state.p
    return PhaseState(state.q / h, h * state.p - hdot * state.q, 0.0)


def lambda_from_h(traj: Trajectory, field: ForceField, screen: Screen) -> np.ndarray:
    """Multiplier ``-h**3 * h''`` along a free trajectory of ``field``.

    ``h''`` is ``D2h(q)(qdot, qdot) + Dh(q)[f(q)]``.
    """
    hs = _check_domain(traj, screen)
    hdd = np.array([screen.hess(q, p) + screen.dh(q) @ field(q) for q, p in zip(traj.q, traj.p)])
    return -(hs**3) * hdd


def lambda_consistency(traj: Trajectory, field: ForceField, screen: Screen) -> float:
    """Max gap between ``-h**3 h''`` and the constrained multiplier at projected states."""
    system = ConstrainedSystem(field, screen)
    proj = project_trajectory(traj, screen)
    from_h = lambda_from_h(traj, field, screen)
    direct = np.array([multiplier(system, q, p, tol=1e-6) for q, p in zip(proj.q, proj.p)])
    return float(np.max(np.abs(from_h - direct)))


@dataclass(frozen=True)
class Comparison:
    position: float
    velocity: float
    tau_range: tuple[float, float]
    samples: int


def compare_trajectories(a: Trajectory, b: Trajectory, initial_tol: float | None = 1e-10) -> Comparison:
    """Max deviation of ``b`` from ``a`` over their common parameter range.

    ``b`` is resampled on ``a``'s grid: positions by cubic Hermite
    interpolation through the stored velocities, velocities by a cubic
    spline. Pass ``initial_tol=None`` to skip the matched-start check.
    """
    lo = max(a.t[0], b.t[0])
    hi = min(a.t[-1], b.t[-1])
    if not hi > lo:
        raise ValueError("parameter ranges do not overlap")
    if initial_tol is not None:
        gap = max(np.max(np.abs(a.q[0] - b.q[0])), np.max(np.abs(a.p[0] - b.p[0])))
        if gap > initial_tol:
            raise ValueError(f"initial states differ by {gap:.3e}")
    mask = (a.t >= lo) & (a.t <= hi)
    grid = a.t[mask]
    if len(b) == 1:
        bq = np.repeat(b.q, len(grid), axis=0)
        bp = np.repeat(b.p, len(grid), axis=0)
    else:
        bq = CubicHermiteSpline(b.t, b.q, b.p)(grid)
        if len(b) > 2:
            bp = CubicSpline(b.t, b.p)(grid)
        else:
            bp = np.column_stack([np.interp(grid, b.t, b.p[:, k]) for k in range(b.dim)])
    dq = float(np.max(np.linalg.norm(a.q[mask] - bq, axis=1)))
    dp = float(np.max(np.linalg.norm(a.p[mask] - bp, axis=1)))
    return Comparison(dq, dp, (float(lo), float(hi)), int(mask.sum()))


@dataclass(frozen=True)
class Equivalence:
    """Outcome of the free-projected vs constrained comparison."""

    comparison: Comparison
    projected: ReparamTrajectory
    constrained: Trajectory

    @property
    def deviation(self) -> float:
        return self.comparison.position


def equivalence_test(
    field: ForceField,
    screen: Screen,
    state0: PhaseState,
    tau_end: float = 1.0,
    options=None,
    t_max: float = 50.0,
) -> Equivalence:
    """Integrate ``field`` freely, project onto ``screen`` and compare with the constrained run.

    The free run stops once its Appell time reaches ``tau_end`` (or at
    ``t_max``); the constrained run with a central reaction starts from the
    matched state and covers the same ``tau`` range.
    """
    from .dynamics import integrate_constrained, integrate_free

    free = integrate_free(field, state0, state0.t + t_max, options, screen=screen, tau_end=tau_end)
    proj = project_trajectory(free, screen)
    start = matched_initial_state(screen, state0)
    system = ConstrainedSystem(field, screen)
    constrained = integrate_constrained(system, start, float(proj.tau[-1]), options)
    return Equivalence(compare_trajectories(proj, constrained), proj, constrained)
