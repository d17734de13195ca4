"""Free and constrained second-order dynamics.

Constrained systems follow ``q'' = f(q) + lam * d(q)`` on a screen
``h(q) = 1``, where ``d`` is a reaction direction transverse to the screen and
the multiplier ``lam`` is the unique value keeping ``d^2 h / dt^2 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, TransversalityError
from .forces import ForceField, Potential
from .geometry import SymForm, as_vector, form_apply
from .ode import IntegratorOptions, StepStats, integrate
from .screens import Screen

Vec = np.ndarray

#: minimum |Dh(q)[d(q)]| tolerated along a trajectory
TRANSVERSALITY_TOL = 1e-10
#: tolerance of the on-screen / tangency preconditions of :func:`multiplier`
STATE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ReactionField:
    """Direction ``d(q)`` along which the constraint force acts."""

    direction: Callable[[Vec], Vec]
    label: str = "custom"

    def __call__(self, q: Vec) -> Vec:
        return np.asarray(self.direction(q), dtype=float)


CENTRAL = ReactionField(lambda q: q, "central")


def central_reaction() -> ReactionField:
    return CENTRAL


def linear_reaction(M) -> ReactionField:
    """Reaction along ``M q``."""
    M = np.array(M, dtype=float)
    return ReactionField(lambda q: M @ q, "linear")


@dataclass(frozen=True, eq=False)
class ConstrainedSystem:
    """A force field restricted to a screen by a reaction along ``reaction``.

    ``metric`` and ``potential`` are optional; when both are set the energy
    ``1/2 <p,p>_metric - U(q)`` is recorded along integrations.
    """

    field: ForceField
    screen: Screen
    reaction: ReactionField = CENTRAL
    metric: SymForm | None = None
    potential: Potential | None = None
    name: str = "constrained"

    def __post_init__(self):
        if self.field.dim != self.screen.dim:
            raise ValueError("field and screen dimensions differ")

    @property
    def dim(self) -> int:
        return self.field.dim

    def energy(self, q, p) -> float | None:
        if self.metric is None or self.potential is None:
            return None
        return energy(self.metric, self.potential, PhaseState(q, p))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "field": self.field.name,
            "degree": self.field.degree,
            "screen": type(self.screen).__name__,
            "reaction": self.reaction.label,
            "dim": self.dim,
        }


@dataclass(frozen=True, eq=False)
class PhaseState:
    q: Vec
    p: Vec
    t: float = 0.0

    def __post_init__(self):
        q = as_vector(self.q)
        p = as_vector(self.p, q.shape[0])
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", float(self.t))


@dataclass(eq=False)
class Trajectory:
    """Time-ordered phase samples with auxiliary channels.

    ``t`` holds the trajectory's own time parameter; ``channels`` maps names
    such as ``"lambda"``, ``"tau"``, ``"h"``, ``"energy"``, ``"eta"`` to
    arrays of the same length.
    """

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.q = np.atleast_2d(np.asarray(self.q, dtype=float))
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        n = self.t.shape[0]
        if self.q.shape[0] != n or self.p.shape != self.q.shape:
            raise ValueError("samples have inconsistent shapes")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("time parameter must be strictly increasing")
        self.channels = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        for k, v in self.channels.items():
            if v.shape != (n,):
                raise ValueError(f"channel {k!r} has length {v.shape} instead of {n}")

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def dim(self) -> int:
        return self.q.shape[1]

    def state(self, i: int) -> PhaseState:
        return PhaseState(self.q[i], self.p[i], self.t[i])

    @property
    def samples(self) -> list[PhaseState]:
        return [self.state(i) for i in range(len(self))]

    @property
    def final(self) -> PhaseState:
        return self.state(-1)


# --------------------------------------------------------------------------
# multipliers and accelerations


def _raw_multiplier(system: ConstrainedSystem, q: Vec, p: Vec, fq: Vec | None = None) -> float:
    screen = system.screen
    dh = screen.dh(q)
    denom = dh @ system.reaction(q)
    if not abs(denom) > TRANSVERSALITY_TOL:
        raise TransversalityError(f"reaction is tangent to the screen at q={q} (Dh[d]={denom:.3e})")
    if fq is None:
        fq = system.field.func(q)
    return float(-(screen.hess(q, p) + dh @ fq) / denom)


def multiplier(system: ConstrainedSystem, q, p, tol: float = STATE_TOL) -> float:
    """Multiplier ``lam = -(D2h(q)(p,p) + Dh(q)[f(q)]) / Dh(q)[d(q)]``.

    The state must lie on the screen with a tangent velocity, within ``tol``.
    """
    q = as_vector(q, system.dim)
    p = as_vector(p, system.dim)
    screen = system.screen
    h = screen.value(q)
    if abs(h - 1.0) > tol:
        raise DomainError(f"state is off the screen: h(q) - 1 = {h - 1.0:.3e}")
    if abs(screen.dh(q) @ p) > tol:
        raise DomainError(f"velocity is not tangent: Dh(q)[p] = {screen.dh(q) @ p:.3e}")
    fq = system.field(q)
    return _raw_multiplier(system, q, p, fq)


def constrained_accel(system: ConstrainedSystem, q, p, tol: float = STATE_TOL) -> Vec:
    """``f(q) + lam * d(q)``."""
    lam = multiplier(system, q, p, tol)
    q = as_vector(q, system.dim)
    return system.field(q) + lam * system.reaction(q)


def second_derivative_of_h(system: ConstrainedSystem, q, p, lam: float) -> float:
    """``d^2 h / dt^2`` for ``q'' = f + lam d``; zero exactly at the multiplier."""
    q = as_vector(q, system.dim)
    p = as_vector(p, system.dim)
    screen = system.screen
    acc = system.field(q) + lam * system.reaction(q)
    return float(screen.hess(q, p) + screen.dh(q) @ acc)


def energy(metric: SymForm, potential: Callable[[Vec], float], state: PhaseState) -> float:
    """``1/2 <p,p>_metric - U(q)``; with this sign a central multiplier equals ``-2 E``."""
    return 0.5 * form_apply(metric, state.p, state.p) - float(potential(state.q))


# --------------------------------------------------------------------------
# integration


Monitor = Callable[[Vec, Vec], float]


def _collect(monitors: dict[str, Monitor] | None, qs: np.ndarray, ps: np.ndarray) -> dict[str, np.ndarray]:
    out = {}
    for name, fn in (monitors or {}).items():
        out[name] = np.array([fn(q, p) for q, p in zip(qs, ps)])
    return out


def _quadrature_rhs(quadratures: dict[str, Monitor]):
    names = list(quadratures)
    fns = [quadratures[k] for k in names]
    return names, lambda q, p: np.array([fn(q, p) for fn in fns])


def integrate_free(
    field: ForceField,
    state0: PhaseState,
    t_end: float,
    options: IntegratorOptions | None = None,
    screen: Screen | None = None,
    metric: SymForm | None = None,
    potential: Potential | None = None,
    monitors: dict[str, Monitor] | None = None,
    tau_end: float | None = None,
) -> Trajectory:
    """Integrate ``q'' = f(q)`` up to ``t_end``.

    With a ``screen`` the Appell time ``tau`` (``dtau/dt = h(q)**-2``) is
    integrated as an extra channel in the same adaptive step, and ``h`` and
    the projected multiplier ``-h**3 h''`` are recorded. ``tau_end`` stops the
    run at the first step where ``tau`` reaches it.
    """
    options = options or IntegratorOptions()
    n = field.dim
    q0 = as_vector(state0.q, n)
    p0 = as_vector(state0.p, n)
    if not field.contains(q0):
        raise DomainError("initial point is outside the field's domain", t=state0.t, state=state0)

    def rhs(t, y):
        q = y[:n]
        if not field.contains(q):
            raise DomainError("left the field's domain")
        out = np.empty_like(y)
        out[:n] = y[n : 2 * n]
        out[n : 2 * n] = field.func(q)
        if screen is not None:
            if not screen.contains(q):
                raise DomainError("left the screen's cone")
            out[2 * n] = screen.h(q) ** -2
        return out

    def check(t, y):
        if not field.contains(y[:n]):
            raise DomainError(f"trajectory left the domain at t={t}", t=t, state=y)

    stop = None
    if tau_end is not None:
        if screen is None:
            raise ValueError("tau_end needs a screen")
        stop = lambda t, y: y[2 * n] >= tau_end  # noqa: E731

    y0 = np.concatenate([q0, p0, [0.0] if screen is not None else []])
    ts, ys, stats = integrate(rhs, y0, state0.t, t_end, options, check=check, stop=stop)
    qs, ps = ys[:, :n], ys[:, n : 2 * n]
    channels = {}
    if screen is not None:
        channels["tau"] = ys[:, 2 * n]
        hs = np.array([screen.h(q) for q in qs])
        channels["h"] = hs
        hdd = np.array([screen.hess(q, p) + screen.dh(q) @ field.func(q) for q, p in zip(qs, ps)])
        channels["lambda"] = -(hs**3) * hdd
    if metric is not None and potential is not None:
        channels["energy"] = np.array([energy(metric, potential, PhaseState(q, p)) for q, p in zip(qs, ps)])
    channels.update(_collect(monitors, qs, ps))
    meta = {
        "kind": "free",
        "field": field.name,
        "degree": field.degree,
        "tau_screen": screen,
        "options": options.to_dict(),
        "stats": stats,
    }
    return Trajectory(ts, qs, ps, channels, meta)


def integrate_constrained(
    system: ConstrainedSystem,
    state0: PhaseState,
    t_end: float,
    options: IntegratorOptions | None = None,
    monitors: dict[str, Monitor] | None = None,
    quadratures: dict[str, Monitor] | None = None,
    tau_screen: Screen | None = None,
    tol: float = 1e-10,
) -> Trajectory:
    """Integrate the constrained system from an on-screen tangent state.

    Channels: ``lambda`` (multiplier), ``h``, ``tau`` and ``energy`` when the
    system carries a potential. ``tau`` equals ``t`` unless a quadrature named
    ``"tau"`` is supplied; every entry of ``quadratures`` is integrated
    alongside the state as ``d(channel)/dt = fn(q, p)`` starting at 0.
    """
    options = options or IntegratorOptions()
    n = system.dim
    screen = system.screen
    field = system.field
    q0 = as_vector(state0.q, n)
    p0 = as_vector(state0.p, n)
    if not screen.contains(q0) or abs(screen.h(q0) - 1.0) > tol:
        raise DomainError("initial point is not on the screen", t=state0.t, state=state0)
    if abs(screen.dh(q0) @ p0) > tol:
        raise DomainError("initial velocity is not tangent to the screen", t=state0.t, state=state0)
    if not field.contains(q0):
        raise DomainError("initial point is outside the field's domain", t=state0.t, state=state0)

    quad_names, quad_rhs = _quadrature_rhs(quadratures or {})
    nq = len(quad_names)

    def rhs(t, y):
        q = y[:n]
        p = y[n : 2 * n]
        if not (field.contains(q) and screen.contains(q)):
            raise DomainError("left the domain")
        fq = field.func(q)
        lam = _raw_multiplier(system, q, p, fq)
        out = np.empty_like(y)
        out[:n] = p
        out[n : 2 * n] = fq + lam * system.reaction(q)
        if nq:
            out[2 * n :] = quad_rhs(q, p)
        return out

    def post_step(t, y):
        q = y[:n]
        h = screen.h(q)
        q = q / h
        p = y[n : 2 * n]
        p = p - (screen.dh(q) @ p) * q
        y = y.copy()
        y[:n] = q
        y[n : 2 * n] = p
        return y

    def check(t, y):
        q = y[:n]
        if not (field.contains(q) and screen.contains(q)):
            raise DomainError(f"trajectory left the domain at t={t}", t=t, state=y)
        denom = screen.dh(q) @ system.reaction(q)
        if not abs(denom) > TRANSVERSALITY_TOL:
            raise TransversalityError(f"reaction became tangent to the screen at t={t}", t=t, state=y)

    y0 = np.concatenate([q0, p0, np.zeros(nq)])
    ts, ys, stats = integrate(
        rhs, y0, state0.t, t_end, options, post_step=post_step if options.stabilize else None, check=check
    )
    qs, ps = ys[:, :n], ys[:, n : 2 * n]
    channels = {
        "lambda": np.array([_raw_multiplier(system, q, p) for q, p in zip(qs, ps)]),
        "h": np.array([screen.h(q) for q in qs]),
    }
    for i, name in enumerate(quad_names):
        channels[name] = ys[:, 2 * n + i]
    channels.setdefault("tau", ts - ts[0])
    if system.metric is not None and system.potential is not None:
        channels["energy"] = np.array([system.energy(q, p) for q, p in zip(qs, ps)])
    channels.update(_collect(monitors, qs, ps))
    meta = {
        "kind": "constrained",
        "system": system.describe(),
        "tau_screen": tau_screen if quadratures and "tau" in quadratures else screen,
        "options": options.to_dict(),
        "stats": stats,
    }
    return Trajectory(ts, qs, ps, channels, meta)


def constraint_drift(traj: Trajectory, screen: Screen) -> tuple[float, float]:
    """Max ``|h(q) - 1|`` and max ``|Dh(q)[p]|`` over the samples."""
    h_dev = max(abs(screen.h(q) - 1.0) for q in traj.q)
    v_dev = max(abs(screen.dh(q) @ p) for q, p in zip(traj.q, traj.p))
    return float(h_dev), float(v_dev)


def step_stats(traj: Trajectory) -> StepStats:
    return traj.meta.get("stats", StepStats())
