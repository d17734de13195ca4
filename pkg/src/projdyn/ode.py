"""Explicit Runge-Kutta integration of first-order systems ``y' = F(t, y)``.

Two methods: the Dormand-Prince 5(4) embedded pair with step-size control,
and classical fixed-step RK4. A ``post_step`` hook lets callers retract the
accepted state (constraint stabilization) and a ``check`` hook lets them
reject states that leave the admissible region.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, IntegrationError, SingularityError

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

METHODS = ("dp54", "rk4")


@dataclass(frozen=True)
class IntegratorOptions:
    """Integrator settings.

    ``dt`` is the fixed step for ``rk4`` and the initial step for ``dp54``.
    ``max_step`` bounds the step of both methods and so sets the minimum
    sample density of the output. Left as ``None`` it follows the tolerance,
    ``0.01 * (rtol / 1e-10) ** 0.25``: cubic Hermite resampling then stays
    about as accurate as the steps themselves (100 samples per unit time at
    the default ``rtol``).
    """

    method: str = "dp54"
    rtol: float = 1e-10
    atol: float = 1e-10
    dt: float = 1e-3
    max_step: float | None = None
    stabilize: bool = True
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        for name in ("rtol", "atol", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    @property
    def step_cap(self) -> float:
        if self.max_step is not None:
            return self.max_step
        return 0.01 * (self.rtol / 1e-10) ** 0.25

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0


Rhs = Callable[[float, np.ndarray], np.ndarray]


def _dp54_step(rhs: Rhs, t: float, y: np.ndarray, h: float, stats: StepStats):
    k = np.empty((7, y.shape[0]))
    k[0] = rhs(t, y)
    for i in range(1, 7):
        yi = y + h * (np.asarray(_A[i]) @ k[:i])
        k[i] = rhs(t + _C[i] * h, yi)
    stats.evaluations += 7
    y_new = y + h * (_B5 @ k)
    err = h * (_E @ k)
    return y_new, err


def _rk4_step(rhs: Rhs, t: float, y: np.ndarray, h: float, stats: StepStats):
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    stats.evaluations += 4
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(
    rhs: Rhs,
    y0,
    t0: float,
    t_end: float,
    options: IntegratorOptions,
    post_step: Callable[[float, np.ndarray], np.ndarray] | None = None,
    check: Callable[[float, np.ndarray], None] | None = None,
    stop: Callable[[float, np.ndarray], bool] | None = None,
) -> tuple[np.ndarray, np.ndarray, StepStats]:
    """Integrate from ``t0`` to ``t_end`` and return every accepted state.

    A :class:`DomainError` raised inside a stage evaluation rejects the step;
    if the step then shrinks below roundoff the error is re-raised with the
    current time attached, which is how a domain exit is reported.
    ``stop`` ends the integration early at the first accepted state where it
    returns true.
    """
    if not t_end > t0:
        raise ValueError("t_end must exceed the initial time")
    y = np.array(y0, dtype=float)
    t = float(t0)
    if check is not None:
        check(t, y)
    ts = [t]
    ys = [y.copy()]
    stats = StepStats()
    span = t_end - t0
    h = min(options.dt, options.step_cap, span)
    min_step = 16 * np.finfo(float).eps * max(1.0, abs(t_end))
    last_error: DomainError | None = None

    while t < t_end:
        if stats.accepted >= options.max_steps:
            raise IntegrationError(f"step budget of {options.max_steps} exhausted", t=t, state=y)
        h = min(h, t_end - t)
        if h < min_step:
            if last_error is not None:
                last_error.t = t
                last_error.state = y
                raise last_error
            raise SingularityError("step size underflow: the solution runs into a singularity", t=t, state=y)
        try:
            if options.method == "rk4":
                y_new = _rk4_step(rhs, t, y, h, stats)
                err_norm = 0.0
            else:
                y_new, err = _dp54_step(rhs, t, y, h, stats)
                scale = options.atol + options.rtol * np.maximum(np.abs(y), np.abs(y_new))
                err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            if not np.all(np.isfinite(y_new)):
                raise DomainError("non-finite state")
        except DomainError as exc:
            last_error = exc
            stats.rejected += 1
            h *= 0.25
            continue

        if err_norm > 1.0:
            stats.rejected += 1
            h *= max(0.2, 0.9 * err_norm ** -0.2)
            continue

        t_next = t_end if t_end - (t + h) < min_step else t + h
        if post_step is not None:
            y_new = post_step(t_next, y_new)
        if check is not None:
            check(t_next, y_new)
        t, y = t_next, y_new
        last_error = None
        ts.append(t)
        ys.append(y.copy())
        stats.accepted += 1
        if stop is not None and stop(t, y):
            break
        if options.method == "dp54":
            factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
            h *= factor
        h = min(h, options.step_cap) if options.method == "dp54" else min(options.dt, options.step_cap)

    return np.array(ts), np.array(ys), stats
