"""Phase-space vector fields ``X, Y, Z, Y_beta`` and finite-difference Lie brackets.

Bracket convention: ``[F, H](x) = DH(x) F(x) - DF(x) H(x)``. With it
``[Z, X] = Y`` holds for every force field, and ``[X, Y] = 2X`` together
with ``[Y, Z] = 2Z`` hold when the field has degree -3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .forces import ForceField
from .geometry import fd_directional, fd_step

Vec = np.ndarray


@dataclass(frozen=True, eq=False)
class PhaseVectorField:
    """Vector field on phase space; acts on the stacked point ``x = (q, p)``."""

    func: Callable[[Vec, Vec], tuple[Vec, Vec]]
    dim: int
    label: str = ""

    def __call__(self, q, p) -> tuple[Vec, Vec]:
        dq, dp = self.func(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
        return np.asarray(dq, dtype=float), np.asarray(dp, dtype=float)

    def stacked(self, x: Vec) -> Vec:
        n = self.dim
        dq, dp = self(x[:n], x[n:])
        return np.concatenate([dq, dp])

    def __add__(self, other: "PhaseVectorField") -> "PhaseVectorField":
        return PhaseVectorField(
            lambda q, p: tuple(a + b for a, b in zip(self(q, p), other(q, p))),
            self.dim,
            f"{self.label}+{other.label}",
        )

    def scaled(self, c: float) -> "PhaseVectorField":
        return PhaseVectorField(lambda q, p: tuple(c * v for v in self(q, p)), self.dim, f"{c:g}{self.label}")


def make_XYZ(field: ForceField) -> tuple[PhaseVectorField, PhaseVectorField, PhaseVectorField]:
    """``X = (p, f(q))``, ``Y = (q, -p)``, ``Z = (0, q)``."""
    n = field.dim
    X = PhaseVectorField(lambda q, p: (p, field(q)), n, "X")
    Y = PhaseVectorField(lambda q, p: (q, -p), n, "Y")
    Z = PhaseVectorField(lambda q, p: (np.zeros_like(q), q), n, "Z")
    return X, Y, Z


def make_Y_beta(dim: int, beta: float) -> PhaseVectorField:
    """``Y_beta = (q, beta p)``."""
    return PhaseVectorField(lambda q, p: (q, beta * p), dim, f"Y[{beta:g}]")


def lie_bracket(F: PhaseVectorField, H: PhaseVectorField, q, p, step: float | None = None) -> Vec:
    """``[F, H]`` at ``(q, p)`` from central-difference directional derivatives.

    Returns the stacked phase vector. The default step is
    ``1e-5 * max(1, |x|)``.
    """
    x = np.concatenate([np.asarray(q, dtype=float), np.asarray(p, dtype=float)])
    eps = fd_step(x, step)
    return fd_directional(H.stacked, x, F.stacked(x), eps) - fd_directional(F.stacked, x, H.stacked(x), eps)


@dataclass(frozen=True)
class Sl2Report:
    xy: float
    yz: float
    zx: float
    points: int

    def max(self) -> float:
        return max(self.xy, self.yz, self.zx)


def _residual(F, H, target, q, p, step):
    return float(np.linalg.norm(lie_bracket(F, H, q, p, step) - target.stacked(np.concatenate([q, p]))))


def verify_sl2(field: ForceField, points: Iterable[tuple[Vec, Vec]], step: float | None = None) -> Sl2Report:
    """Max residuals of ``[X,Y] - 2X``, ``[Y,Z] - 2Z`` and ``[Z,X] - Y`` over ``points``."""
    X, Y, Z = make_XYZ(field)
    X2, Z2 = X.scaled(2.0), Z.scaled(2.0)
    xy = yz = zx = 0.0
    count = 0
    for q, p in points:
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        xy = max(xy, _residual(X, Y, X2, q, p, step))
        yz = max(yz, _residual(Y, Z, Z2, q, p, step))
        zx = max(zx, _residual(Z, X, Y, q, p, step))
        count += 1
    return Sl2Report(xy, yz, zx, count)


def beta_for_degree(alpha: float) -> float:
    """``beta`` with ``2 beta = alpha + 1``."""
    return (alpha + 1.0) / 2.0


def verify_beta(field: ForceField, points: Iterable[tuple[Vec, Vec]], step: float | None = None) -> float:
    """Max residual of ``[X, Y_beta] - (1 - beta) X`` using the declared degree."""
    beta = beta_for_degree(field.degree)
    X, _, _ = make_XYZ(field)
    Yb = make_Y_beta(field.dim, beta)
    target = X.scaled(1.0 - beta)
    worst = 0.0
    for q, p in points:
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        worst = max(worst, _residual(X, Yb, target, q, p, step))
    return worst


def random_phase_points(rng: np.random.Generator, field: ForceField, count: int) -> list[tuple[Vec, Vec]]:
    """Unit-scale phase points ``(q, p)`` with ``q`` in the field's domain."""
    pts = []
    while len(pts) < count:
        q = rng.standard_normal(field.dim)
        q /= np.linalg.norm(q)
        if not field.contains(q):
            continue
        pts.append((q, rng.standard_normal(field.dim)))
    return pts
