"""Screens: hypersurfaces ``h(q) = 1`` with ``h`` positively 1-homogeneous.

Both screen kinds are transverse to the rays on their cones because of the
Euler identity ``Dh(q)[q] = h(q) > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import SymForm, as_vector, fd_gradient, fd_step

Vec = np.ndarray


class Screen:
    """Base class. Subclasses implement ``h``, ``dh`` and ``d2h``."""

    dim: int

    def h(self, q: Vec) -> float:
        raise NotImplementedError

    def dh(self, q: Vec) -> Vec:
        """``Dh(q)`` as a covector."""
        raise NotImplementedError

    def d2h(self, q: Vec) -> np.ndarray:
        """Matrix of the second derivative ``D2h(q)``."""
        raise NotImplementedError

    def contains(self, q: Vec) -> bool:
        raise NotImplementedError

    def value(self, q) -> float:
        q = as_vector(q, self.dim)
        if not self.contains(q):
            raise DomainError(f"point {q} is outside the screen's cone")
        return self.h(q)

    def hess(self, q: Vec, u: Vec, v: Vec | None = None) -> float:
        """``D2h(q)(u, v)``."""
        v = u if v is None else v
        return float(u @ self.d2h(q) @ v)


@dataclass(frozen=True, eq=False)
class LinearScreen(Screen):
    """Affine hyperplane ``ell(q) = 1``."""

    ell: Vec

    def __post_init__(self):
        ell = as_vector(self.ell).copy()
        if not np.any(ell != 0.0):
            raise ValueError("linear screen needs a nonzero covector")
        ell.setflags(write=False)
        object.__setattr__(self, "ell", ell)

    @classmethod
    def axis(cls, dim: int, k: int = -1) -> "LinearScreen":
        ell = np.zeros(dim)
        ell[k] = 1.0
        return cls(ell)

    @property
    def dim(self) -> int:
        return self.ell.shape[0]

    def h(self, q):
        return float(self.ell @ q)

    def dh(self, q):
        return np.array(self.ell)

    def d2h(self, q):
        return np.zeros((self.dim, self.dim))

    def hess(self, q, u, v=None):
        return 0.0

    def contains(self, q):
        return bool(np.isfinite(q).all()) and self.ell @ q > 0.0


@dataclass(frozen=True, eq=False)
class QuadricScreen(Screen):
    """Ellipsoid ``<Cq,q> = 1`` for an SPD form ``C``; ``h(q) = sqrt(<Cq,q>)``."""

    C: SymForm

    def __post_init__(self):
        if not self.C.is_spd():
            raise DomainError("quadric screen needs a positive definite form")

    @property
    def dim(self) -> int:
        return self.C.dim

    def h(self, q):
        return float(np.sqrt(q @ self.C.entries @ q))

    def dh(self, q):
        Cq = self.C.entries @ q
        return Cq / np.sqrt(q @ Cq)

    def d2h(self, q):
        Cm = self.C.entries
        Cq = Cm @ q
        h = np.sqrt(q @ Cq)
        return Cm / h - np.outer(Cq, Cq) / h**3

    def hess(self, q, u, v=None):
        # <Cu,v>/h - <Cq,u><Cq,v>/h^3 without forming the matrix
        v = u if v is None else v
        Cm = self.C.entries
        Cq = Cm @ q
        h = np.sqrt(q @ Cq)
        return float((u @ Cm @ v) / h - (Cq @ u) * (Cq @ v) / h**3)

    def contains(self, q):
        return bool(np.isfinite(q).all()) and bool(q.any())


def project_point(screen: Screen, q) -> Vec:
    """Central projection ``q / h(q)`` onto the screen."""
    q = as_vector(q, screen.dim)
    h = screen.value(q)
    if not h > 0.0:
        raise DomainError(f"h(q) = {h} is not positive")
    return q / h


def tangent_project(screen: Screen, q, v) -> Vec:
    """Remove the radial part of ``v``: ``v - Dh(q)[v] q`` for ``q`` on the screen."""
    q = as_vector(q, screen.dim)
    v = as_vector(v, screen.dim)
    if not screen.contains(q):
        raise DomainError(f"point {q} is outside the screen's cone")
    return v - (screen.dh(q) @ v) * q


def on_screen_velocity(screen: Screen, q, qdot) -> Vec:
    """Velocity of ``q / h(q)`` after the time change ``dt = h**2 dtau``: ``h qdot - hdot q``."""
    q = as_vector(q, screen.dim)
    qdot = as_vector(qdot, screen.dim)
    h = screen.value(q)
    return h * qdot - (screen.dh(q) @ qdot) * q


@dataclass(frozen=True)
class ScreenResiduals:
    euler: float
    first: float
    second: float


def screen_residuals(screen: Screen, q, v, step: float | None = None) -> ScreenResiduals:
    """Certify homogeneity and analytic derivatives of a screen at ``q``.

    ``first`` compares ``Dh(q)`` with a central-difference gradient of ``h``;
    ``second`` compares ``D2h(q)(v, v)`` with a central difference of ``Dh``
    along ``v``, so together they tie ``D2h`` back to ``h``.
    """
    q = as_vector(q, screen.dim)
    v = as_vector(v, screen.dim)
    h = screen.value(q)
    euler = abs(screen.dh(q) @ q - h)
    first = float(np.max(np.abs(fd_gradient(screen.h, q, step) - screen.dh(q))))
    vn = np.linalg.norm(v)
    if vn == 0.0:
        second = 0.0
    else:
        eps = fd_step(q, step) / vn
        fd2 = (screen.dh(q + eps * v) - screen.dh(q - eps * v)) @ v / (2.0 * eps)
        second = abs(fd2 - screen.hess(q, v))
    return ScreenResiduals(float(euler), first, float(second))
