"""Force fields with a declared degree of positive homogeneity.

A force field lives on an open semi-cone ``Omega`` of ``R^n``, encoded as a
predicate. The degree is stored, never inferred; :func:`homogeneity_residual`
and :func:`euler_residual` certify it numerically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError
from .geometry import SymForm, as_vector, fd_gradient, fd_jacobian, solve, solve_matrix

Vec = np.ndarray


class HomogeneityWarning(UserWarning):
    """A potential failed its Euler-identity probe at construction."""


def _nonzero(q: Vec) -> bool:
    return bool(q.any())


@dataclass(frozen=True, eq=False)
class ForceField:
    """A vector field ``f`` on a semi-cone, positively homogeneous of ``degree``."""

    dim: int
    degree: float
    func: Callable[[Vec], Vec]
    domain: Callable[[Vec], bool] = _nonzero
    jacobian: Callable[[Vec], np.ndarray] | None = None
    name: str = "field"
    params: dict = field(default_factory=dict)

    def __call__(self, q) -> Vec:
        return evaluate(self, q)

    def contains(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.isfinite(q).all()) and bool(self.domain(q))

    def jac(self, q, step: float | None = None) -> np.ndarray:
        """Jacobian at ``q``: analytic when available, else central differences."""
        q = as_vector(q, self.dim)
        self._require(q)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(q), dtype=float)
        return fd_jacobian(self.func, q, step)

    def with_degree(self, degree: float) -> "ForceField":
        """Same field with a different *declared* degree (for negative controls)."""
        return replace(self, degree=float(degree), name=f"{self.name}[declared {degree:g}]")

    def _require(self, q: Vec) -> None:
        if not self.contains(q):
            raise DomainError(f"{self.name}: point {q} is outside the field's domain")


def evaluate(field: ForceField, q) -> Vec:
    q = as_vector(q, field.dim)
    field._require(q)
    return np.asarray(field.func(q), dtype=float)


def homogeneity_residual(field: ForceField, q, s: float) -> float:
    """``|s**(-degree) f(s q) - f(q)| / max(1, |f(q)|)``."""
    if s <= 0:
        raise ValueError("scale factor must be positive")
    q = as_vector(q, field.dim)
    fq = evaluate(field, q)
    fsq = evaluate(field, s * q)
    return float(np.linalg.norm(s ** (-field.degree) * fsq - fq) / max(1.0, np.linalg.norm(fq)))


def euler_residual(field: ForceField, q, step: float | None = None, analytic: bool = True) -> float:
    """``|Df(q) q - degree * f(q)|`` with the analytic Jacobian when present."""
    q = as_vector(q, field.dim)
    fq = evaluate(field, q)
    if analytic and field.jacobian is not None:
        jac = field.jac(q)
    else:
        field._require(q)
        jac = fd_jacobian(field.func, q, step)
    return float(np.linalg.norm(jac @ q - field.degree * fq))


# --------------------------------------------------------------------------
# elementary fields


def zero_field(dim: int, degree: float = -3.0) -> ForceField:
    """The zero field; homogeneous of every degree, declared ``degree``."""
    return ForceField(
        dim=dim,
        degree=float(degree),
        func=lambda q: np.zeros(dim),
        domain=lambda q: True,
        jacobian=lambda q: np.zeros((dim, dim)),
        name="zero",
    )


def linear_field(M) -> ForceField:
    """``f(q) = M q``, degree 1."""
    M = np.array(M, dtype=float)
    return ForceField(
        dim=M.shape[0],
        degree=1.0,
        func=lambda q: M @ q,
        domain=lambda q: True,
        jacobian=lambda q: M,
        name="linear",
        params={"M": M},
    )


def kepler_field(dim: int, k: float = 1.0) -> ForceField:
    """Attracting inverse-square field ``-k q / |q|**3``, degree -2."""

    def func(q):
        r = np.linalg.norm(q)
        return -k * q / r**3

    def jac(q):
        r = np.linalg.norm(q)
        return -k * (np.eye(dim) / r**3 - 3.0 * np.outer(q, q) / r**5)

    return ForceField(dim=dim, degree=-2.0, func=func, jacobian=jac, name="kepler", params={"k": k})


# --------------------------------------------------------------------------
# Braden-type fields M q <Gq,q>^e


def braden_operators(G: SymForm, A: SymForm) -> tuple[np.ndarray, SymForm]:
    """Return ``(M, B)`` with ``M = G^-1 A`` and ``B = G A^-1 G``."""
    if G.dim != A.dim:
        raise ValueError("G and A must have the same dimension")
    if not G.is_spd():
        raise DomainError("G must be positive definite")
    if not A.is_spd():
        raise DomainError("A must be positive definite")
    M = solve_matrix(G, A.entries)
    B = SymForm(G.entries @ solve_matrix(A, G.entries), check_spd=True, sym_rtol=1e-10)
    return M, B


def quadratic_power_field(G: SymForm, A: SymForm, degree: float, scale: float = 1.0) -> ForceField:
    """``f(q) = scale * M q * <Gq,q>**((degree - 1) / 2)`` with ``M = G^-1 A``.

    Degree -3 gives :func:`braden_field`; other degrees serve as controls.
    """
    M, B = braden_operators(G, A)
    Gm = G.entries
    e = (degree - 1.0) / 2.0

    def func(q):
        g = q @ Gm @ q
        return scale * g**e * (M @ q)

    def jac(q):
        g = q @ Gm @ q
        Mq = M @ q
        return scale * (g**e * M + 2.0 * e * g ** (e - 1.0) * np.outer(Mq, Gm @ q))

    return ForceField(
        dim=G.dim,
        degree=float(degree),
        func=func,
        domain=lambda q: bool(q @ Gm @ q > 0.0),
        jacobian=jac,
        name=f"quadratic_power[{degree:g}]",
        params={"G": G, "A": A, "M": M, "B": B, "scale": float(scale)},
    )


def braden_field(G: SymForm, A: SymForm, scale: float = 1.0) -> ForceField:
    """The degree -3 field ``scale * M q / <Gq,q>**2`` with ``M = G^-1 A``.

    ``M`` is self-adjoint for ``G``; ``params`` carries ``G, A, M, B, scale``
    where ``B = G A^-1 G``.
    """
    f = quadratic_power_field(G, A, -3.0, scale)
    return replace(f, name="braden")


def gm_symmetry_residual(field: ForceField) -> float:
    """Entrywise max of ``G M - M^T G`` for a Braden-type field."""
    G = field.params["G"].entries
    M = field.params["M"]
    return float(np.max(np.abs(G @ M - M.T @ G)))


# --------------------------------------------------------------------------
# potentials and gradient fields


@dataclass(frozen=True, eq=False)
class Potential:
    """A positively homogeneous scalar function with optional derivatives.

    ``gradient`` returns the differential ``DU(q)`` as a covector and
    ``hessian`` its derivative; both fall back to central differences.
    """

    value: Callable[[Vec], float]
    degree: float
    gradient: Callable[[Vec], Vec] | None = None
    hessian: Callable[[Vec], np.ndarray] | None = None
    domain: Callable[[Vec], bool] = _nonzero
    name: str = "U"

    def __call__(self, q) -> float:
        q = np.asarray(q, dtype=float)
        if not self.domain(q):
            raise DomainError(f"{self.name}: point {q} is outside the potential's domain")
        return float(self.value(q))

    def differential(self, q) -> Vec:
        q = np.asarray(q, dtype=float)
        if self.gradient is not None:
            return np.asarray(self.gradient(q), dtype=float)
        return fd_gradient(self.value, q)

    @property
    def analytic(self) -> bool:
        return self.gradient is not None

    def euler_residual(self, q) -> float:
        """``|DU(q)[q] - degree * U(q)|``."""
        q = np.asarray(q, dtype=float)
        return float(abs(self.differential(q) @ q - self.degree * self(q)))


def inverse_quadratic_potential(G: SymForm, coeff: float = 1.0) -> Potential:
    """``U(q) = coeff / <Gq,q>``, degree -2."""
    Gm = G.entries

    def value(q):
        return coeff / (q @ Gm @ q)

    def gradient(q):
        g = q @ Gm @ q
        return -2.0 * coeff * (Gm @ q) / g**2

    def hessian(q):
        g = q @ Gm @ q
        Gq = Gm @ q
        return -2.0 * coeff * (Gm / g**2 - 4.0 * np.outer(Gq, Gq) / g**3)

    return Potential(
        value, -2.0, gradient, hessian, domain=lambda q: bool(q @ Gm @ q > 0.0), name="inverse_quadratic"
    )


def neumann_potential(G: SymForm, A: SymForm, scale: float = 1.0) -> Potential:
    """``U(q) = scale * <Aq,q> / (2 <Gq,q>**2)``, degree -2.

    Restricted to the sphere ``<Gq,q> = 1`` this is the Neumann quadratic
    potential.
    """
    Gm, Am = G.entries, A.entries

    def value(q):
        return 0.5 * scale * (q @ Am @ q) / (q @ Gm @ q) ** 2

    def gradient(q):
        g = q @ Gm @ q
        a = q @ Am @ q
        return scale * ((Am @ q) / g**2 - 2.0 * a * (Gm @ q) / g**3)

    def hessian(q):
        g = q @ Gm @ q
        a = q @ Am @ q
        Aq, Gq = Am @ q, Gm @ q
        cross = np.outer(Aq, Gq) + np.outer(Gq, Aq)
        return scale * (Am / g**2 - 4.0 * cross / g**3 - 2.0 * a * Gm / g**3 + 12.0 * a * np.outer(Gq, Gq) / g**4)

    return Potential(value, -2.0, gradient, hessian, domain=lambda q: bool(q @ Gm @ q > 0.0), name="neumann")


def quadratic_potential(G: SymForm, coeff: float = 1.0) -> Potential:
    """``U(q) = coeff * <Gq,q> / 2``, degree 2."""
    Gm = G.entries
    return Potential(
        lambda q: 0.5 * coeff * (q @ Gm @ q),
        2.0,
        lambda q: coeff * (Gm @ q),
        lambda q: coeff * Gm,
        domain=lambda q: True,
        name="quadratic",
    )


def _probe_points(dim: int, domain: Callable[[Vec], bool], n: int = 8, seed: int = 0) -> list[Vec]:
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(20 * n):
        q = rng.standard_normal(dim)
        q /= np.linalg.norm(q)
        if domain(q):
            pts.append(q)
        if len(pts) == n:
            break
    return pts


def gradient_field(metric: SymForm, potential: Potential, euler_tol: float = 1e-6) -> ForceField:
    """``f = metric^-1 DU``, of degree ``potential.degree - 1``.

    A potential that fails the Euler identity at a few probe points triggers a
    :class:`HomogeneityWarning`; the field is still returned.
    """
    if not metric.is_spd():
        raise DomainError("metric must be positive definite")
    dim = metric.dim
    worst = max(
        (potential.euler_residual(q) / max(1.0, abs(potential(q))) for q in _probe_points(dim, potential.domain)),
        default=0.0,
    )
    if worst > euler_tol:
        warnings.warn(
            f"potential {potential.name!r} is not homogeneous of degree {potential.degree:g} "
            f"(Euler residual {worst:.2e})",
            HomogeneityWarning,
            stacklevel=2,
        )

    def func(q):
        return solve(metric, potential.differential(q))

    def jac(q):
        return solve_matrix(metric, potential.hessian(q))

    return ForceField(
        dim=dim,
        degree=potential.degree - 1.0,
        func=func,
        domain=potential.domain,
        jacobian=jac if potential.hessian is not None else None,
        name=f"grad[{potential.name}]",
        params={"metric": metric, "potential": potential},
    )


# --------------------------------------------------------------------------
# projective extension of an affine field


def _hyperplane_basis(ell: Vec) -> tuple[Vec, np.ndarray]:
    """Origin ``o`` with ``ell(o) = 1`` and an orthonormal basis of ``ker ell``."""
    n1 = ell.shape[0]
    nz = np.flatnonzero(ell)
    if nz.size == 1:
        k = int(nz[0])
        origin = np.zeros(n1)
        origin[k] = 1.0 / ell[k]
        basis = np.delete(np.eye(n1), k, axis=1)
        return origin, basis
    origin = ell / (ell @ ell)
    _, _, vt = np.linalg.svd(ell[None, :])
    return origin, vt[1:].T


def projective_extension(ell, base: ForceField) -> ForceField:
    """Extend an affine field to a degree -3 field on one more dimension.

    The affine space is the hyperplane ``ell(q) = 1``; chart coordinates are
    taken in an orthonormal basis of ``ker ell`` (the leading coordinates when
    ``ell`` picks one axis). The lifted force has zero component off the
    hyperplane, so on the hyperplane the multiplier of a central reaction
    vanishes.
    """
    ell = as_vector(ell)
    if not np.any(ell != 0.0):
        raise ValueError("the chart covector must be nonzero")
    if ell.shape[0] != base.dim + 1:
        raise ValueError("base field must have one dimension fewer than the covector")
    origin, E = _hyperplane_basis(ell)

    def chart(q):
        return E.T @ (q / (ell @ q) - origin)

    def func(q):
        h = ell @ q
        return h**-3 * (E @ base.func(chart(q)))

    def domain(q):
        h = ell @ q
        return bool(h > 0.0) and base.contains(chart(q))

    def jac(q):
        h = ell @ q
        x = chart(q)
        dx = E.T @ (np.eye(len(q)) / h - np.outer(q, ell) / h**2)
        return -3.0 * h**-4 * np.outer(E @ base.func(x), ell) + h**-3 * (E @ base.jacobian(x) @ dx)

    def lift_point(x) -> Vec:
        return origin + E @ as_vector(x, base.dim)

    return ForceField(
        dim=base.dim + 1,
        degree=-3.0,
        func=func,
        domain=domain,
        jacobian=jac if base.jacobian is not None else None,
        name=f"projective[{base.name}]",
        params={"ell": ell, "base": base, "origin": origin, "basis": E, "chart": chart, "lift_point": lift_point},
    )


def unit_scale_points(field: ForceField, rng: np.random.Generator, count: int) -> list[Vec]:
    """Seeded points of norm order one, well inside the field's domain.

    Projective extensions are sampled on their chart, ``s * lift(x)`` with
    ``|x|`` in ``[0.5, 2]`` and ``s`` in ``[0.5, 2]``, to stay away from both
    the boundary ``ell = 0`` and singularities of the base field at the origin.
    """
    pts = []
    lift = field.params.get("lift_point")
    while len(pts) < count:
        if lift is not None:
            x = rng.standard_normal(field.dim - 1)
            x *= rng.uniform(0.5, 2.0) / np.linalg.norm(x)
            q = rng.uniform(0.5, 2.0) * lift(x)
        else:
            q = rng.standard_normal(field.dim)
            q /= np.linalg.norm(q)
        if field.contains(q):
            pts.append(q)
    return pts
