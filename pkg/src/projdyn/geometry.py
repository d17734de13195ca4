"""Small dense linear algebra on a finite dimensional real vector space.

Vectors and covectors are plain 1-d ``numpy`` arrays; the distinction is
kept in names and docstrings only. Symmetric bilinear forms carry their own
type because the SPD check and the exact stored symmetry matter downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DomainError

#: relative pivot threshold for the SPD factorization
SPD_PIVOT_RTOL = 1e-12
#: default relative step for central differences
FD_STEP = 1e-5


def as_vector(v, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    return arr


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def pair(w, v) -> float:
    """Evaluate the covector ``w`` on the vector ``v``."""
    w = as_vector(w)
    v = as_vector(v)
    _check_dims(w, v)
    return float(w @ v)


@dataclass(frozen=True, eq=False)
class SymForm:
    """Symmetric bilinear form stored as a dense symmetric matrix.

    The matrix is symmetrized on construction so that ``entries[i, j]`` and
    ``entries[j, i]`` are bitwise equal. Pass ``check_spd=True`` to validate
    positive definiteness with a Cholesky factorization whose pivots must
    exceed ``SPD_PIVOT_RTOL * max(diag)``.
    """

    entries: np.ndarray
    spd_checked: bool = False
    _chol: tuple | None = field(default=None, repr=False)

    def __init__(self, entries, check_spd: bool = False, sym_rtol: float = 1e-12):
        mat = np.array(entries, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
            raise ValueError(f"a symmetric form needs a square matrix, got {mat.shape}")
        scale = max(1.0, float(np.max(np.abs(mat))))
        if np.max(np.abs(mat - mat.T)) > sym_rtol * scale:
            raise ValueError("matrix is not symmetric")
        mat = 0.5 * (mat + mat.T)
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)
        object.__setattr__(self, "spd_checked", False)
        object.__setattr__(self, "_chol", None)
        if check_spd:
            self._factor()

    @classmethod
    def identity(cls, dim: int) -> "SymForm":
        return cls(np.eye(dim), check_spd=True)

    @classmethod
    def diag(cls, values) -> "SymForm":
        return cls(np.diag(np.asarray(values, dtype=float)), check_spd=True)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _factor(self) -> tuple:
        if self._chol is not None:
            return self._chol
        mat = self.entries
        threshold = SPD_PIVOT_RTOL * float(np.max(np.diag(mat)))
        if threshold <= 0.0:
            raise DomainError("form is not positive definite (non-positive diagonal)")
        try:
            chol = cho_factor(mat, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise DomainError("form is not positive definite") from exc
        pivots = np.diag(chol[0]) ** 2
        if np.min(pivots) <= threshold:
            raise DomainError(
                f"form is not positive definite (pivot {np.min(pivots):.3e} <= {threshold:.3e})"
            )
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "spd_checked", True)
        return chol

    def is_spd(self) -> bool:
        try:
            self._factor()
        except DomainError:
            return False
        return True

    def __call__(self, u, v=None) -> float:
        return form_apply(self, u, u if v is None else v)

    def lower(self, v) -> np.ndarray:
        """The covector ``F v``."""
        return self.entries @ as_vector(v, self.dim)

    def norm(self, v) -> float:
        return float(np.sqrt(form_apply(self, v, v)))

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.entries))


def form_apply(F: SymForm, u, v) -> float:
    """Return ``<F u, v>``, exactly symmetric in ``u`` and ``v``."""
    u = as_vector(u, F.dim)
    v = as_vector(v, F.dim)
    mat = F.entries
    # floating-point addition commutes, so averaging both orders is exactly symmetric
    return float(0.5 * ((u @ (mat @ v)) + (v @ (mat @ u))))


def solve(F: SymForm, rhs) -> np.ndarray:
    """Solve ``F x = rhs`` for an SPD form."""
    rhs = as_vector(rhs, F.dim)
    return cho_solve(F._factor(), rhs)


def solve_matrix(F: SymForm, rhs: np.ndarray) -> np.ndarray:
    """Solve ``F X = rhs`` column-wise."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != F.dim:
        raise ValueError("dimension mismatch")
    return cho_solve(F._factor(), rhs)


def fd_step(q, step: float | None = None) -> float:
    if step is not None:
        if step <= 0:
            raise ValueError("finite-difference step must be positive")
        return float(step)
    return FD_STEP * max(1.0, float(np.linalg.norm(q)))


def fd_jacobian(func: Callable[[np.ndarray], np.ndarray], q, step: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of ``func`` at ``q``; entry error O(step**2)."""
    q = as_vector(q)
    eps = fd_step(q, step)
    cols = []
    for i in range(q.shape[0]):
        e = np.zeros_like(q)
        e[i] = eps
        cols.append((np.asarray(func(q + e), dtype=float) - np.asarray(func(q - e), dtype=float)) / (2 * eps))
    return np.column_stack(cols)


def fd_gradient(func: Callable[[np.ndarray], float], q, step: float | None = None) -> np.ndarray:
    """Central-difference gradient (as a covector) of a scalar function."""
    q = as_vector(q)
    eps = fd_step(q, step)
    out = np.empty_like(q)
    for i in range(q.shape[0]):
        e = np.zeros_like(q)
        e[i] = eps
        out[i] = (func(q + e) - func(q - e)) / (2 * eps)
    return out


def fd_directional(func: Callable[[np.ndarray], np.ndarray], x, v, step: float | None = None) -> np.ndarray:
    """Central-difference derivative of ``func`` at ``x`` in the direction ``v``."""
    x = as_vector(x)
    v = as_vector(v, x.shape[0])
    vn = float(np.linalg.norm(v))
    if vn == 0.0:
        return np.zeros_like(np.asarray(func(x), dtype=float))
    eps = fd_step(x, step) / vn
    return (np.asarray(func(x + eps * v), dtype=float) - np.asarray(func(x - eps * v), dtype=float)) / (2 * eps)


def random_spd(rng: np.random.Generator, dim: int, low: float = 0.5, high: float = 2.0) -> SymForm:
    """Random SPD form with eigenvalues drawn uniformly from ``[low, high]``."""
    basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eig = rng.uniform(low, high, size=dim)
    return SymForm((basis * eig) @ basis.T, check_spd=True)
