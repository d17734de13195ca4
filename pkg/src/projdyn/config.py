"""Run configuration: a JSON document with nested sections and numeric arrays.

Matrices are row-major nested lists. Missing ``G``/``A`` matrices and
initial states are drawn from the seeded generator, so a config plus a seed
fully determines a run.

Example::

    {
      "problem": "neumann",
      "dim": 3,
      "seed": 7,
      "t_end": 10.0,
      "nu": 0.5,
      "integrator": {"rtol": 1e-10, "atol": 1e-10}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from dataclasses import field as _field
from pathlib import Path

import numpy as np

from .dynamics import ConstrainedSystem, PhaseState, central_reaction, linear_reaction
from .errors import DomainError
from .forces import (
    ForceField,
    braden_field,
    gradient_field,
    inverse_quadratic_potential,
    kepler_field,
    linear_field,
    projective_extension,
    quadratic_power_field,
    zero_field,
)
from .geometry import SymForm
from .ode import IntegratorOptions
from .problems import EllipsoidData, JacobiParams, random_ellipsoid, random_tangent_state
from .screens import LinearScreen, QuadricScreen, Screen, project_point, tangent_project

PROBLEMS = ("free", "constrained", "neumann", "braden", "jacobi", "custom")


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


@dataclass
class RunConfig:
    problem: str = "neumann"
    dim: int = 3
    seed: int = 0
    t_end: float = 10.0
    G: list | None = None
    A: list | None = None
    nu: float = 0.0
    eta: float = 1.0
    field: dict = _field(default_factory=dict)
    screen: dict = _field(default_factory=dict)
    reaction: dict = _field(default_factory=dict)
    initial: dict = _field(default_factory=dict)
    integrator: dict = _field(default_factory=dict)
    output: dict = _field(default_factory=dict)
    source: str | None = None
    reference: bool = False
    verify: dict = _field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ConfigError("dim must be a positive integer")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        for name in ("G", "A"):
            mat = getattr(self, name)
            if mat is None:
                continue
            arr = np.asarray(mat, dtype=float)
            if arr.shape != (self.dim, self.dim):
                raise ConfigError(f"{name} must be a {self.dim}x{self.dim} matrix")
            if not np.allclose(arr, arr.T, rtol=0, atol=1e-12):
                raise ConfigError(f"{name} must be symmetric")
        for key in ("q", "p"):
            if key in self.initial and len(self.initial[key]) != self.dim:
                raise ConfigError(f"initial.{key} must have length {self.dim}")
        try:
            self.options()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad integrator options: {exc}") from exc

    def with_overrides(self, seed: int | None = None, rtol: float | None = None) -> "RunConfig":
        cfg = replace(self, integrator=dict(self.integrator))
        if seed is not None:
            cfg.seed = seed
        if rtol is not None:
            cfg.integrator["rtol"] = rtol
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    # -- builders ---------------------------------------------------------

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def options(self) -> IntegratorOptions:
        return IntegratorOptions(**self.integrator)

    def ellipsoid(self) -> EllipsoidData:
        cached = self.__dict__.get("_ellipsoid")
        if cached is not None and cached[0] == (self.seed, self.dim):
            return cached[1]
        rng = self.rng()
        random = random_ellipsoid(rng, self.dim)
        try:
            G = SymForm(self.G, check_spd=True) if self.G is not None else random.G
            A = SymForm(self.A, check_spd=True) if self.A is not None else random.A
            data = EllipsoidData(G, A)
        except (DomainError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        self.__dict__["_ellipsoid"] = ((self.seed, self.dim), data)
        return data

    def build_field(self) -> ForceField:
        try:
            return self._build_field()
        except KeyError as exc:
            raise ConfigError(f"field spec is missing {exc}") from exc
        except (DomainError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad field spec: {exc}") from exc

    def _build_field(self) -> ForceField:
        spec = dict(self.field) or {"kind": "braden"}
        kind = spec.get("kind", "braden")
        data = self.ellipsoid()
        if kind == "zero":
            return zero_field(self.dim, spec.get("degree", -3.0))
        if kind == "braden":
            return braden_field(data.G, data.A, spec.get("scale", self.eta))
        if kind == "quadratic_power":
            return quadratic_power_field(data.G, data.A, spec["degree"], spec.get("scale", 1.0))
        if kind == "kepler":
            return kepler_field(self.dim, spec.get("k", 1.0))
        if kind == "linear":
            return linear_field(spec.get("M", np.eye(self.dim)))
        if kind == "inverse_quadratic":
            metric = SymForm(spec["metric"], check_spd=True) if "metric" in spec else SymForm.identity(self.dim)
            return gradient_field(metric, inverse_quadratic_potential(metric, spec.get("coeff", 1.0)))
        if kind == "projective_kepler":
            return projective_extension(_axis(self.dim), kepler_field(self.dim - 1, spec.get("k", 1.0)))
        raise ConfigError(f"unknown field kind {kind!r}")

    def build_screen(self) -> Screen:
        spec = dict(self.screen) or {"kind": "G"}
        kind = spec.get("kind", "G")
        if kind in ("G", "A", "B"):
            data = self.ellipsoid()
            return {"G": data.g_screen, "A": data.a_screen, "B": data.b_screen}[kind]
        if kind == "quadric":
            C = spec.get("C")
            try:
                return QuadricScreen(SymForm(C if C is not None else np.eye(self.dim), check_spd=True))
            except (DomainError, ValueError) as exc:
                raise ConfigError(f"bad quadric screen: {exc}") from exc
        if kind == "linear":
            ell = spec.get("ell")
            return LinearScreen(np.asarray(ell, dtype=float) if ell is not None else _axis(self.dim))
        raise ConfigError(f"unknown screen kind {kind!r}")

    def build_system(self) -> ConstrainedSystem:
        spec = dict(self.reaction) or {"kind": "central"}
        if spec.get("kind", "central") == "central":
            reaction = central_reaction()
        elif spec["kind"] == "linear":
            if "M" not in spec:
                raise ConfigError("linear reaction needs a matrix 'M'")
            reaction = linear_reaction(spec["M"])
        else:
            raise ConfigError(f"unknown reaction kind {spec['kind']!r}")
        return ConstrainedSystem(self.build_field(), self.build_screen(), reaction, name=self.problem)

    def jacobi_params(self) -> JacobiParams:
        return JacobiParams(self.ellipsoid(), self.nu)

    def initial_state(self, screen: Screen | None) -> PhaseState:
        """Initial state from config; projected onto ``screen`` when one is given."""
        rng = np.random.default_rng([self.seed, 1])
        speed = self.initial.get("speed", 1.0)
        if "q" in self.initial:
            q = np.asarray(self.initial["q"], dtype=float)
            p = np.asarray(self.initial.get("p", np.zeros(self.dim)), dtype=float)
            if screen is not None:
                q = project_point(screen, q)
                p = tangent_project(screen, q, p)
            return PhaseState(q, p)
        if screen is None:
            q = rng.standard_normal(self.dim)
            return PhaseState(q / np.linalg.norm(q), speed * rng.standard_normal(self.dim) / np.sqrt(self.dim))
        return random_tangent_state(rng, screen, speed)


def _axis(dim: int) -> np.ndarray:
    ell = np.zeros(dim)
    ell[-1] = 1.0
    return ell
