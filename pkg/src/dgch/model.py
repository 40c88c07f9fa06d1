"""Potentials, mobilities and the benchmark problems."""
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

CLAMP_DELTA = 1e-9

POTENTIAL_KINDS = ("double_well", "logarithmic", "quadratic")
MOBILITY_KINDS = ("constant", "u_one_minus_u", "one_minus_u_sq")


class PotentialValues(NamedTuple):
    F: np.ndarray
    f: np.ndarray
    df: np.ndarray
    clamped: int


@dataclass(frozen=True)
class PotentialSpec:
    """Bulk free energy density F with derivative f = F'.

    ``logarithmic`` is ``theta/2 [u ln u + (1-u) ln(1-u)] - theta_c/2 u^2 +
    linear * u``; the linear term lets the same family express the
    ``3000(...) + 9000 u (1 - u)`` form (theta=6000, theta_c=18000,
    linear=9000).  ``quadratic`` is ``coefficient/2 u^2`` and only exists for
    testing the midpoint-rule limit of the integrator.
    """

    kind: str = "double_well"
    theta: float = 0.0
    theta_c: float = 0.0
    linear: float = 0.0
    coefficient: float = 1.0

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential {self.kind!r}; expected one of {POTENTIAL_KINDS}")
        if self.kind == "logarithmic" and not (0 < self.theta <= self.theta_c):
            raise ValueError(
                f"logarithmic potential needs 0 < theta <= theta_c, got theta={self.theta}, theta_c={self.theta_c}"
            )

    def d2f(self, u):
        """f'' (used for manufactured sources only)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "double_well":
            return 6.0 * u
        if self.kind == "quadratic":
            return np.zeros_like(u)
        return 0.5 * self.theta * (1.0 / (1.0 - u) ** 2 - 1.0 / u**2)


def potential_eval(spec: PotentialSpec, u) -> PotentialValues:
    """F(u), f(u), f'(u) and the number of entries clamped into the log domain."""
    u = np.asarray(u, dtype=float)
    if spec.kind == "double_well":
        u2 = u * u
        return PotentialValues(0.25 * (1.0 - u2) ** 2, u * (u2 - 1.0), 3.0 * u2 - 1.0, 0)
    if spec.kind == "quadratic":
        c = spec.coefficient
        return PotentialValues(0.5 * c * u * u, c * u, np.full_like(u, c), 0)

    v = np.clip(u, CLAMP_DELTA, 1.0 - CLAMP_DELTA)
    clamped = int(np.count_nonzero(v != u))
    th, thc, lin = spec.theta, spec.theta_c, spec.linear
    log_v, log_w = np.log(v), np.log1p(-v)
    F = 0.5 * th * (v * log_v + (1.0 - v) * log_w) - 0.5 * thc * v * v + lin * v
    f = 0.5 * th * (log_v - log_w) - thc * v + lin
    df = 0.5 * th / (v * (1.0 - v)) - thc
    return PotentialValues(F, f, df, clamped)


@dataclass(frozen=True)
class MobilitySpec:
    kind: str = "constant"
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in MOBILITY_KINDS:
            raise ValueError(f"unknown mobility {self.kind!r}; expected one of {MOBILITY_KINDS}")
        if not self.beta > 0:
            raise ValueError(f"mobility scale beta must be positive, got {self.beta}")

    @property
    def is_constant(self):
        return self.kind == "constant"

    def derivative(self, u):
        """d mu / du of the unclamped mobility."""
        u = np.asarray(u, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(u)
        if self.kind == "u_one_minus_u":
            return self.beta * (1.0 - 2.0 * u)
        return -2.0 * self.beta * u


def mobility_eval(spec: MobilitySpec, u):
    u = np.asarray(u, dtype=float)
    if spec.kind == "constant":
        return np.full_like(u, spec.beta)
    if spec.kind == "u_one_minus_u":
        raw = spec.beta * u * (1.0 - u)
    else:
        raw = spec.beta * (1.0 - u * u)
    return np.maximum(raw, 0.0)


@dataclass(frozen=True)
class SeparableSolution:
    """u = a(t) X(x) Y(y) with -Laplace(X Y) = c X Y."""

    a: Callable
    da: Callable
    X: Callable
    dX: Callable
    Y: Callable
    dY: Callable
    c: float

    def __call__(self, x, y, t):
        return self.a(t) * self.X(x) * self.Y(y)

    def gradient(self, x, y, t):
        a = self.a(t)
        return a * self.dX(x) * self.Y(y), a * self.X(x) * self.dY(y)

    def time_derivative(self, x, y, t):
        return self.da(t) * self.X(x) * self.Y(y)


@dataclass(frozen=True)
class RandomInitial:
    mean: float
    amplitude: float
    seed: int = 0


@dataclass(frozen=True)
class ProblemPreset:
    name: str
    epsilon: float
    domain: tuple
    bc_kind: str
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    mobility: MobilitySpec = field(default_factory=MobilitySpec)
    exact_solution: SeparableSolution | None = None
    initial_condition: Callable | RandomInitial | None = None

    @property
    def has_source(self):
        return self.exact_solution is not None

    def with_(self, **changes):
        return replace(self, **changes)

    def chemical_potential(self, x, y, t):
        """Exact w = -eps^2 Laplace(u) + f(u) for presets with an exact solution."""
        sol = self._require_exact()
        u = sol(x, y, t)
        return self.epsilon**2 * sol.c * u + potential_eval(self.potential, u).f

    def source(self, x, y, t):
        return manufactured_source(self, x, y, t)

    def _require_exact(self):
        if self.exact_solution is None:
            raise ValueError(f"preset {self.name!r} has no exact solution / source term")
        return self.exact_solution


def manufactured_source(preset: ProblemPreset, x, y, t):
    """g = u_t - div(mu(u) grad w) for the preset's exact solution.

    For separable eigenfunction solutions every derivative is closed form:
    grad w = (eps^2 c + f'(u)) grad u and
    Laplace w = -c (eps^2 c + f'(u)) u + f''(u) |grad u|^2.
    """
    sol = preset._require_exact()
    eps2c = preset.epsilon**2 * sol.c
    u = sol(x, y, t)
    ux, uy = sol.gradient(x, y, t)
    grad2 = ux * ux + uy * uy
    df = potential_eval(preset.potential, u).df
    lap_w = -sol.c * (eps2c + df) * u + preset.potential.d2f(u) * grad2
    mob = preset.mobility
    if mob.is_constant:
        mu, dmu = mob.beta, 0.0
    else:
        mu = mob.beta * (u * (1.0 - u) if mob.kind == "u_one_minus_u" else 1.0 - u * u)
        dmu = mob.derivative(u)
    return sol.time_derivative(x, y, t) - mu * lap_w - dmu * (eps2c + df) * grad2


def _ex1_solution():
    pi = np.pi
    return SeparableSolution(
        a=lambda t: np.exp(np.cos(t)),
        da=lambda t: -np.sin(t) * np.exp(np.cos(t)),
        X=lambda x: np.cos(pi * x),
        dX=lambda x: -pi * np.sin(pi * x),
        Y=lambda y: np.cos(pi * y),
        dY=lambda y: -pi * np.sin(pi * y),
        c=2.0 * pi**2,
    )


def _ex2_solution():
    return SeparableSolution(
        a=lambda t: np.exp(-2.0 * t),
        da=lambda t: -2.0 * np.exp(-2.0 * t),
        X=np.sin,
        dX=np.cos,
        Y=np.sin,
        dY=np.cos,
        c=2.0,
    )


def _exact_initial(sol):
    return lambda x, y: sol(x, y, 0.0)


# ex1's diffusivity 0.1 is the coefficient of the Laplacian in w, i.e. eps^2 = 0.1
EX1_EPSILON = float(np.sqrt(0.1))

EX4_POTENTIAL = PotentialSpec("logarithmic", theta=6000.0, theta_c=18000.0, linear=9000.0)

PRESET_NAMES = ("ex1", "ex2", "ex3_spinodal", "ex3_nucleation", "ex4")


def make_preset(name: str, seed: int = 0) -> ProblemPreset:
    if name == "ex1":
        sol = _ex1_solution()
        return ProblemPreset(
            "ex1", EX1_EPSILON, (-1.0, 1.0, -1.0, 1.0), "neumann",
            exact_solution=sol, initial_condition=_exact_initial(sol),
        )
    if name == "ex2":
        sol = _ex2_solution()
        return ProblemPreset(
            "ex2", 1.0, (0.0, 2 * np.pi, 0.0, 2 * np.pi), "periodic",
            mobility=MobilitySpec("one_minus_u_sq"),
            exact_solution=sol, initial_condition=_exact_initial(sol),
        )
    if name in ("ex3_spinodal", "ex3_nucleation"):
        mean = 0.0 if name == "ex3_spinodal" else 0.4
        return ProblemPreset(
            name, 1e-5, (0.0, 1.0, 0.0, 1.0), "neumann",
            initial_condition=RandomInitial(mean, 0.005, seed),
        )
    if name == "ex4":
        return ProblemPreset(
            "ex4", 1.0, (-0.5, 0.5, -0.5, 0.5), "neumann",
            potential=EX4_POTENTIAL,
            mobility=MobilitySpec("u_one_minus_u"),
            initial_condition=RandomInitial(0.63, 0.05, seed),
        )
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
