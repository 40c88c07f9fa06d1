"""Run configuration: ``key=value`` text files with preset defaults."""
import dataclasses
import math
import re
from dataclasses import dataclass

from .mesh import BC_KINDS, build_rect_mesh
from .model import (
    EX1_EPSILON,
    EX4_POTENTIAL,
    MOBILITY_KINDS,
    POTENTIAL_KINDS,
    PRESET_NAMES,
    MobilitySpec,
    PotentialSpec,
    ProblemPreset,
    RandomInitial,
    make_preset,
)
from .space import DgSpace


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    preset: str | None = None
    domain: tuple = (0.0, 1.0, 0.0, 1.0)
    bc: str = "neumann"
    nx: int = 16
    ny: int = 16
    q: int = 1
    sigma: float | None = None
    epsilon: float = 0.1
    mobility: str = "constant"
    beta: float = 1.0
    potential: str = "double_well"
    theta: float = 0.0
    theta_c: float = 0.0
    theta_linear: float = 0.0
    dt: float | None = None
    T: float = 1.0
    seed: int = 0
    mean: float = 0.0
    amplitude: float = 0.005
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    tau_points: int = 2
    stride: int = 1
    volume_degree: int | None = None
    snapshot_times: tuple = ()
    out_dir: str | None = None

    def validate(self):
        if self.preset is not None and self.preset not in PRESET_NAMES:
            raise ConfigError(f"unknown preset {self.preset!r}; expected one of {PRESET_NAMES}")
        if self.q not in (1, 2, 3):
            raise ConfigError(f"q must be 1, 2 or 3, got {self.q}")
        if self.nx < 1 or self.ny < 1:
            raise ConfigError(f"nx and ny must be >= 1, got {self.nx}, {self.ny}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.T >= 0:
            raise ConfigError(f"T must be non-negative, got {self.T}")
        if self.bc not in BC_KINDS:
            raise ConfigError(f"bc must be one of {BC_KINDS}, got {self.bc!r}")
        if self.mobility not in MOBILITY_KINDS:
            raise ConfigError(f"mobility must be one of {MOBILITY_KINDS}, got {self.mobility!r}")
        if self.potential not in POTENTIAL_KINDS:
            raise ConfigError(f"potential must be one of {POTENTIAL_KINDS}, got {self.potential!r}")
        if self.potential == "logarithmic" and not 0 < self.theta <= self.theta_c:
            raise ConfigError("logarithmic potential needs 0 < theta <= theta_c")
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not self.newton_tol > 0 or self.newton_max_iter < 1:
            raise ConfigError("newton_tol must be > 0 and newton_max_iter >= 1")
        if self.tau_points not in (2, 3, 4, 5):
            raise ConfigError(f"tau_points must be in 2..5, got {self.tau_points}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        x0, x1, y0, y1 = self.domain
        if not (x1 > x0 and y1 > y0):
            raise ConfigError(f"degenerate domain {self.domain}")
        return self

    # -- derived objects ----------------------------------------------------

    @property
    def dx(self):
        """Grid-size label of the convergence tables: domain width / (2 nx)."""
        return (self.domain[1] - self.domain[0]) / (2 * self.nx)

    def resolved_dt(self):
        if self.dt is not None:
            return self.dt
        if self.preset == "ex1":
            return 0.5 * self.dx
        if self.preset == "ex2":
            return 0.0032 * math.pi if self.q == 1 else 0.00032 * math.pi
        raise ConfigError("dt is required when the preset does not define one")

    def step_plan(self):
        """Uniform partition of [0, T]: (number of steps, step size)."""
        dt = self.resolved_dt()
        if self.T == 0:
            return 0, dt
        n = max(1, math.ceil(self.T / dt - 1e-9))
        return n, self.T / n

    def problem(self) -> ProblemPreset:
        potential = PotentialSpec(
            self.potential, theta=self.theta, theta_c=self.theta_c, linear=self.theta_linear
        )
        base = make_preset(self.preset, self.seed) if self.preset else None
        init = None
        if base is None or isinstance(base.initial_condition, RandomInitial):
            init = RandomInitial(self.mean, self.amplitude, self.seed)
        prob = ProblemPreset(
            name=self.preset or "custom",
            epsilon=self.epsilon,
            domain=tuple(self.domain),
            bc_kind=self.bc,
            potential=potential,
            mobility=MobilitySpec(self.mobility, self.beta),
            exact_solution=base.exact_solution if base else None,
            initial_condition=init if init is not None else base.initial_condition,
        )
        return prob

    def mesh(self):
        return build_rect_mesh(self.domain, self.nx, self.ny, self.bc)

    def space(self):
        return DgSpace(self.mesh(), self.q, sigma=self.sigma, volume_degree=self.volume_degree)

    def refined(self, levels=1):
        return dataclasses.replace(self, nx=self.nx * 2**levels, ny=self.ny * 2**levels)


def _preset_defaults(name):
    pi = math.pi
    if name == "ex1":
        return dict(domain=(-1.0, 1.0, -1.0, 1.0), bc="neumann", epsilon=EX1_EPSILON, nx=16, ny=16, T=1.0)
    if name == "ex2":
        return dict(domain=(0.0, 2 * pi, 0.0, 2 * pi), bc="periodic", epsilon=1.0,
                    mobility="one_minus_u_sq", nx=16, ny=16, T=1.0)
    if name in ("ex3_spinodal", "ex3_nucleation"):
        return dict(domain=(0.0, 1.0, 0.0, 1.0), bc="neumann", epsilon=1e-5, nx=32, ny=32,
                    dt=1e-5, T=2e-3, mean=0.0 if name == "ex3_spinodal" else 0.4, amplitude=0.005)
    if name == "ex4":
        p = EX4_POTENTIAL
        return dict(domain=(-0.5, 0.5, -0.5, 0.5), bc="neumann", epsilon=1.0, nx=16, ny=16, q=3,
                    mobility="u_one_minus_u", potential="logarithmic", theta=p.theta,
                    theta_c=p.theta_c, theta_linear=p.linear, dt=1e-7, T=0.2, mean=0.63,
                    amplitude=0.05, tau_points=4)
    raise ConfigError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def preset_config(name, **overrides):
    cfg = RunConfig(preset=name, **_preset_defaults(name))
    cfg = dataclasses.replace(cfg, **overrides)
    return cfg.validate()


_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*(pi)?\s*$")


def _parse_float(text):
    m = _NUM.match(text)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ValueError(f"not a number: {text!r}")
    val = float(m.group(1)) if m.group(1) is not None else 1.0
    return val * math.pi if m.group(2) else val


def _parse_int(text):
    return int(text.strip())


def _parse_optional(inner):
    def parse(text):
        return None if text.strip().lower() in ("", "none", "auto") else inner(text)
    return parse


def _parse_domain(text):
    parts = [p for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError("domain needs four comma-separated values x0,x1,y0,y1")
    return tuple(_parse_float(p) for p in parts)


def _parse_times(text):
    return tuple(_parse_float(p) for p in text.split(",") if p.strip())


_PARSERS = {
    "preset": str.strip,
    "domain": _parse_domain,
    "bc": str.strip,
    "nx": _parse_int,
    "ny": _parse_int,
    "q": _parse_int,
    "sigma": _parse_optional(_parse_float),
    "epsilon": _parse_float,
    "mobility": str.strip,
    "beta": _parse_float,
    "potential": str.strip,
    "theta": _parse_float,
    "theta_c": _parse_float,
    "theta_linear": _parse_float,
    "dt": _parse_optional(_parse_float),
    "T": _parse_float,
    "seed": _parse_int,
    "mean": _parse_float,
    "amplitude": _parse_float,
    "newton_tol": _parse_float,
    "newton_max_iter": _parse_int,
    "tau_points": _parse_int,
    "stride": _parse_int,
    "volume_degree": _parse_optional(_parse_int),
    "snapshot_times": _parse_times,
    "out_dir": _parse_optional(str.strip),
}

# keys that define an exact solution's setting and cannot be overridden
_LOCKED = {"ex1": ("domain", "bc"), "ex2": ("domain", "bc")}


def parse_config(text: str) -> RunConfig:
    """Parse ``key=value`` lines (``#`` starts a comment).

    Preset defaults are applied first, explicit keys override them.
    """
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        lines[key] = lineno

    preset = values.pop("preset", None)
    if preset is not None:
        if preset not in PRESET_NAMES:
            raise ConfigError(f"line {lines['preset']}: unknown preset {preset!r}")
        base = RunConfig(preset=preset, **_preset_defaults(preset))
        for key in _LOCKED.get(preset, ()):
            if key in values and values[key] != getattr(base, key):
                raise ConfigError(
                    f"line {lines[key]}: {key} conflicts with preset {preset} (fixed by its exact solution)"
                )
    else:
        base = RunConfig()
    cfg = dataclasses.replace(base, **values)
    try:
        return cfg.validate()
    except ConfigError as exc:
        key = next((k for k in lines if k in str(exc)), None)
        where = f"line {lines[key]}: " if key else ""
        raise ConfigError(f"{where}{exc}") from None


def serialize_config(cfg: RunConfig) -> str:
    out = []
    for f in dataclasses.fields(cfg):
        val = getattr(cfg, f.name)
        if val is None:
            continue
        if f.name in ("domain", "snapshot_times"):
            text = ",".join(repr(float(v)) for v in val)
        elif isinstance(val, float):
            text = repr(val)
        else:
            text = str(val)
        out.append(f"{f.name}={text}")
    return "\n".join(out) + "\n"
