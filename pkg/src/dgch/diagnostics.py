"""Discrete energy, mass, L2 errors and observed convergence orders."""
from dataclasses import dataclass, field

import numpy as np

from .model import PotentialSpec, potential_eval
from .quadrature import triangle_quadrature
from .space import DgSpace


@dataclass
class DiagnosticsSeries:
    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    newton_iters: list = field(default_factory=list)
    clamp_events: list = field(default_factory=list)

    def append(self, t, energy, mass, newton_iters=0, clamp_events=0):
        if self.times and not t > self.times[-1]:
            raise ValueError(f"diagnostic times must increase: {t} after {self.times[-1]}")
        self.times.append(float(t))
        self.energy.append(float(energy))
        self.mass.append(float(mass))
        self.newton_iters.append(int(newton_iters))
        self.clamp_events.append(int(clamp_events))

    def __len__(self):
        return len(self.times)

    def rows(self):
        return zip(self.times, self.energy, self.mass, self.newton_iters, self.clamp_events)


def energy_terms(space: DgSpace, xi, epsilon, potential: PotentialSpec = PotentialSpec()):
    """The four contributions to the DG Ginzburg-Landau energy.

    Returns a dict with ``gradient``, ``bulk``, ``consistency`` and
    ``penalty``; their sum is the discrete energy.
    """
    eps2 = epsilon**2
    wq = space.vol_rule.weights[None, :] * space.detJ[:, None]
    grad = space.volume_gradients(xi)
    uA, uB, dnA, dnB = space.edge_traces(xi)
    jump = uA - uB
    return {
        "gradient": 0.5 * eps2 * float(np.sum(wq * np.sum(grad * grad, axis=-1))),
        "bulk": float(np.sum(wq * potential_eval(potential, space.volume_values(xi)).F)),
        "consistency": -eps2 * float(np.sum(space.edge_w * 0.5 * (dnA + dnB) * jump)),
        "penalty": float(np.sum(space.edge_w * (0.5 * space.sigma * eps2 / space.edge_h)[:, None] * jump**2)),
    }


def discrete_energy(space: DgSpace, xi, epsilon, potential: PotentialSpec = PotentialSpec()):
    return sum(energy_terms(space, xi, epsilon, potential).values())


def total_mass(space: DgSpace, xi):
    wq = space.vol_rule.weights[None, :] * space.detJ[:, None]
    return float(np.sum(wq * space.volume_values(xi)))


def l2_error(space: DgSpace, xi, exact, t, degree=None):
    """||u_h - u(., ., t)||_L2 with a rule of degree 2q + 4 by default."""
    if exact is None:
        raise ValueError("no exact solution available for the L2 error")
    rule = triangle_quadrature(degree if degree is not None else 2 * space.q + 4)
    phi, x = space.tabulate(rule)
    uh = space.local(xi) @ phi.T
    diff = uh - exact(x[..., 0], x[..., 1], t)
    return float(np.sqrt(np.sum(rule.weights[None, :] * space.detJ[:, None] * diff**2)))


def convergence_order(errors, factor=2.0):
    """Observed orders log_factor(e_{k-1} / e_k) between successive errors."""
    e = np.asarray(errors, dtype=float)
    if len(e) < 2:
        raise ValueError("need at least two errors to compute an order")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError(f"errors must be positive and finite, got {errors}")
    return np.log(e[:-1] / e[1:]) / np.log(factor)
