"""Average-vector-field time stepping of the SIPG Cahn-Hilliard system.

Each step solves, for eta = (xi, zeta),

    R1 = M (xi1 - xi0) + dt/2 A_mu (zeta1 + zeta0) - dt * load
    R2 = 1/2 A_eps (xi1 + xi0) - 1/2 M (zeta1 + zeta0) + int_0^1 b(tau xi1 + (1 - tau) xi0) dtau

by Newton's method on the full block Jacobian, with the mobility frozen at
the previous time level.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (
    CoefficientField,
    assemble_avf_nonlinear,
    assemble_load,
    assemble_mass,
    assemble_nonlinear,
    assemble_stiffness,
    gauss_tau,
)
from .diagnostics import DiagnosticsSeries, discrete_energy, total_mass
from .model import ProblemPreset, RandomInitial
from .space import DgSpace, project_l2

log = logging.getLogger(__name__)


class StepFailure(RuntimeError):
    def __init__(self, message, time=None, iteration=None, residual=None):
        super().__init__(f"{message} (t={time}, iteration={iteration}, residual={residual})")
        self.time = time
        self.iteration = iteration
        self.residual = residual


@dataclass
class StateVector:
    xi: np.ndarray
    zeta: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.xi.shape != self.zeta.shape:
            raise ValueError(f"xi and zeta differ in shape: {self.xi.shape} vs {self.zeta.shape}")
        if not (np.all(np.isfinite(self.xi)) and np.all(np.isfinite(self.zeta))):
            raise ValueError(f"non-finite state at t={self.t}")


@dataclass(frozen=True)
class NewtonSettings:
    tol: float = 1e-10
    max_iter: int = 50
    tau_points: int = 2
    reuse_factorization: bool = True

    def __post_init__(self):
        if not self.tol > 0 or self.max_iter < 1 or self.tau_points not in (2, 3, 4, 5):
            raise ValueError(f"invalid Newton settings {self}")


@dataclass
class StepInfo:
    iterations: int
    residuals: list
    clamped: int


class AVFSolver:
    """Fully discrete SIPG/AVF integrator for one problem on one DG space."""

    def __init__(self, space: DgSpace, problem: ProblemPreset, settings: NewtonSettings = NewtonSettings()):
        self.space = space
        self.problem = problem
        self.settings = settings
        self.M = assemble_mass(space)
        self.M_diag = self.M.diagonal()
        self.A_eps = assemble_stiffness(space, problem.epsilon**2)
        self._A_const = None
        self.linear_solver = JacobianSolver() if settings.reuse_factorization else None
        if problem.mobility.is_constant:
            self._A_const = assemble_stiffness(space, problem.mobility.beta)
        self.last_info = None

    # -- pieces ---------------------------------------------------------------

    def mobility_matrix(self, xi):
        if self._A_const is not None:
            return self._A_const
        return assemble_stiffness(self.space, CoefficientField.lagged(xi, self.problem.mobility))

    def averaged_load(self, t, dt):
        """Time average of the load over [t, t + dt] with the tau rule."""
        if not self.problem.has_source:
            return None
        taus, ws = gauss_tau(self.settings.tau_points)
        return sum(w * assemble_load(self.space, self.problem.source, t + tau * dt) for tau, w in zip(taus, ws))

    def initialize_state(self):
        """L2-projected u0 and the consistent chemical potential M zeta0 = A_eps xi0 + b(xi0)."""
        space, prob = self.space, self.problem
        init = prob.initial_condition
        if isinstance(init, RandomInitial):
            xi = space.constant(init.mean)
            rng = np.random.default_rng(init.seed)
            r = rng.uniform(-init.amplitude, init.amplitude, size=space.N)
            xi = xi.reshape(space.N, space.n_q)
            xi[:, 0] += r * (space.constant(1.0)[0])
            xi = xi.ravel()
        elif init is None:
            xi = np.zeros(space.ndof)
        else:
            xi = project_l2(space, init)
        zeta = (self.A_eps @ xi + assemble_nonlinear(space, xi, prob.potential)) / self.M_diag
        return StateVector(xi, zeta, 0.0)

    def residual(self, state, xi1, zeta1, A_mu, dt, load=None):
        xi0, zeta0 = state.xi, state.zeta
        b_avg, _, _ = assemble_avf_nonlinear(self.space, xi0, xi1, self.problem.potential, self.settings.tau_points)
        R1 = self.M @ (xi1 - xi0) + 0.5 * dt * (A_mu @ (zeta1 + zeta0))
        if load is not None:
            R1 -= dt * load
        R2 = 0.5 * (self.A_eps @ (xi1 + xi0)) - 0.5 * (self.M @ (zeta1 + zeta0)) + b_avg
        return R1, R2

    def jacobian(self, state, xi1, A_mu, dt):
        _, J_b, _ = assemble_avf_nonlinear(self.space, state.xi, xi1, self.problem.potential, self.settings.tau_points)
        return self._block_jacobian(A_mu, J_b, dt)

    def _block_jacobian(self, A_mu, J_b, dt):
        return sp.bmat(
            [[self.M, 0.5 * dt * A_mu], [0.5 * self.A_eps + J_b, -0.5 * self.M]], format="csc"
        )

    # -- Newton / stepping ----------------------------------------------------

    def newton_solve(self, state: StateVector, dt, A_mu=None, load=None):
        """Solve the AVF residual for the next state, starting from ``state``."""
        if A_mu is None:
            A_mu = self.mobility_matrix(state.xi)
        n = self.space.ndof
        xi1, zeta1 = state.xi.copy(), state.zeta.copy()
        pot, taus = self.problem.potential, self.settings.tau_points
        residuals = []
        clamped = 0
        t_new = state.t + dt
        for k in range(self.settings.max_iter + 1):
            b_avg, J_b, c = assemble_avf_nonlinear(self.space, state.xi, xi1, pot, taus)
            clamped += c
            R1 = self.M @ (xi1 - state.xi) + 0.5 * dt * (A_mu @ (zeta1 + state.zeta))
            if load is not None:
                R1 -= dt * load
            R2 = 0.5 * (self.A_eps @ (xi1 + state.xi)) - 0.5 * (self.M @ (zeta1 + state.zeta)) + b_avg
            R = np.concatenate([R1, R2])
            rnorm = float(np.max(np.abs(R)))
            residuals.append(rnorm)
            if not math.isfinite(rnorm):
                raise StepFailure("non-finite Newton residual", t_new, k, rnorm)
            if rnorm < self.settings.tol:
                self.last_info = StepInfo(k, residuals, clamped)
                return StateVector(xi1, zeta1, t_new)
            if k == self.settings.max_iter:
                break
            J = self._block_jacobian(A_mu, J_b, dt)
            try:
                s = self.linear_solver.solve(J, -R) if self.linear_solver else newton_step(J, R)
            except RuntimeError as exc:
                raise StepFailure(f"Jacobian factorization failed: {exc}", t_new, k, rnorm) from exc
            xi1 = xi1 + s[:n]
            zeta1 = zeta1 + s[n:]
        raise StepFailure(
            f"Newton did not converge in {self.settings.max_iter} iterations", t_new, k, residuals[-1]
        )

    def step(self, state: StateVector, dt):
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")
        A_mu = self.mobility_matrix(state.xi)
        load = self.averaged_load(state.t, dt)
        return self.newton_solve(state, dt, A_mu, load)

    def energy(self, xi):
        return discrete_energy(self.space, xi, self.problem.epsilon, self.problem.potential)

    def mass(self, xi):
        return total_mass(self.space, xi)


def _factorize(J):
    # Both diagonal blocks are +-M, so diagonal pivots on a symmetric ordering
    # keep the fill low; any off-diagonal pivoting wrecks that ordering.  A
    # zero or unusable diagonal pivot falls back to partial pivoting.
    J = sp.csc_matrix(J)
    try:
        lu = spla.splu(J, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options=dict(SymmetricMode=True))
        if np.all(np.isfinite(lu.U.diagonal())):
            return lu
    except RuntimeError:
        pass
    try:
        return spla.splu(J, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise RuntimeError(f"sparse LU failed: {exc}") from exc


def newton_step(J, R):
    """Increment s solving J s = -R by sparse LU."""
    s = _factorize(J).solve(-np.asarray(R))
    if not np.all(np.isfinite(s)):
        raise RuntimeError("singular or ill-conditioned Jacobian")
    return s


class JacobianSolver:
    """Solves J s = b, reusing one LU factorization as a GMRES preconditioner.

    The factorization is refreshed whenever preconditioned GMRES fails to
    reach ``rtol`` within ``restart`` iterations, so every returned increment
    solves the current Jacobian system to ``rtol`` relative accuracy.
    """

    def __init__(self, rtol=1e-12, restart=25):
        self.rtol = rtol
        self.restart = restart
        self.lu = None
        self.factorizations = 0

    def solve(self, J, b):
        b = np.asarray(b, dtype=float)
        if self.lu is not None:
            lu = self.lu
            pre = spla.LinearOperator(J.shape, matvec=lu.solve, dtype=float)
            x, info = spla.gmres(
                J, b, x0=lu.solve(b), M=pre, rtol=self.rtol, atol=0.0,
                restart=self.restart, maxiter=1,
            )
            if info == 0 and np.all(np.isfinite(x)):
                return x
        self.lu = _factorize(J)
        self.factorizations += 1
        x = self.lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise RuntimeError("singular or ill-conditioned Jacobian")
        return x


def avf_ode_step(grad, y0, dt, tau_points=5, tol=1e-14, max_iter=50, hess=None):
    """One AVF step for y' = -grad U(y) on a small dense system.

    ``hess`` defaults to a central-difference Jacobian of ``grad``.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    taus, ws = gauss_tau(tau_points)

    def jac_grad(y):
        if hess is not None:
            return np.atleast_2d(hess(y))
        h = 1e-7 * (1.0 + np.abs(y))
        cols = []
        for i in range(len(y)):
            e = np.zeros_like(y)
            e[i] = h[i]
            cols.append((np.atleast_1d(grad(y + e)) - np.atleast_1d(grad(y - e))) / (2 * h[i]))
        return np.column_stack(cols)

    y = y0.copy()
    for _ in range(max_iter):
        ys = [tau * y + (1 - tau) * y0 for tau in taus]
        R = y - y0 + dt * sum(w * np.atleast_1d(grad(v)) for w, v in zip(ws, ys))
        if np.max(np.abs(R)) < tol:
            break
        J = np.eye(len(y)) + dt * sum(w * tau * jac_grad(v) for w, tau, v in zip(ws, taus, ys))
        y = y - np.linalg.solve(J, R)
    return y


@dataclass
class RunResult:
    state: StateVector
    series: DiagnosticsSeries
    snapshots: list = field(default_factory=list)
    error: StepFailure | None = None


def run(config, on_snapshot=None, raise_on_failure=True) -> RunResult:
    """Integrate ``config`` from t = 0 to T on a uniform partition.

    Diagnostics are recorded at t = 0, every ``stride`` steps and at the final
    step.  ``on_snapshot(t, space, xi)`` is called at the requested snapshot
    times (and the result keeps ``(t, xi)`` copies).
    """
    space = config.space()
    solver = AVFSolver(
        space,
        config.problem(),
        NewtonSettings(config.newton_tol, config.newton_max_iter, config.tau_points),
    )
    n_steps, dt = config.step_plan()
    state = solver.initialize_state()
    series = DiagnosticsSeries()
    series.append(0.0, solver.energy(state.xi), solver.mass(state.xi))
    result = RunResult(state, series)
    pending = sorted(config.snapshot_times)

    def snapshot(st):
        while pending and pending[0] <= st.t + 0.5 * dt:
            pending.pop(0)
            result.snapshots.append((st.t, st.xi.copy()))
            if on_snapshot is not None:
                on_snapshot(st.t, space, st.xi)

    snapshot(state)
    log.info("running %s: %d steps of dt=%g, %d dofs", config.preset or "custom", n_steps, dt, space.ndof)
    for k in range(1, n_steps + 1):
        try:
            new = solver.step(state, dt)
        except StepFailure as exc:
            result.error = exc
            if raise_on_failure:
                raise
            return result
        new.t = k * dt
        state = result.state = new
        info = solver.last_info
        if k % config.stride == 0 or k == n_steps:
            series.append(state.t, solver.energy(state.xi), solver.mass(state.xi), info.iterations, info.clamped)
        snapshot(state)
    return result
