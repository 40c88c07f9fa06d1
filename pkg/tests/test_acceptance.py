"""Exit criteria of the build; each prints one PASS/FAIL line in the summary."""
import numpy as np
import pytest
import scipy.sparse as sp

from dgch.assembly import CoefficientField, assemble_stiffness
from dgch.config import preset_config
from dgch.diagnostics import convergence_order
from dgch.io import write_diagnostics_csv
from dgch.mesh import build_rect_mesh
from dgch.model import MobilitySpec, PotentialSpec, ProblemPreset
from dgch.runner import convergence_study
from dgch.solver import AVFSolver, NewtonSettings, StateVector, run
from dgch.space import DgSpace, project_l2


def _ladder(name, q):
    rows = convergence_study(preset_config(name, nx=2, ny=2, q=q), levels=4)
    errors = [r[2] for r in rows]
    return errors, rows[-1][3]


def _fmt_errors(errors):
    return "/".join(f"{e:.3g}" for e in errors)


@pytest.mark.slow
@pytest.mark.acceptance(1, "ex1 convergence, constant mobility")
def test_ex1_convergence(request):
    e1, o1 = _ladder("ex1", 1)
    e2, o2 = _ladder("ex1", 2)
    request.node.acceptance_detail = (
        f"q=1 order {o1:.2f} (>= 1.8), q=2 order {o2:.2f} (>= 2.7); "
        f"errors q=1 {_fmt_errors(e1)}, q=2 {_fmt_errors(e2)}"
    )
    assert all(a > b for a, b in zip(e1, e1[1:])) and all(a > b for a, b in zip(e2, e2[1:]))
    assert o1 >= 1.8 and o2 >= 2.7


@pytest.mark.slow
@pytest.mark.acceptance(2, "ex2 convergence, degenerate mobility")
def test_ex2_convergence(request):
    e1, o1 = _ladder("ex2", 1)
    e2, o2 = _ladder("ex2", 2)
    request.node.acceptance_detail = (
        f"q=1 order {o1:.2f} in [1.4, 2.1], q=2 order {o2:.2f} in [1.6, 3.0]; "
        f"errors q=1 {_fmt_errors(e1)}, q=2 {_fmt_errors(e2)}"
    )
    assert 1.4 <= o1 <= 2.1
    assert 1.6 <= o2 <= 3.0


# desk-scale settings: epsilon is scaled up so interfaces are resolved on the mesh
ENERGY_RUNS = {
    "ex3_spinodal": dict(nx=32, ny=32, epsilon=0.03, dt=1e-4, T=0.02),
    "ex3_nucleation": dict(nx=32, ny=32, epsilon=0.03, dt=1e-4, T=0.02),
    "ex4": dict(nx=8, ny=8, epsilon=10.0, dt=1e-6, T=2e-4),
}


@pytest.fixture(scope="module")
def energy_runs():
    return {name: run(preset_config(name, **kw)).series for name, kw in ENERGY_RUNS.items()}


@pytest.mark.slow
@pytest.mark.acceptance(3, "energy is non-increasing (ex3 spinodal, ex3 nucleation, ex4)")
def test_energy_stability(request, energy_runs):
    parts, violations = [], 0
    for name, series in energy_runs.items():
        E = np.array(series.energy)
        tol = 1e-9 * max(1.0, abs(E[0]))
        bad = int(np.count_nonzero(np.diff(E) > tol))
        violations += bad
        parts.append(f"{name}: {len(E) - 1} steps, {bad} violations, E {E[0]:.4g} -> {E[-1]:.4g}")
    request.node.acceptance_detail = "; ".join(parts)
    assert all(len(s) - 1 >= 200 for s in energy_runs.values())
    assert violations == 0


@pytest.mark.slow
@pytest.mark.acceptance(4, "mass conservation in source-free runs")
def test_mass_conservation(request, energy_runs):
    parts, ok = [], True
    for name, series in energy_runs.items():
        m = np.array(series.mass)
        drift = float(np.max(np.abs(m - m[0])))
        bound = 1e-10 * (abs(m[0]) + 1.0)
        ok &= drift <= bound
        parts.append(f"{name}: drift {drift:.2e} <= {bound:.2e}")
    request.node.acceptance_detail = "; ".join(parts)
    assert ok


@pytest.mark.acceptance(5, "AVF step equals implicit midpoint for a quadratic potential")
def test_avf_equals_midpoint(request):
    space = DgSpace(build_rect_mesh((0.0, 1.0, 0.0, 1.0), 4, 4), 2)
    problem = ProblemPreset(
        "quadratic", 0.3, (0.0, 1.0, 0.0, 1.0), "neumann",
        potential=PotentialSpec("quadratic", coefficient=-0.7),
        initial_condition=lambda x, y: np.cos(np.pi * x) * np.sin(2 * y),
    )
    solver = AVFSolver(space, problem, NewtonSettings(tol=1e-12))
    state = solver.initialize_state()
    dt = 0.05
    new = solver.step(state, dt)

    # independent dense midpoint rule for  M xi' = -A (M^-1 (A_eps + c M)) xi
    M = np.diag(solver.M_diag)
    A = assemble_stiffness(space, 1.0).toarray()
    A_eps = assemble_stiffness(space, 0.09).toarray()
    G = A @ np.linalg.solve(M, A_eps - 0.7 * M)
    ref = np.linalg.solve(M + 0.5 * dt * G, (M - 0.5 * dt * G) @ state.xi)
    err = float(np.max(np.abs(new.xi - ref)))
    request.node.acceptance_detail = f"max |AVF - midpoint| = {err:.2e} (<= 1e-9)"
    assert err <= 1e-9


@pytest.mark.acceptance(6, "Newton Jacobian matches central differences of the residual")
def test_jacobian_matches_differences(request):
    space = DgSpace(build_rect_mesh((0.0, 1.0, 0.0, 1.0), 1, 1), 2)
    assert space.N == 2
    problem = ProblemPreset(
        "fd", 0.4, (0.0, 1.0, 0.0, 1.0), "neumann",
        mobility=MobilitySpec("one_minus_u_sq"),
        initial_condition=lambda x, y: 0.5 * np.cos(np.pi * x) + 0.2 * y,
    )
    solver = AVFSolver(space, problem)
    state = solver.initialize_state()
    rng = np.random.default_rng(11)
    n = space.ndof
    xi1 = state.xi + 0.2 * rng.standard_normal(n)
    zeta1 = state.zeta + 0.2 * rng.standard_normal(n)
    dt = 0.1
    A_mu = solver.mobility_matrix(state.xi)
    J = solver.jacobian(state, xi1, A_mu, dt).toarray()
    h = 1e-6
    worst = 0.0
    for j in range(2 * n):
        e = np.zeros(2 * n)
        e[j] = h
        Rp = np.concatenate(solver.residual(state, xi1 + e[:n], zeta1 + e[n:], A_mu, dt))
        Rm = np.concatenate(solver.residual(state, xi1 - e[:n], zeta1 - e[n:], A_mu, dt))
        fd = (Rp - Rm) / (2 * h)
        worst = max(worst, np.linalg.norm(fd - J[:, j]) / np.linalg.norm(J[:, j]))
    request.node.acceptance_detail = f"worst column relative error {worst:.2e} (<= 1e-6)"
    assert worst <= 1e-6


@pytest.mark.acceptance(7, "SIPG operator is symmetric, PSD and annihilates constants")
def test_operator_properties(request):
    rng = np.random.default_rng(3)
    worst_sym, worst_const, min_quad = 0.0, 0.0, np.inf
    for domain, bc in (((0.0, 1.0, 0.0, 1.0), "neumann"), ((0.0, 2 * np.pi, 0.0, 2 * np.pi), "periodic")):
        for q in (1, 2, 3):
            space = DgSpace(build_rect_mesh(domain, 4, 4, bc), q)
            u = project_l2(space, lambda x, y: 0.9 * np.sin(x) * np.cos(2 * y))
            for coef in (1.0, CoefficientField.lagged(u, MobilitySpec("one_minus_u_sq"))):
                A = assemble_stiffness(space, coef)
                scale = sp.linalg.norm(A, np.inf)
                worst_sym = max(worst_sym, sp.linalg.norm(A - A.T, np.inf) / scale)
                worst_const = max(worst_const, np.max(np.abs(A @ space.constant(1.0))) / scale)
                X = rng.standard_normal((space.ndof, 100))
                min_quad = min(min_quad, float(np.min(np.einsum("ij,ij->j", X, A @ X))))
    request.node.acceptance_detail = (
        f"asymmetry {worst_sym:.1e}, |A 1| {worst_const:.1e} (<= 1e-12), min v^T A v {min_quad:.3g} (>= 0)"
    )
    assert worst_sym <= 1e-12 and worst_const <= 1e-12 and min_quad >= 0.0


@pytest.mark.slow
@pytest.mark.acceptance(8, "second order in time on ex1")
def test_temporal_order(request):
    # The projected initial data carries stiff high-frequency content that the
    # midpoint-type AVF map (amplification -> -1) never damps at practical
    # steps, which masks the rate.  A warm-up with a tiny step removes that
    # transient; the step sizes are then compared from the same smooth state.
    cfg = preset_config("ex1", nx=8, ny=8, q=2)
    solver = AVFSolver(cfg.space(), cfg.problem(), NewtonSettings(tol=1e-12))
    state = solver.initialize_state()
    t0, warm_steps = 0.05, 2500
    for k in range(warm_steps):
        state = solver.step(state, t0 / warm_steps)
        state.t = (k + 1) * t0 / warm_steps

    def final(dt, span=0.4):
        st = StateVector(state.xi.copy(), state.zeta.copy(), t0)
        for k in range(round(span / dt)):
            st = solver.step(st, dt)
            st.t = t0 + (k + 1) * dt
        return st.xi

    ref = final(0.01 / 16)
    w = np.repeat(solver.space.detJ, solver.space.n_q)
    errors = [float(np.sqrt(np.sum(w * (final(dt) - ref) ** 2))) for dt in (0.04, 0.02, 0.01)]
    orders = convergence_order(errors)
    request.node.acceptance_detail = (
        f"errors {_fmt_errors(errors)}, orders {', '.join(f'{o:.2f}' for o in orders)} (2.0 +- 0.3)"
    )
    assert np.all(np.abs(orders - 2.0) <= 0.3)


@pytest.mark.acceptance(9, "identical config and seed give bitwise identical diagnostics")
def test_determinism(request, tmp_path):
    cfg = preset_config("ex3_spinodal", nx=8, ny=8, epsilon=0.05, dt=1e-4, T=2e-3, seed=42)
    a = write_diagnostics_csv(run(cfg).series, tmp_path / "a.csv").read_bytes()
    b = write_diagnostics_csv(run(cfg).series, tmp_path / "b.csv").read_bytes()
    request.node.acceptance_detail = f"{len(a)} bytes, identical={a == b}"
    assert a == b
