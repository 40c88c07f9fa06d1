import mpmath as mp
import numpy as np
import pytest

from dgch.model import (
    EX4_POTENTIAL,
    PRESET_NAMES,
    MobilitySpec,
    PotentialSpec,
    make_preset,
    mobility_eval,
    potential_eval,
)
from dgch.config import preset_config


def test_double_well_examples():
    v = potential_eval(PotentialSpec(), np.array([0.0, 1.0]))
    assert np.allclose(v.F, [0.25, 0.0])
    assert np.allclose(v.f, [0.0, 0.0])
    assert np.allclose(v.df, [-1.0, 2.0])
    assert v.clamped == 0


def test_ex4_potential_is_symmetric_at_one_half():
    v = potential_eval(EX4_POTENTIAL, np.array([0.5]))
    assert v.f[0] == pytest.approx(0.0, abs=1e-9)
    # 3000 (u ln u + (1-u) ln(1-u)) + 9000 u (1-u) at u = 0.3
    u = 0.3
    ref = 3000 * (u * np.log(u) + (1 - u) * np.log(1 - u)) + 9000 * u * (1 - u)
    assert potential_eval(EX4_POTENTIAL, np.array([u])).F[0] == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("spec", [PotentialSpec(), EX4_POTENTIAL, PotentialSpec("quadratic", coefficient=3.0)])
def test_potential_derivatives_match_finite_differences(spec):
    u = np.array([0.2, 0.45, 0.7])
    h = 1e-6
    v = potential_eval(spec, u)
    vp, vm = potential_eval(spec, u + h), potential_eval(spec, u - h)
    scale = 1.0 + np.abs(v.f)
    assert np.all(np.abs((vp.F - vm.F) / (2 * h) - v.f) < 1e-6 * scale)
    scale = 1.0 + np.abs(v.df)
    assert np.all(np.abs((vp.f - vm.f) / (2 * h) - v.df) < 1e-6 * scale)
    assert np.all(np.abs((vp.df - vm.df) / (2 * h) - spec.d2f(u)) < 1e-5 * (1 + np.abs(spec.d2f(u))))


def test_logarithmic_clamping_is_counted():
    v = potential_eval(EX4_POTENTIAL, np.array([-0.1, 0.5, 1.0, 1.3]))
    assert v.clamped == 3
    assert np.all(np.isfinite(v.F)) and np.all(np.isfinite(v.f))


def test_invalid_potential():
    with pytest.raises(ValueError):
        PotentialSpec("quartic")
    with pytest.raises(ValueError):
        PotentialSpec("logarithmic", theta=2.0, theta_c=1.0)


def test_mobility_examples():
    assert mobility_eval(MobilitySpec("one_minus_u_sq"), 0.0) == 1.0
    assert mobility_eval(MobilitySpec("u_one_minus_u"), 0.5) == 0.25
    assert mobility_eval(MobilitySpec("one_minus_u_sq"), 1.2) == 0.0
    assert mobility_eval(MobilitySpec("u_one_minus_u", beta=2.0), -0.5) == 0.0
    assert np.all(mobility_eval(MobilitySpec(beta=3.0), np.zeros(4)) == 3.0)
    with pytest.raises(ValueError):
        MobilitySpec("constant", beta=0.0)
    with pytest.raises(ValueError):
        MobilitySpec("linear")


def _mp_source(preset, x, y, t):
    """g = u_t - div(mu(u) grad(-eps^2 Lap u + f(u))) by nested central differences."""
    mp.mp.dps = 40
    sol = preset.exact_solution
    eps2 = mp.mpf(preset.epsilon) ** 2
    pi = mp.pi
    if preset.name == "ex1":
        u = lambda x, y, t: mp.exp(mp.cos(t)) * mp.cos(pi * x) * mp.cos(pi * y)  # noqa: E731
        mu = lambda v: 1  # noqa: E731
    else:
        u = lambda x, y, t: mp.exp(-2 * t) * mp.sin(x) * mp.sin(y)  # noqa: E731
        mu = lambda v: 1 - v * v  # noqa: E731
    h = mp.mpf("1e-8")

    def lap(fn, x, y):
        return (fn(x + h, y) + fn(x - h, y) + fn(x, y + h) + fn(x, y - h) - 4 * fn(x, y)) / h**2

    def w(x, y):
        uu = u(x, y, t)
        return -eps2 * lap(lambda a, b: u(a, b, t), x, y) + uu**3 - uu

    H = mp.mpf("1e-4")

    def flux_div(x, y):
        def fx(a, b):
            return mu(u(a, b, t)) * (w(a + H / 2, b) - w(a - H / 2, b)) / H

        def fy(a, b):
            return mu(u(a, b, t)) * (w(a, b + H / 2) - w(a, b - H / 2)) / H

        return (fx(x + H / 2, y) - fx(x - H / 2, y)) / H + (fy(x, y + H / 2) - fy(x, y - H / 2)) / H

    ut = (u(x, y, t + h) - u(x, y, t - h)) / (2 * h)
    del sol
    return float(ut - flux_div(mp.mpf(x), mp.mpf(y)))


@pytest.mark.parametrize("name", ["ex1", "ex2"])
def test_manufactured_source_matches_independent_differences(name):
    preset = make_preset(name)
    pts = [(0.31, -0.47, 0.2), (0.83, 0.12, 0.7)] if name == "ex1" else [(1.1, 2.3, 0.3), (4.0, 0.6, 0.05)]
    for x, y, t in pts:
        g = preset.source(np.array(x), np.array(y), t)
        ref = _mp_source(preset, x, y, t)
        # the O(H^2) flux differences dominate; the gap is well below 1e-6 relative
        assert abs(g - ref) <= 1e-6 * (1 + abs(ref))


def test_chemical_potential_ex1():
    p = make_preset("ex1")
    x, y, t = 0.2, 0.4, 0.5
    u = p.exact_solution(x, y, t)
    assert p.chemical_potential(x, y, t) == pytest.approx(0.1 * 2 * np.pi**2 * u + u**3 - u, rel=1e-13)


def test_sourceless_presets_refuse_source():
    with pytest.raises(ValueError, match="no exact solution"):
        make_preset("ex3_spinodal").source(0.0, 0.0, 0.0)


def test_preset_parameters():
    assert make_preset("ex1").epsilon ** 2 == pytest.approx(0.1)
    ex2 = make_preset("ex2")
    assert ex2.bc_kind == "periodic" and ex2.mobility.kind == "one_minus_u_sq" and ex2.epsilon == 1.0
    assert make_preset("ex3_spinodal").initial_condition.mean == 0.0
    assert make_preset("ex3_nucleation").initial_condition.mean == 0.4
    ex4 = make_preset("ex4")
    assert ex4.mobility.kind == "u_one_minus_u" and ex4.potential.kind == "logarithmic"
    assert ex4.domain == (-0.5, 0.5, -0.5, 0.5)
    with pytest.raises(ValueError):
        make_preset("ex5")
    assert set(PRESET_NAMES) == {"ex1", "ex2", "ex3_spinodal", "ex3_nucleation", "ex4"}


def test_random_initial_state_is_reproducible():
    from dgch.solver import AVFSolver

    cfg = preset_config("ex3_spinodal", nx=4, ny=4, seed=7)
    a = AVFSolver(cfg.space(), cfg.problem()).initialize_state().xi
    b = AVFSolver(cfg.space(), cfg.problem()).initialize_state().xi
    c = AVFSolver(cfg.space(), preset_config("ex3_spinodal", nx=4, ny=4, seed=8).problem()).initialize_state().xi
    assert a.tobytes() == b.tobytes()
    assert a.tobytes() != c.tobytes()
