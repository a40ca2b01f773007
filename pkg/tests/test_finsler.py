import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import magflow.algebra as al
from magflow.finsler import (ConnectOptions, RandersMetric,
                             SubcriticalEnergyError, _matrix_objective,
                             action_gap, check_equivalence_bounds,
                             connect_at_energy, finsler_energy, finsler_eval,
                             finsler_length, fundamental_tensor,
                             geodesic_residual, minimize_finsler_energy,
                             reparametrize_to_speed)
from magflow.flow import integrate_magnetic, magnetic_exp
from magflow.magnetics import (InertiaOperator, MagneticSystem, dual_norm,
                               mane_critical_value, metric_norm)


def _so3_system(strength=0.3):
    return MagneticSystem(al.so3(), InertiaOperator.identity(3),
                          strength * np.eye(3)[2])


def _heis_system():
    return MagneticSystem(al.heisenberg3(), InertiaOperator.identity(3),
                          np.eye(3)[0] + np.eye(3)[2])


def test_subcritical_energy_rejected():
    sys = _heis_system()
    c, _ = mane_critical_value(sys)
    with pytest.raises(SubcriticalEnergyError):
        RandersMetric(sys, 0.5 * c)
    with pytest.raises(SubcriticalEnergyError):
        connect_at_energy(sys, 0.5 * c, al.identity(sys.algebra),
                          al.group_exp(np.array([0.1, 0.0, 0.0]),
                                       sys.algebra))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.01, 50.0))
def test_finsler_positive_homogeneity(seed, lam):
    F = RandersMetric(_so3_system(), 1.0)
    v = np.random.default_rng(seed).standard_normal(3)
    lhs = finsler_eval(F, lam * v)
    rhs = lam * finsler_eval(F, v)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_finsler_subadditivity_and_positivity(seed):
    F = RandersMetric(_so3_system(), 1.0)
    rng = np.random.default_rng(seed)
    v, w = rng.standard_normal((2, 3))
    assert finsler_eval(F, v) > 0.0
    assert finsler_eval(F, v + w) <= (finsler_eval(F, v)
                                      + finsler_eval(F, w) + 1e-10)


def test_randers_uses_the_optimal_primitive():
    sys = _heis_system()
    F = RandersMetric(sys, 2.0)
    assert np.max(np.abs(F.alpha_opt - np.eye(3)[2])) <= 1e-10
    assert abs(F.critical_value - 0.5) <= 1e-12


def test_equivalence_bounds_report():
    F = RandersMetric(_so3_system(), 1.0)
    rep = check_equivalence_bounds(F, 2000, seed=1)
    assert rep["violations"] == 0
    a = dual_norm(F.sys.A, F.alpha_opt)
    assert abs(rep["C1"] - (F.sqrt_2k - a)) <= 1e-14
    assert abs(rep["C2"] - (F.sqrt_2k + a)) <= 1e-14


def test_fundamental_tensor_symmetric_positive_and_riemannian_limit():
    A = InertiaOperator(np.diag([1.0, 2.0, 3.0]))
    sys = MagneticSystem(al.so3(), A, np.array([0.4, -0.2, 0.5]))
    F = RandersMetric(sys, 1.5)
    rng = np.random.default_rng(5)
    for _ in range(30):
        g = fundamental_tensor(F, rng.standard_normal(3))
        assert np.max(np.abs(g - g.T)) <= 1e-10
        assert np.linalg.eigvalsh(g)[0] > 0.0
    # with alpha = 0 and kappa = 1/2, (1/2) F^2 = (1/2)|v|_A^2 exactly
    F0 = RandersMetric(MagneticSystem(al.so3(), A, np.zeros(3)), 0.5)
    g0 = fundamental_tensor(F0, np.array([0.2, 0.9, -0.4]))
    assert np.max(np.abs(g0 - A.matrix)) <= 1e-6
    with pytest.raises(ValueError):
        fundamental_tensor(F, np.zeros(3))


def test_action_gap_identity():
    sys = _so3_system()
    kappa = 1.2
    rng = np.random.default_rng(7)
    xis = rng.standard_normal((12, 3))
    speed = math.sqrt(2.0 * kappa)
    const = np.array([speed * x / metric_norm(sys.A, x) for x in xis])
    _, _, gap = action_gap(sys, kappa, al.ControlPath(const, 1.0 / 12))
    assert abs(gap) <= 1e-12
    _, _, gap2 = action_gap(sys, kappa, al.ControlPath(xis, 1.0 / 12))
    assert gap2 > 0.0
    F = RandersMetric(sys, kappa)
    path = al.ControlPath(xis, 1.0 / 12)
    assert finsler_length(F, path) <= math.sqrt(finsler_energy(F, path))


def test_objective_gradient_matches_finite_differences():
    sys = _so3_system()
    F = RandersMetric(sys, 1.5)
    n = 6
    rng = np.random.default_rng(11)
    x = rng.standard_normal(3 * n)
    g0 = np.eye(3)
    target = al.group_exp(np.array([0.3, -0.2, 0.4]), sys.algebra).rep
    lam = rng.standard_normal((3, 3)) * 0.1
    val, grad = _matrix_objective(x, F, 1.0 / n, g0, target, 50.0, lam)
    h = 1e-6
    for idx in rng.choice(3 * n, size=6, replace=False):
        e = np.zeros(3 * n)
        e[idx] = h
        vp = _matrix_objective(x + e, F, 1.0 / n, g0, target, 50.0, lam)[0]
        vm = _matrix_objective(x - e, F, 1.0 / n, g0, target, 50.0, lam)[0]
        fd = (vp - vm) / (2 * h)
        assert abs(fd - grad[idx]) <= 1e-5 * max(1.0, abs(fd))


def test_reparametrize_preserves_endpoint_exactly():
    sys = _so3_system()
    rng = np.random.default_rng(13)
    xis = rng.standard_normal((10, 3))
    path = al.ControlPath(xis, 0.1)
    end = al.evolve(path, sys.algebra)
    eta, times = reparametrize_to_speed(sys, path, 2.0)
    durations = np.diff(times)
    m = np.eye(3)
    for xi, d in zip(eta, durations):
        m = al.group_exp(d * xi, sys.algebra).rep @ m
    assert np.max(np.abs(m - end.rep)) <= 1e-12
    speeds = [metric_norm(sys.A, x) for x in eta]
    assert np.max(np.abs(np.array(speeds) - 2.0)) <= 1e-12


def test_connect_recovers_forward_flow_on_so3():
    sys = _so3_system()
    kappa = 2.0
    u0 = np.array([1.0, -0.6, 0.9])
    u0 *= math.sqrt(2 * kappa) / np.linalg.norm(u0)
    target = magnetic_exp(sys, al.identity(sys.algebra), u0)
    traj, rep = connect_at_energy(sys, kappa, al.identity(sys.algebra),
                                  target, n_steps=64)
    assert rep["endpoint_error"] <= 1e-6
    assert rep["residual"] <= 1e-4
    assert np.max(np.abs(traj.energies - kappa)) <= 1e-12
    ref = integrate_magnetic(sys, u0, T=float(traj.times[-1]) + 1e-3,
                             dt=1e-3)
    uref = np.stack([np.interp(traj.times, ref.times, ref.velocities[:, i])
                     for i in range(3)], axis=1)
    assert np.max(np.abs(uref - traj.velocities)) <= 1e-3


def test_connect_degenerate_endpoints():
    sys = _heis_system()
    e = al.identity(sys.algebra)
    traj, rep = connect_at_energy(sys, 2.0, e, e)
    assert rep["degenerate"] and rep["endpoint_error"] == 0.0
    assert np.max(np.abs(traj.velocities)) == 0.0


def test_minimizer_invariant_under_primitive_shift():
    # alpha and alpha + beta (beta annihilating the derived subalgebra)
    # induce the same magnetic form, hence the same connecting geodesic
    alg = al.heisenberg3()
    A = InertiaOperator.identity(3)
    sys1 = MagneticSystem(alg, A, np.eye(3)[0] + np.eye(3)[2])
    sys2 = MagneticSystem(alg, A, np.eye(3)[2])
    target = al.group_exp(np.array([0.4, -0.3, 0.2]), alg)
    opts = ConnectOptions(n_steps=32, stop_on_first=True)
    t1, _ = connect_at_energy(sys1, 2.0, al.identity(alg), target, opts=opts)
    t2, _ = connect_at_energy(sys2, 2.0, al.identity(alg), target, opts=opts)
    assert np.max(np.abs(t1.velocities - t2.velocities)) <= 1e-4


def test_minimizer_residual_decreases_with_resolution():
    sys = _heis_system()
    target = al.group_exp(np.array([0.5, 0.4, -0.3]), sys.algebra)
    opts_c = ConnectOptions(n_steps=32, stop_on_first=True)
    opts_f = ConnectOptions(n_steps=128, stop_on_first=True)
    _, rc = connect_at_energy(sys, 2.0, al.identity(sys.algebra), target,
                              opts=opts_c)
    _, rf = connect_at_energy(sys, 2.0, al.identity(sys.algebra), target,
                              opts=opts_f)
    assert rf["residual"] < rc["residual"]


def test_minimizer_reports_are_deterministic():
    sys = _so3_system()
    F = RandersMetric(sys, 1.5)
    target = al.group_exp(np.array([0.3, 0.2, -0.4]), sys.algebra)
    opts = ConnectOptions(n_steps=16, n_starts=3)
    runs = [minimize_finsler_energy(F, al.identity(sys.algebra), target,
                                    opts=opts) for _ in range(2)]
    (p1, _, r1), (p2, _, r2) = runs
    assert np.array_equal(p1.controls, p2.controls)
    assert r1 == r2


def test_geodesic_residual_flags_non_geodesics():
    sys = _so3_system()
    traj = integrate_magnetic(sys, np.array([1.0, 0.2, -0.4]), T=1.0,
                              dt=1e-2)
    assert geodesic_residual(sys, traj) <= 1e-3
    bad = integrate_magnetic(sys, np.array([1.0, 0.2, -0.4]), T=1.0,
                             dt=1e-2)
    bad.velocities = bad.velocities + 0.1
    assert geodesic_residual(sys, bad) > 1e-2
