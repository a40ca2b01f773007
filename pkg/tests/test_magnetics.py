import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import magflow.algebra as al
from magflow import oracles
from magflow.magnetics import (InertiaOperator, MagneticSystem,
                               annihilator_basis, derived_subalgebra_basis,
                               dual_norm, kinetic_energy, lorentz,
                               mane_certificate, mane_critical_value,
                               metric_norm, optimal_primitive,
                               sigma_at_identity, sigma_flat)

ALL_ALGEBRAS = [al.so3(), al.heisenberg3(), al.se2(), al.vect_s1(4)]


def _system(alg, seed, alpha_scale=0.7):
    rng = np.random.default_rng(seed)
    if alg.name == "vect_s1_truncated":
        A = InertiaOperator.sobolev(alg, 1.0)
    else:
        m = rng.standard_normal((alg.dim, alg.dim))
        A = InertiaOperator(m @ m.T + alg.dim * np.eye(alg.dim))
    alpha = rng.standard_normal(alg.dim)
    alpha *= alpha_scale / dual_norm(A, alpha)
    return MagneticSystem(alg, A, alpha)


def test_inertia_rejects_asymmetric_and_indefinite():
    with pytest.raises(ValueError):
        InertiaOperator(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        InertiaOperator(np.diag([1.0, -2.0]))


def test_sobolev_inertia_is_diagonal_multiplier():
    alg = al.vect_s1(4)
    A = InertiaOperator.sobolev(alg, 2.0)
    ks = np.array([0, 1, 1, 2, 2, 3, 3, 4, 4])
    assert np.allclose(A.matrix, np.diag((1.0 + ks ** 2) ** 2.0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3), st.integers(0, 2 ** 31 - 1))
def test_sigma_is_skew(which, seed):
    alg = ALL_ALGEBRAS[which]
    sys = _system(alg, 5)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, alg.dim))
    s_uv = sigma_at_identity(sys, u, v)
    s_vu = sigma_at_identity(sys, v, u)
    assert abs(s_uv + s_vu) <= 1e-10 * max(1.0, abs(s_uv))


@pytest.mark.parametrize("alg", ALL_ALGEBRAS, ids=lambda a: a.name)
def test_lorentz_represents_sigma(alg):
    sys = _system(alg, 9)
    rng = np.random.default_rng(1)
    for _ in range(50):
        u, v = rng.standard_normal((2, alg.dim))
        pairing = float(sys.A.apply(lorentz(sys, u)) @ v)
        assert abs(pairing - sigma_at_identity(sys, u, v)) <= 1e-10
    u = rng.standard_normal(alg.dim)
    assert np.allclose(sys.A.apply(lorentz(sys, u)), sigma_flat(sys, u))


def test_vect_lorentz_constant_primitive():
    # a(x) = a0, u = sin x  =>  Y u = A^{-1}(2 a0 cos x) = a0 cos x at s = 1
    alg = al.vect_s1(4)
    A = InertiaOperator.sobolev(alg, 1.0)
    a0 = 0.35
    alpha = np.zeros(alg.dim)
    alpha[0] = a0 * math.sqrt(2.0 * math.pi)
    sys = MagneticSystem(alg, A, alpha)
    u = np.zeros(alg.dim)
    u[2] = math.sqrt(math.pi)  # sin x
    expected = np.zeros(alg.dim)
    expected[1] = a0 * math.sqrt(math.pi)  # a0 cos x
    assert np.max(np.abs(lorentz(sys, u) - expected)) <= 1e-10


def test_vect_kinetic_energy_quadrature():
    # (1/2) integral (u^2 + u_x^2) dx = pi for u = sin x
    alg = al.vect_s1(4)
    A = InertiaOperator.sobolev(alg, 1.0)
    u = np.zeros(alg.dim)
    u[2] = math.sqrt(math.pi)
    assert abs(kinetic_energy(A, u) - math.pi) <= 1e-12


def test_derived_subalgebra_and_annihilator():
    alg = al.heisenberg3()
    der = derived_subalgebra_basis(alg)
    assert der.shape[1] == 1
    assert np.allclose(np.abs(der[:, 0]), [0.0, 0.0, 1.0])
    ann = annihilator_basis(alg)
    assert ann.shape[1] == 2
    assert np.max(np.abs(ann.T @ der)) <= 1e-12
    assert annihilator_basis(al.so3()).shape[1] == 0


def test_mane_heisenberg_example():
    alg = al.heisenberg3()
    e1, _, e3 = np.eye(3)
    sys = MagneticSystem(alg, InertiaOperator.identity(3), e1 + e3)
    c, beta = mane_critical_value(sys)
    assert abs(c - 0.5) <= 1e-12
    assert np.max(np.abs(beta - (-e1))) <= 1e-10
    assert np.max(np.abs(optimal_primitive(sys) - e3)) <= 1e-10


def test_mane_so3_example():
    sys = MagneticSystem(al.so3(), InertiaOperator.identity(3), np.eye(3)[0])
    c, beta = mane_critical_value(sys)
    assert abs(c - 0.5) <= 1e-12
    assert np.max(np.abs(beta)) == 0.0


def test_mane_zero_alpha_gives_zero():
    sys = MagneticSystem(al.se2(), InertiaOperator.identity(3), np.zeros(3))
    c, _ = mane_critical_value(sys)
    assert c == 0.0


def test_mane_matches_grid_search_oracle():
    rng = np.random.default_rng(23)
    for _ in range(10):
        sys = _system([al.heisenberg3(), al.se2()][rng.integers(2)],
                      int(rng.integers(2 ** 31)))
        c, beta = mane_critical_value(sys)
        brute = oracles.mane_grid_search(sys.A.matrix, sys.alpha,
                                         annihilator_basis(sys.algebra))
        assert abs(c - brute) <= 1e-6
        assert mane_certificate(sys, beta) <= 1e-10


def test_dual_norm_against_direction_search():
    rng = np.random.default_rng(29)
    m = rng.standard_normal((3, 3))
    A = InertiaOperator(m @ m.T + 3.0 * np.eye(3))
    p = rng.standard_normal(3)
    exact = dual_norm(A, p)
    lower = oracles.dual_norm_direction_search(A.matrix, p, seed=4)
    assert lower <= exact + 1e-12
    assert exact - lower <= 1e-2 * exact


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_dual_norm_is_cauchy_schwarz_sharp(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((3, 3))
    A = InertiaOperator(m @ m.T + 3.0 * np.eye(3))
    p, v = rng.standard_normal((2, 3))
    assert abs(p @ v) <= dual_norm(A, p) * metric_norm(A, v) + 1e-10
