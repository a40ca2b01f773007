"""Named property suites: every library-level guarantee as a runnable check.

Each check returns a CheckResult with a pass flag and enough diagnostics to
see how much margin was left.  The CLI `check` command and the acceptance
test module both run these.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import algebra as al
from . import epdiff as ep
from . import oracles
from .finsler import (ConnectOptions, RandersMetric, action_gap,
                      check_equivalence_bounds, connect_at_energy,
                      fundamental_tensor)
from .flow import (PhasePoint, Trajectory, integrate_hamiltonian,
                   integrate_magnetic, legendre, magnetic_exp)
from .magnetics import (InertiaOperator, MagneticSystem, dual_norm,
                        annihilator_basis, kinetic_energy, lorentz,
                        mane_certificate, mane_critical_value, metric_norm)


@dataclass
class CheckResult:
    name: str
    passed: bool
    runtime: float = 0.0
    details: dict = dc_field(default_factory=dict)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name} ({self.runtime:.2f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs) -> CheckResult:
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        result.runtime = time.perf_counter() - t0
        return result
    return wrapper


def _catalog(vect_modes: int = 4) -> list[al.LieAlgebra]:
    return [al.so3(), al.heisenberg3(), al.se2(), al.vect_s1(vect_modes)]


def _random_system(alg: al.LieAlgebra, rng, alpha_dual: float
                   ) -> MagneticSystem:
    if alg.name == "vect_s1_truncated":
        A = InertiaOperator.sobolev(alg, 1.0)
    else:
        m = rng.standard_normal((alg.dim, alg.dim))
        A = InertiaOperator(m @ m.T + alg.dim * np.eye(alg.dim))
    alpha = rng.standard_normal(alg.dim)
    alpha *= alpha_dual / dual_norm(A, alpha)
    return MagneticSystem(alg, A, alpha)


@_timed
def check_lorentz_skew(seed: int = 0, samples: int = 10_000) -> CheckResult:
    """|G(Yu, v) + G(Yv, u)| <= 1e-10 * scale on random pairs, all groups."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    per_group = {}
    for alg in _catalog():
        sys = _random_system(alg, rng, 0.8)
        U = rng.standard_normal((samples, alg.dim))
        V = rng.standard_normal((samples, alg.dim))
        # G(Yu, v) = sigma(u, v) = -<alpha, [u, v]>
        c = alg.structure_constants
        lhs = -np.einsum("ni,ijk,k,nj->n", U, c, sys.alpha, V)
        rhs = -np.einsum("ni,ijk,k,nj->n", V, c, sys.alpha, U)
        scale = np.maximum(1.0, np.abs(lhs))
        # direct check through the solver path on the subsample
        sub = U[:: max(1, samples // 64)]
        subv = V[:: max(1, samples // 64)]
        direct = np.array([
            float(sys.A.apply(lorentz(sys, u)) @ v
                  + sys.A.apply(lorentz(sys, v)) @ u)
            for u, v in zip(sub, subv)])
        res = max(float(np.max(np.abs(lhs + rhs) / scale)),
                  float(np.max(np.abs(direct))))
        per_group[alg.name] = res
        worst = max(worst, res)
    return CheckResult("lorentz-skew", worst <= 1e-10,
                       details={"worst_residual": worst,
                                "per_group": per_group})


@_timed
def check_energy_conservation(seed: int = 1) -> CheckResult:
    """Relative drift <= 1e-8 at dt = 1e-3 over T = 10; drift drops >= 15x
    when dt halves in the truncation-dominated regime."""
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for name in ("so3", "heisenberg3", "se2"):
        alg = al.make_algebra(name)
        sys = _random_system(alg, rng, 0.5 * rng.random())
        u0 = rng.standard_normal(3)
        drift = integrate_magnetic(sys, u0, T=10.0, dt=1e-3).energy_drift
        # convergence factor measured where truncation dominates rounding
        coarse = integrate_magnetic(sys, u0, T=10.0, dt=0.05).energy_drift
        fine = integrate_magnetic(sys, u0, T=10.0, dt=0.025).energy_drift
        factor = coarse / max(fine, 1e-300)
        details[name] = {"drift": drift, "halving_factor": factor}
        ok = ok and drift <= 1e-8 and factor >= 15.0
    return CheckResult("energy-conservation", ok, details=details)


@_timed
def check_so3_closed_form() -> CheckResult:
    """Integrated velocity matches the precession closed form on so(3)."""
    alg = al.so3()
    strength = 0.7
    sys = MagneticSystem(alg, InertiaOperator.identity(3),
                         strength * np.eye(3)[2])
    u0 = np.array([0.9, -0.3, 0.4])
    T = 5.0
    traj = integrate_magnetic(sys, u0, T=T, dt=1e-3)
    ref = oracles.so3_magnetic_closed_form(u0, strength, traj.times)
    err = float(np.max(np.abs(traj.velocities - ref)))
    return CheckResult("so3-closed-form", err <= 1e-8 * T,
                       details={"sup_error": err, "tolerance": 1e-8 * T})


@_timed
def check_mane(seed: int = 2) -> CheckResult:
    """QP value matches grid search on heisenberg3; upper bound always holds."""
    alg = al.heisenberg3()
    e1, _, e3 = np.eye(3)
    sys = MagneticSystem(alg, InertiaOperator.identity(3), e1 + e3)
    c, beta = mane_critical_value(sys)
    brute = oracles.mane_grid_search(sys.A.matrix, sys.alpha,
                                     annihilator_basis(alg))
    cert = mane_certificate(sys, beta)
    ok = (abs(c - 0.5) <= 1e-9 and abs(c - brute) <= 1e-6 and cert <= 1e-10)
    rng = np.random.default_rng(seed)
    worst_gap = -math.inf
    for _ in range(100):
        alg_r = [al.so3(), al.heisenberg3(), al.se2()][rng.integers(3)]
        sys_r = _random_system(alg_r, rng, 0.2 + rng.random())
        c_r, beta_r = mane_critical_value(sys_r)
        bound = 0.5 * dual_norm(sys_r.A, sys_r.alpha) ** 2
        gap = c_r - bound
        worst_gap = max(worst_gap, gap)
        ok = ok and gap <= 1e-12 and mane_certificate(sys_r, beta_r) <= 1e-10
    return CheckResult("mane", ok, details={
        "heisenberg_c": c, "grid_search_c": brute,
        "certificate": cert, "worst_bound_gap": worst_gap})


@_timed
def check_randers_bounds(seed: int = 3, samples: int = 10_000) -> CheckResult:
    """C1 |v| <= F(v) <= C2 |v| with zero violations, at kappa = 2c + 1."""
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for alg in _catalog():
        sys = _random_system(alg, rng, 0.7)
        c, _ = mane_critical_value(sys)
        F = RandersMetric(sys, 2.0 * c + 1.0)
        rep = check_equivalence_bounds(F, samples,
                                       seed=int(rng.integers(2 ** 31)))
        details[alg.name] = rep
        ok = ok and rep["violations"] == 0
    return CheckResult("randers-bounds", ok, details=details)


@_timed
def check_fundamental_tensor(seed: int = 4, samples: int = 1000
                             ) -> CheckResult:
    """Positive definiteness at the sharp margin |alpha| = 0.9 sqrt(2k)."""
    rng = np.random.default_rng(seed)
    alg = al.so3()
    A = InertiaOperator(np.diag([1.0, 2.0, 3.0]))
    kappa = 2.0
    alpha = rng.standard_normal(3)
    alpha *= 0.9 * math.sqrt(2.0 * kappa) / dual_norm(A, alpha)
    F = RandersMetric(MagneticSystem(alg, A, alpha), kappa)
    min_eig = math.inf
    sym_res = 0.0
    for _ in range(samples):
        v = rng.standard_normal(3)
        g = fundamental_tensor(F, v, h=1e-4)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(g)[0]))
        sym_res = max(sym_res, float(np.max(np.abs(g - g.T))))
    # Riemannian degeneration: alpha = 0, kappa = 1/2 reproduces A itself
    F0 = RandersMetric(MagneticSystem(alg, A, np.zeros(3)), 0.5)
    g0 = fundamental_tensor(F0, np.array([0.3, -1.1, 0.4]), h=1e-4)
    riem_err = float(np.max(np.abs(g0 - A.matrix)))
    ok = min_eig > 0.0 and sym_res <= 1e-8 and riem_err <= 1e-6
    return CheckResult("fundamental-tensor", ok, details={
        "min_eigenvalue": min_eig, "symmetry_residual": sym_res,
        "riemannian_error": riem_err})


@_timed
def check_action_length(seed: int = 5) -> CheckResult:
    """Gap of S_{L+kappa} over the Finsler length vanishes exactly on
    constant-speed-sqrt(2 kappa) paths and is positive otherwise."""
    rng = np.random.default_rng(seed)
    alg = al.so3()
    sys = _random_system(alg, rng, 0.4)
    kappa = 1.3
    target_speed = math.sqrt(2.0 * kappa)
    xis = rng.standard_normal((16, 3))
    xis = np.array([target_speed * x / metric_norm(sys.A, x) for x in xis])
    path = al.ControlPath(xis, 1.0 / 16.0)
    _, _, gap_eq = action_gap(sys, kappa, path)
    fast = al.ControlPath(2.0 * xis, 1.0 / 16.0)
    s_f, l_f, gap_f = action_gap(sys, kappa, fast)
    # scalar oracle: per-interval gap is |xi|^2/2 + kappa - sqrt(2k)|xi|
    oracle = sum((0.5 * metric_norm(sys.A, x) ** 2 + kappa
                  - target_speed * metric_norm(sys.A, x)) / 16.0
                 for x in fast.controls)
    zero_path = al.ControlPath(np.zeros((16, 3)), 1.0 / 16.0)
    _, l_z, gap_z = action_gap(sys, kappa, zero_path)
    ok = (abs(gap_eq) <= 1e-12 and gap_f > 0.0
          and abs(gap_f - oracle) <= 1e-10
          and l_z == 0.0 and abs(gap_z - kappa) <= 1e-12)
    return CheckResult("action-gap", ok, details={
        "constant_speed_gap": gap_eq, "fast_gap": gap_f,
        "oracle_gap": oracle, "zero_path_gap": gap_z})


@_timed
def check_connectivity(seed: int = 6) -> CheckResult:
    """connect_at_energy recovers the forward flow on so(3) and succeeds on
    20/20 nearby heisenberg targets."""
    alg = al.so3()
    sys = MagneticSystem(alg, InertiaOperator.identity(3),
                         0.3 * np.eye(3)[2])
    kappa = 2.0
    u0 = np.array([1.2, -0.9, 1.1])
    u0 *= math.sqrt(2.0 * kappa) / np.linalg.norm(u0)
    target = magnetic_exp(sys, al.identity(alg), u0)
    traj, rep = connect_at_energy(sys, kappa, al.identity(alg), target,
                                  n_steps=128)
    ref = integrate_magnetic(sys, u0, T=float(traj.times[-1]) + 1e-3,
                             dt=1e-3)
    uref = np.stack([np.interp(traj.times, ref.times, ref.velocities[:, i])
                     for i in range(3)], axis=1)
    sup_err = float(np.max(np.abs(uref - traj.velocities)))
    speed_dev = float(np.max(np.abs(
        [metric_norm(sys.A, u) for u in traj.velocities])
        - math.sqrt(2.0 * kappa)))
    energy_dev = float(np.max(np.abs(traj.energies - kappa)))
    so3_ok = (sup_err <= 1e-4 and rep["endpoint_error"] <= 1e-6
              and rep["residual"] <= 1e-4 and speed_dev <= 1e-6
              and energy_dev <= 1e-8)

    h_alg = al.heisenberg3()
    h_sys = MagneticSystem(h_alg, InertiaOperator.identity(3),
                           np.eye(3)[0] + np.eye(3)[2])
    c, _ = mane_critical_value(h_sys)
    h_kappa = 1.5 * c + 1.0
    rng = np.random.default_rng(seed)
    opts = ConnectOptions(n_steps=256, stop_on_first=True)
    successes = 0
    for _ in range(20):
        v = 0.5 * rng.standard_normal(3)
        tgt = al.group_exp(v, h_alg)
        _, h_rep = connect_at_energy(h_sys, h_kappa, al.identity(h_alg),
                                     tgt, opts=opts)
        if h_rep["endpoint_error"] <= 1e-6 and h_rep["residual"] <= 1e-4:
            successes += 1
    return CheckResult("connectivity", so3_ok and successes == 20, details={
        "so3_sup_error": sup_err, "so3_endpoint": rep["endpoint_error"],
        "so3_residual": rep["residual"], "so3_speed_dev": speed_dev,
        "so3_energy_dev": energy_dev, "heisenberg_successes": successes})


@_timed
def check_conjugacy(seed: int = 7) -> CheckResult:
    """Velocity-side and momentum-side integrators agree through Legendre."""
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for alg in _catalog():
        sys = _random_system(alg, rng, 0.5 * rng.random())
        u0 = rng.standard_normal(alg.dim)
        u0 *= 0.8 / metric_norm(sys.A, u0)
        lag = integrate_magnetic(sys, u0, T=5.0, dt=1e-3)
        pp0 = PhasePoint(al.identity(alg), legendre(sys, u0))
        ham = integrate_hamiltonian(sys, pp0, T=5.0, dt=1e-3)
        gap = float(np.max(np.abs(lag.velocities - ham.velocities)))
        details[alg.name] = gap
        ok = ok and gap <= 1e-6
    return CheckResult("conjugacy", ok, details=details)


def _poisson_bump(amp: float, ratio: float):
    return lambda x: amp * (ratio * np.cos(x) - ratio ** 2) / (
        1.0 - 2.0 * ratio * np.cos(x) + ratio ** 2)


@_timed
def check_epdiff() -> CheckResult:
    """Camassa-Holm degeneration, conservation under forcing, slope stability."""
    # sigma = 0, s = 1 vs the independent velocity-form oracle
    n_small = 32
    A1 = ep.SobolevInertia(1.0)
    u0 = ep.FourierField.from_function(lambda x: 0.1 * np.cos(x)
                                       + 0.05 * np.sin(2 * x), n_small)
    zero = ep.FourierField(np.zeros(2 * n_small + 1), u0.grid_size)
    tr = ep.integrate_epdiff(u0, A1, zero, T=2.0, dt=1e-3, sample_every=200)
    grid = 256
    ref = oracles.camassa_holm_velocity_form(
        u0.grid_values(grid), T=2.0, dt=1e-3)
    ch_err = float(np.max(np.abs(tr.field_at(-1).grid_values(grid) - ref)))

    # energy conservation with magnetic forcing at N = 64
    n_big = 64
    ub = ep.FourierField.from_function(lambda x: 0.1 * np.cos(x), n_big)
    a_const = ep.FourierField.from_function(
        lambda x: 0.2 * np.ones_like(x), n_big)
    drift = ep.integrate_epdiff(ub, A1, a_const, T=10.0, dt=1e-3,
                                sample_every=100).energy_drift

    # no-loss-no-gain slope witness on analytic data
    bump = ep.FourierField.from_function(_poisson_bump(0.1, 0.7), n_big)
    zero_big = ep.FourierField(np.zeros(2 * n_big + 1), bump.grid_size)
    devs = {}
    for tag, a_field in (("free", zero_big), ("magnetic", a_const)):
        run = ep.integrate_epdiff(bump, A1, a_field, T=5.0, dt=2e-3,
                                  sample_every=250)
        devs[tag] = ep.decay_monitor(run, (2, 10))["max_deviation"]
    ok = (ch_err <= 1e-6 and drift <= 1e-7
          and all(d <= 0.5 for d in devs.values()))
    return CheckResult("epdiff", ok, details={
        "camassa_holm_error": ch_err, "forced_energy_drift": drift,
        "slope_deviation": devs})


@_timed
def check_non_reparametrization() -> CheckResult:
    """Scaling the initial velocity does not time-rescale the trajectory."""
    alg = al.so3()
    strength = 0.7
    sys = MagneticSystem(alg, InertiaOperator.identity(3),
                         strength * np.eye(3)[2])
    u0 = np.array([1.0, 0.0, 0.3])
    lam = 2.0
    T = 2.0
    scaled = integrate_magnetic(sys, lam * u0, T=T / lam, dt=5e-4)
    base = integrate_magnetic(sys, u0, T=T, dt=1e-3)
    rescaled = lam * np.stack([
        np.interp(lam * scaled.times, base.times, base.velocities[:, i])
        for i in range(3)], axis=1)
    deviation = float(np.max(np.abs(scaled.velocities - rescaled)))
    return CheckResult("non-reparametrization", deviation > 1e-3,
                       details={"deviation": deviation})


SUITES: dict = {
    "lorentz-skew": [check_lorentz_skew],
    "energy-conservation": [check_energy_conservation],
    "so3-closed-form": [check_so3_closed_form],
    "mane": [check_mane],
    "randers-bounds": [check_randers_bounds],
    "fundamental-tensor": [check_fundamental_tensor],
    "action-gap": [check_action_length],
    "connectivity": [check_connectivity],
    "conjugacy": [check_conjugacy],
    "epdiff": [check_epdiff],
    "non-reparametrization": [check_non_reparametrization],
}
SUITES["all"] = [fn for fns in list(SUITES.values()) for fn in fns]


def run_suite(name: str, max_workers: int = 1) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    fns = SUITES[name]
    if max_workers > 1 and len(fns) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(fn) for fn in fns]
            return [f.result() for f in futures]
    return [fn() for fn in fns]
