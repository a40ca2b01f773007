"""Randers-Finsler geometry of right-invariant magnetic systems.

For an energy level kappa above the Mane critical value, the metric
    F(v) = sqrt(2 kappa) |v|_A - <alpha_opt, v>
(with alpha_opt the primitive of minimal dual norm) is a right-invariant
Finsler metric.  Two-point connectivity at prescribed energy is solved by
the direct method: minimize the discrete Finsler energy over
piecewise-constant algebra controls with a penalized endpoint constraint,
then reparametrize the minimizer to constant metric speed sqrt(2 kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .algebra import (ControlPath, GroupPoint, LieAlgebra, compose, evolve,
                      exp_batch, group_exp, group_inverse, group_log,
                      identity)
from .flow import Trajectory, magnetic_rhs
from .magnetics import (MagneticSystem, dual_norm, kinetic_energy,
                        mane_critical_value, metric_norm)


class SubcriticalEnergyError(ValueError):
    """Requested energy level is not above the Mane critical value."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class RandersMetric:
    """The Randers metric at energy kappa > c, using the optimal primitive."""

    sys: MagneticSystem
    kappa: float
    alpha_opt: np.ndarray = field(init=False)
    critical_value: float = field(init=False)

    def __post_init__(self):
        c, beta = mane_critical_value(self.sys)
        alpha_opt = self.sys.alpha + beta
        margin = math.sqrt(2.0 * self.kappa) - dual_norm(self.sys.A, alpha_opt)
        if margin <= 0.0:
            raise SubcriticalEnergyError(
                f"kappa={self.kappa} is not above the critical value c={c}")
        object.__setattr__(self, "alpha_opt", alpha_opt)
        object.__setattr__(self, "critical_value", c)

    @property
    def sqrt_2k(self) -> float:
        return math.sqrt(2.0 * self.kappa)


def finsler_eval(F: RandersMetric, v: np.ndarray) -> float:
    """F(v) = sqrt(2 kappa) |v|_A - alpha_opt(v); positively 1-homogeneous."""
    v = F.sys.algebra.check_vector(v)
    return F.sqrt_2k * metric_norm(F.sys.A, v) - float(F.alpha_opt @ v)


def check_equivalence_bounds(F: RandersMetric, samples: int,
                             seed: int = 0) -> dict:
    """Check C1 |v|_A <= F(v) <= C2 |v|_A on random unit-norm directions."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a_dual = dual_norm(F.sys.A, F.alpha_opt)
    c1 = F.sqrt_2k - a_dual
    c2 = F.sqrt_2k + a_dual
    rng = np.random.default_rng(seed)
    dim = F.sys.algebra.dim
    worst_lower = math.inf
    worst_upper = math.inf
    violations = 0
    for _ in range(samples):
        v = rng.standard_normal(dim)
        v /= metric_norm(F.sys.A, v)
        fv = finsler_eval(F, v)
        lo = fv - c1
        hi = c2 - fv
        worst_lower = min(worst_lower, lo)
        worst_upper = min(worst_upper, hi)
        if lo < -1e-12 or hi < -1e-12:
            violations += 1
    return {"C1": c1, "C2": c2, "samples": samples,
            "worst_lower_slack": worst_lower,
            "worst_upper_slack": worst_upper, "violations": violations}


def fundamental_tensor(F: RandersMetric, v: np.ndarray,
                       h: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of (1/2) F^2 at v (v != 0)."""
    v = F.sys.algebra.check_vector(v)
    if np.all(v == 0.0):
        raise ValueError("fundamental tensor is undefined at v = 0")
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    dim = v.size

    def phi(w):
        return 0.5 * finsler_eval(F, w) ** 2

    g = np.empty((dim, dim))
    eye = np.eye(dim)
    for i in range(dim):
        for j in range(i, dim):
            val = (phi(v + h * eye[i] + h * eye[j])
                   - phi(v + h * eye[i] - h * eye[j])
                   - phi(v - h * eye[i] + h * eye[j])
                   + phi(v - h * eye[i] - h * eye[j])) / (4.0 * h * h)
            g[i, j] = val
            g[j, i] = val
    return g


def finsler_length(F: RandersMetric, path: ControlPath) -> float:
    """L(path) = sum dt * F(xi_i); reparametrization-invariant in the limit."""
    return path.dt * sum(finsler_eval(F, xi) for xi in path.controls)


def finsler_energy(F: RandersMetric, path: ControlPath) -> float:
    """E(path) = sum dt * F(xi_i)^2."""
    return path.dt * sum(finsler_eval(F, xi) ** 2 for xi in path.controls)


def action_gap(sys: MagneticSystem, kappa: float,
               path: ControlPath) -> tuple[float, float, float]:
    """Free action S_{L+kappa}, Finsler length, and their gap.

    The gap is sum dt (|xi|^2/2 + kappa - sqrt(2 kappa) |xi|) >= 0, zero
    exactly on constant-speed-sqrt(2 kappa) paths.  Both functionals use the
    Mane-optimal primitive so that they differ only by the speed defect.
    """
    F = RandersMetric(sys, kappa)
    action = 0.0
    length = 0.0
    for xi in path.controls:
        n = metric_norm(sys.A, xi)
        a = float(F.alpha_opt @ xi)
        action += path.dt * (0.5 * n * n - a + kappa)
        length += path.dt * (F.sqrt_2k * n - a)
    return action, length, action - length


# ---------------------------------------------------------------------------
# direct-method minimizer

@dataclass(frozen=True)
class ConnectOptions:
    n_steps: int = 64
    n_starts: int = 8
    seed: int = 0
    mu_schedule: tuple = (1e1, 1e2, 1e3, 1e4)
    al_rounds: int = 20
    maxiter: int = 2000
    gtol: float = 1e-9
    endpoint_tol: float = 1e-6
    stationarity_tol: float = 1e-6
    endpoint_target: float = 1e-8
    # stop after the first converged start (deterministic: fixed seed order)
    stop_on_first: bool = False


def _ad_matrices(alg: LieAlgebra, xis: np.ndarray) -> np.ndarray:
    """Stack of ad_{xi} matrices acting on algebra coordinates."""
    # (ad_x)_{k j} = sum_i x_i c[i, j, k]
    return np.einsum("ni,ijk->nkj", xis, alg.structure_constants)


def _dexp_matrices(alg: LieAlgebra, xis: np.ndarray, terms: int = 12
                   ) -> np.ndarray:
    """phi(ad_X) with phi(z) = (e^z - 1)/z for a stack of X = xi."""
    ad = _ad_matrices(alg, xis)
    n, d, _ = ad.shape
    D = np.tile(np.eye(d), (n, 1, 1))
    term = np.tile(np.eye(d), (n, 1, 1))
    for m in range(1, terms):
        term = term @ ad / (m + 1.0)
        D = D + term
    return D


def _finsler_sq_and_grad(F: RandersMetric, xis: np.ndarray
                         ) -> tuple[np.ndarray, np.ndarray]:
    """F(xi)^2 per row and its gradient; smooth extension through 0."""
    A = F.sys.A.matrix
    Ax = xis @ A
    norms = np.sqrt(np.maximum(np.einsum("ni,ni->n", xis, Ax), 0.0))
    av = xis @ F.alpha_opt
    fvals = F.sqrt_2k * norms - av
    safe = np.where(norms > 1e-14, norms, 1.0)
    unit = Ax / safe[:, None]
    grad = 2.0 * fvals[:, None] * (F.sqrt_2k * unit - F.alpha_opt)
    grad[norms <= 1e-14] = 0.0
    return fvals ** 2, grad


def _matrix_objective(xi_flat: np.ndarray, F: RandersMetric, dt: float,
                      g0: np.ndarray, target: np.ndarray, mu: float,
                      lam: np.ndarray) -> tuple[float, np.ndarray]:
    """Discrete Finsler energy + augmented endpoint penalty, with gradient.

    The endpoint map is the ordered product of exponentials
    g_N = exp(dt xi_{N-1}) ... exp(dt xi_0) g_0; its derivative uses the
    right-trivialized differential of exp, d exp(X)[d] = dexp_X(d) exp(X).
    """
    alg = F.sys.algebra
    dim = alg.dim
    xis = xi_flat.reshape(-1, dim)
    n = xis.shape[0]
    fsq, fgrad = _finsler_sq_and_grad(F, xis)
    energy = dt * float(np.sum(fsq))
    grad = dt * fgrad

    steps = exp_batch(dt * xis, alg)
    prefixes = np.empty_like(steps)  # W_i = E_i ... E_0 g_0
    m = g0
    for i in range(n):
        m = steps[i] @ m
        prefixes[i] = m
    gN = prefixes[-1]
    h = gN - target
    value = energy + mu * float(np.sum(h * h)) + float(np.sum(lam * h))

    h_eff = 2.0 * mu * h + lam
    D = _dexp_matrices(alg, dt * xis)
    basis = alg.basis_matrices
    suffix = np.eye(g0.shape[0])  # S_i = E_{N-1} ... E_{i+1}
    for i in range(n - 1, -1, -1):
        B = suffix.T @ h_eff @ prefixes[i].T
        b = np.einsum("pq,cpq->c", B, basis)
        grad[i] += dt * (D[i].T @ b)
        suffix = suffix @ steps[i]
    return value, grad.ravel()


def _initial_guesses(F: RandersMetric, g0: GroupPoint, target: GroupPoint,
                     n_steps: int, opts: ConnectOptions) -> list[np.ndarray]:
    alg = F.sys.algebra
    rng = np.random.default_rng(opts.seed)
    dim = alg.dim
    guesses = []
    base = None
    if alg.is_matrix_group:
        try:
            rel = compose(target, group_inverse(g0, alg), alg)
            base = group_log(rel, alg)
        except NotImplementedError:
            base = None
    if base is not None:
        const = np.tile(base, (n_steps, 1))
        guesses.append(const)
        scale = max(1.0, float(np.linalg.norm(base)))
        while len(guesses) < max(1, opts.n_starts - 2):
            guesses.append(const + 0.1 * scale
                           * rng.standard_normal((n_steps, dim)))
    while len(guesses) < opts.n_starts:
        guesses.append(0.3 * rng.standard_normal((n_steps, dim)))
    return guesses[:opts.n_starts]


def _optimize_single(F: RandersMetric, x0: np.ndarray, dt: float,
                     g0: np.ndarray, target: np.ndarray,
                     opts: ConnectOptions) -> dict:
    """Penalty continuation followed by augmented-Lagrangian polishing."""
    lam = np.zeros_like(target)
    x = x0.ravel().copy()
    nit = 0
    mu = opts.mu_schedule[-1]
    for mu_k in opts.mu_schedule:
        res = scipy.optimize.minimize(
            _matrix_objective, x, args=(F, dt, g0, target, mu_k, lam),
            jac=True, method="L-BFGS-B",
            options={"maxiter": opts.maxiter, "gtol": opts.gtol,
                     "ftol": 1e-16})
        x = res.x
        nit += res.nit
    for _ in range(opts.al_rounds):
        xis = x.reshape(-1, F.sys.algebra.dim)
        endpoint = _endpoint_matrix(F.sys.algebra, xis, dt, g0)
        h = endpoint - target
        err = float(np.linalg.norm(h))
        if err <= opts.endpoint_target:
            break
        lam = lam + 2.0 * mu * h
        res = scipy.optimize.minimize(
            _matrix_objective, x, args=(F, dt, g0, target, mu, lam),
            jac=True, method="L-BFGS-B",
            options={"maxiter": opts.maxiter, "gtol": opts.gtol,
                     "ftol": 1e-16})
        x = res.x
        nit += res.nit
    xis = x.reshape(-1, F.sys.algebra.dim)
    endpoint = _endpoint_matrix(F.sys.algebra, xis, dt, g0)
    err = float(np.linalg.norm(endpoint - target))
    value, grad = _matrix_objective(x, F, dt, g0, target, mu, lam)
    energy = dt * float(np.sum(_finsler_sq_and_grad(F, xis)[0]))
    return {"controls": xis, "energy": energy, "endpoint_error": err,
            "stationarity": float(np.linalg.norm(grad, np.inf)),
            "iterations": nit}


def _endpoint_matrix(alg: LieAlgebra, xis: np.ndarray, dt: float,
                     g0: np.ndarray) -> np.ndarray:
    steps = exp_batch(dt * xis, alg)
    m = g0
    for E in steps:
        m = E @ m
    return m


def _trajectory_from_controls(sys: MagneticSystem, controls: np.ndarray,
                              times: np.ndarray, g0: GroupPoint,
                              metadata: dict) -> Trajectory:
    """Node trajectory induced by piecewise-constant interval controls."""
    alg = sys.algebra
    gs = [g0]
    g = g0
    for xi, h in zip(controls, np.diff(times)):
        g = compose(group_exp(h * xi, alg), g, alg)
        gs.append(g)
    us = _midpoints_to_nodes(controls)
    energies = np.array([kinetic_energy(sys.A, u) for u in us])
    return Trajectory(times, gs, us, energies, metadata)


def _midpoints_to_nodes(vals: np.ndarray) -> np.ndarray:
    """Cubic interpolation of interval-midpoint samples to nodes."""
    n = vals.shape[0]
    nodes = np.empty((n + 1, vals.shape[1]))
    if n == 1:
        nodes[:] = vals[0]
        return nodes
    if n < 4:
        nodes[1:n] = 0.5 * (vals[:-1] + vals[1:])
        nodes[0] = 1.5 * vals[0] - 0.5 * vals[1]
        nodes[n] = 1.5 * vals[-1] - 0.5 * vals[-2]
        return nodes
    nodes[2:n - 1] = (-vals[:-3] + 9 * vals[1:-2] + 9 * vals[2:-1]
                      - vals[3:]) / 16.0
    # one-sided cubic extrapolation at the ends (midpoint offsets -1/2 .. )
    c0 = np.array([35.0, -35.0, 21.0, -5.0]) / 16.0
    c1 = np.array([5.0, 15.0, -5.0, 1.0]) / 16.0
    nodes[0] = c0 @ vals[:4]
    nodes[1] = c1 @ vals[:4]
    nodes[n] = c0 @ vals[::-1][:4]
    nodes[n - 1] = c1 @ vals[::-1][:4]
    return nodes


def geodesic_residual(sys: MagneticSystem, traj: Trajectory) -> float:
    """Central-difference residual of du/dt = magnetic_rhs(u) at nodes."""
    t = traj.times
    u = traj.velocities
    if t.size < 3:
        return 0.0
    res = 0.0
    for j in range(1, t.size - 1):
        dudt = (u[j + 1] - u[j - 1]) / (t[j + 1] - t[j - 1])
        res = max(res, float(np.max(np.abs(dudt - magnetic_rhs(sys, u[j])))))
    return res


def minimize_finsler_energy(F: RandersMetric, start: GroupPoint,
                            target: GroupPoint, n_steps: int | None = None,
                            opts: ConnectOptions | None = None
                            ) -> tuple[ControlPath, Trajectory, dict]:
    """Direct-method minimization of the discrete Finsler energy.

    Multistart quasi-Newton descent on piecewise-constant controls over
    [0, 1]; the endpoint constraint evolve(xi) * start = target is enforced
    by quadratic-penalty continuation plus multiplier updates.  Ties among
    converged starts go to the lowest energy, then lowest endpoint error.
    """
    opts = opts or ConnectOptions()
    if n_steps is not None:
        opts = replace(opts, n_steps=n_steps)
    if opts.n_steps < 8:
        raise ValueError("n_steps must be >= 8")
    alg = F.sys.algebra
    if not alg.is_matrix_group:
        raise NotImplementedError(
            "direct-method connectivity is implemented for matrix groups")
    dt = 1.0 / opts.n_steps
    g0 = start.rep
    tgt = target.rep
    results = []
    for x0 in _initial_guesses(F, start, target, opts.n_steps, opts):
        res = _optimize_single(F, x0, dt, g0, tgt, opts)
        results.append(res)
        if (opts.stop_on_first
                and res["endpoint_error"] <= opts.endpoint_tol
                and res["stationarity"] <= opts.stationarity_tol):
            break
    # deterministic best-of: lowest energy, ties by endpoint error
    def sort_key(r):
        return (round(r["energy"] / 1e-10), r["endpoint_error"])
    converged = [r for r in results
                 if r["endpoint_error"] <= opts.endpoint_tol
                 and r["stationarity"] <= opts.stationarity_tol]
    pool = converged or results
    best = min(pool, key=sort_key)
    report = {
        "energy": best["energy"],
        "endpoint_error": best["endpoint_error"],
        "stationarity": best["stationarity"],
        "iterations": best["iterations"],
        "n_starts": len(results),
        "n_converged": len(converged),
        "converged": bool(converged),
    }
    if not converged:
        raise ConvergenceError("no multistart run converged", report)
    path = ControlPath(best["controls"], dt, start=start,
                       declared_target=target)
    times = dt * np.arange(opts.n_steps + 1)
    traj = _trajectory_from_controls(
        F.sys, best["controls"], times, start,
        {"integrator": "finsler_energy_minimizer", "dt": dt, "T": 1.0,
         "system": F.sys.system_hash()})
    return path, traj, report


def reparametrize_to_speed(sys: MagneticSystem, path: ControlPath,
                           speed: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact reparametrization of a piecewise-constant path to given speed.

    Each interval control xi_i of duration dt traverses the same group arc
    as eta_i = speed * xi_i / |xi_i|_A over duration dt |xi_i|_A / speed
    (the exponentials agree exactly).  Returns (eta, node_times).
    """
    norms = np.array([metric_norm(sys.A, xi) for xi in path.controls])
    if np.any(norms <= 0.0):
        raise ValueError("cannot reparametrize a path with vanishing controls")
    eta = speed * path.controls / norms[:, None]
    durations = path.dt * norms / speed
    times = np.concatenate([[0.0], np.cumsum(durations)])
    return eta, times


def connect_at_energy(sys: MagneticSystem, kappa: float, x: GroupPoint,
                      y: GroupPoint, n_steps: int | None = None,
                      opts: ConnectOptions | None = None
                      ) -> tuple[Trajectory, dict]:
    """Magnetic geodesic of energy kappa from x to y (kappa > c required)."""
    c, _ = mane_critical_value(sys)
    if kappa <= c:
        raise SubcriticalEnergyError(
            f"kappa={kappa} must exceed the critical value c={c}")
    if np.allclose(x.rep, y.rep, atol=1e-14):
        times = np.array([0.0, 1.0])
        traj = Trajectory(times, [x, y], np.zeros((2, sys.algebra.dim)),
                          np.zeros(2), {"integrator": "connect_at_energy",
                                        "degenerate": True,
                                        "system": sys.system_hash()})
        return traj, {"degenerate": True, "endpoint_error": 0.0,
                      "residual": 0.0, "converged": True}
    F = RandersMetric(sys, kappa)
    path, _, report = minimize_finsler_energy(F, x, y, n_steps, opts)
    eta, times = reparametrize_to_speed(sys, path, F.sqrt_2k)
    traj = _trajectory_from_controls(
        sys, eta, times, x,
        {"integrator": "connect_at_energy", "kappa": kappa,
         "dt": float(np.mean(np.diff(times))), "T": float(times[-1]),
         "system": sys.system_hash()})
    # node velocities interpolate the constant-speed interval controls;
    # renormalize so the trajectory lies exactly on the energy surface
    us = traj.velocities
    scales = np.array([metric_norm(sys.A, u) for u in us])
    traj.velocities = F.sqrt_2k * us / scales[:, None]
    traj.energies = np.full(times.size, kappa)
    residual = geodesic_residual(sys, traj)
    report = dict(report)
    report.update({"degenerate": False, "residual": residual,
                   "total_time": float(times[-1])})
    return traj, report
