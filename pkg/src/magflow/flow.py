"""Time integration of right-invariant magnetic geodesics.

The reduced velocity equation is
    du/dt = -A^-1 ad*_u(A u) - Y u,
integrated with fixed-step RK4 and interleaved group reconstruction
g_{n+1} = exp(dt * u_mid) g_n using the midpoint velocity.  An independent
Hamiltonian-side integrator works on the right-trivialized momentum,
    dp/dt = -ad*_u p,  u = A^-1 (p + alpha),
and is conjugate to the velocity-side flow through the Legendre transform
p = A u - alpha; mutual agreement of the two is used as a consistency oracle.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import GroupPoint, LieAlgebra, coad, compose, group_exp, identity
from .magnetics import (InertiaOperator, MagneticSystem, dual_norm,
                        kinetic_energy, lorentz)


class IntegrationError(RuntimeError):
    """Raised when stepping produces non-finite state."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


@dataclass(frozen=True)
class PhasePoint:
    """A group point with right-trivialized momentum covector."""

    g: GroupPoint
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if not np.all(np.isfinite(p)):
            raise ValueError("momentum has non-finite entries")
        object.__setattr__(self, "p", p)


@dataclass
class Trajectory:
    """Time-sampled (t, g, u, E) records of a magnetic geodesic."""

    times: np.ndarray
    group_points: list[GroupPoint]
    velocities: np.ndarray  # (n, dim)
    energies: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.energies = np.asarray(self.energies, dtype=float)
        n = self.times.size
        if not (len(self.group_points) == n == self.velocities.shape[0]
                == self.energies.size):
            raise ValueError("trajectory arrays must have equal length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def energy_drift(self) -> float:
        e0 = self.energies[0]
        if e0 == 0.0:
            return float(np.max(np.abs(self.energies)))
        return float(np.max(np.abs(self.energies - e0)) / abs(e0))

    def to_csv(self, path) -> None:
        dim = self.velocities.shape[1]
        gsize = self.group_points[0].rep.size
        header = (["t"] + [f"g{i}" for i in range(gsize)]
                  + [f"u{i}" for i in range(dim)] + ["E"])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, g, u, e in zip(self.times, self.group_points,
                                  self.velocities, self.energies):
                writer.writerow(
                    [repr(float(t))]
                    + [repr(float(v)) for v in g.rep.ravel()]
                    + [repr(float(v)) for v in u] + [repr(float(e))])

    def to_json(self, path=None) -> str:
        doc = {
            "metadata": self.metadata,
            "times": self.times.tolist(),
            "group_shape": list(self.group_points[0].rep.shape),
            "group": self.group_points[0].group,
            "group_points": [g.rep.ravel().tolist()
                             for g in self.group_points],
            "velocities": self.velocities.tolist(),
            "energies": self.energies.tolist(),
        }
        text = json.dumps(doc, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @staticmethod
    def from_json(text: str) -> "Trajectory":
        doc = json.loads(text)
        shape = tuple(doc["group_shape"])
        gps = [GroupPoint(doc["group"], np.asarray(flat).reshape(shape))
               for flat in doc["group_points"]]
        return Trajectory(np.asarray(doc["times"]), gps,
                          np.asarray(doc["velocities"]),
                          np.asarray(doc["energies"]), doc["metadata"])


def magnetic_rhs(sys: MagneticSystem, u: np.ndarray) -> np.ndarray:
    """du/dt = -A^-1 ad*_u(A u) - Y u; with sigma = 0 this is Euler-Arnold."""
    euler = -sys.A.solve(coad(u, sys.A.apply(u), sys.algebra))
    return euler - lorentz(sys, u)


def _rk4_step(rhs, u: np.ndarray, dt: float):
    k1 = rhs(u)
    k2 = rhs(u + 0.5 * dt * k1)
    k3 = rhs(u + 0.5 * dt * k2)
    k4 = rhs(u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate_reduced(sys: MagneticSystem, rhs, y0: np.ndarray,
                       g0: GroupPoint, T: float, dt: float,
                       velocity_of, name: str) -> Trajectory:
    """Shared RK4 driver: reduced variable y, reconstruction via velocity."""
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    n_steps = int(round(T / dt))
    times = [0.0]
    gs = [g0]
    y = np.asarray(y0, dtype=float)
    us = [velocity_of(y)]
    energies = [kinetic_energy(sys.A, us[0])]
    g = g0
    for i in range(n_steps):
        y_new = _rk4_step(rhs, y, dt)
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError(
                f"non-finite state at t={times[-1] + dt}", times[-1])
        u_new = velocity_of(y_new)
        u_mid = 0.5 * (us[-1] + u_new)
        g = compose(group_exp(dt * u_mid, sys.algebra), g, sys.algebra)
        y = y_new
        times.append((i + 1) * dt)
        gs.append(g)
        us.append(u_new)
        energies.append(kinetic_energy(sys.A, u_new))
    meta = {"integrator": name, "dt": dt, "T": T,
            "system": sys.system_hash()}
    return Trajectory(np.asarray(times), gs, np.asarray(us),
                      np.asarray(energies), meta)


def integrate_magnetic(sys: MagneticSystem, u0: np.ndarray,
                       g0: GroupPoint | None = None, T: float = 1.0,
                       dt: float = 1e-3) -> Trajectory:
    """RK4 on the reduced velocity with interleaved group reconstruction."""
    u0 = sys.algebra.check_vector(u0)
    if g0 is None:
        g0 = identity(sys.algebra)
    if np.all(u0 == 0.0):
        # rest point: constant trajectory at g0
        n = int(round(T / dt)) + 1
        times = np.arange(n) * dt
        return Trajectory(times, [g0] * n, np.zeros((n, u0.size)),
                          np.zeros(n), {"integrator": "magnetic_rk4",
                                        "dt": dt, "T": T,
                                        "system": sys.system_hash()})
    return _integrate_reduced(sys, lambda u: magnetic_rhs(sys, u), u0, g0,
                              T, dt, lambda u: u, "magnetic_rk4")


def magnetic_exp(sys: MagneticSystem, g: GroupPoint,
                 v: np.ndarray) -> GroupPoint:
    """Endpoint at time 1 of the magnetic geodesic with initial data (g, v)."""
    v = sys.algebra.check_vector(v)
    if np.all(v == 0.0):
        return g
    speed = max(1.0, float(np.linalg.norm(v)))
    dt = 1.0 / max(200, int(100 * speed))
    traj = integrate_magnetic(sys, v, g, T=1.0, dt=dt)
    return traj.group_points[-1]


def legendre(sys: MagneticSystem, u: np.ndarray) -> np.ndarray:
    """Legendre transform of the magnetic Lagrangian: p = A u - alpha."""
    return sys.A.apply(np.asarray(u, dtype=float)) - sys.alpha


def inverse_legendre(sys: MagneticSystem, p: np.ndarray) -> np.ndarray:
    """u = A^-1 (p + alpha)."""
    return sys.A.solve(np.asarray(p, dtype=float) + sys.alpha)


def hamiltonian(sys: MagneticSystem, pp: PhasePoint) -> float:
    """H(g, p) = 1/2 |p + alpha|^2 in the dual metric norm."""
    return 0.5 * dual_norm(sys.A, pp.p + sys.alpha) ** 2


def integrate_hamiltonian(sys: MagneticSystem, pp0: PhasePoint,
                          T: float = 1.0, dt: float = 1e-3) -> Trajectory:
    """RK4 on the right-trivialized momentum: dp/dt = -ad*_u p."""
    p0 = np.asarray(pp0.p, dtype=float)

    def rhs(p):
        u = inverse_legendre(sys, p)
        return -coad(u, p, sys.algebra)

    u0 = inverse_legendre(sys, p0)
    if np.all(u0 == 0.0):
        n = int(round(T / dt)) + 1
        times = np.arange(n) * dt
        return Trajectory(times, [pp0.g] * n, np.zeros((n, u0.size)),
                          np.zeros(n), {"integrator": "hamiltonian_rk4",
                                        "dt": dt, "T": T,
                                        "system": sys.system_hash()})
    return _integrate_reduced(sys, rhs, p0, pp0.g, T, dt,
                              lambda p: inverse_legendre(sys, p),
                              "hamiltonian_rk4")
