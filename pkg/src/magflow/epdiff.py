"""Pseudospectral integration of the magnetic EPDiff equation on the circle.

On S^1 the momentum form of the equation collapses to
    m_t = -(u m_x + 2 u_x m) - (a_x u + 2 a u_x),     m = A_s u,
where A_s is the Fourier multiplier (1 + k^2)^s and a is the kernel of the
right-invariant one-form alpha(u) = <a, u>_{L2}; the magnetic forcing
-A_s(Y u) equals -(a_x u + 2 a u_x) because Y = A_s^{-1} applied to exactly
that covector field.  Products are formed on a padded grid (2/3-rule
dealiasing) and truncated back to the retained band.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


class CFLError(ValueError):
    def __init__(self, dt: float, required_dt: float):
        super().__init__(f"dt={dt} violates the CFL bound; need dt <= "
                         f"{required_dt}")
        self.required_dt = required_dt


class BlowUpError(RuntimeError):
    def __init__(self, message: str, last_valid_time: float, last_state):
        super().__init__(message)
        self.last_valid_time = last_valid_time
        self.last_state = last_state


@dataclass(frozen=True)
class FourierField:
    """A real field on S^1 stored as modes -N..N (Hermitian-symmetric)."""

    coeffs: np.ndarray  # complex, length 2N+1, index k+N holds mode k
    grid_size: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coeffs must have odd length 2N+1")
        n = c.size // 2
        if self.grid_size < 4 * n:
            raise ValueError("grid_size must be at least 4N for dealiasing")
        herm = np.max(np.abs(c - np.conj(c[::-1])))
        if herm > 1e-13 * max(1.0, np.max(np.abs(c))):
            raise ValueError(f"Hermitian symmetry violated: residual {herm}")
        object.__setattr__(self, "coeffs", c)

    @property
    def modes(self) -> int:
        return self.coeffs.size // 2

    @property
    def wavenumbers(self) -> np.ndarray:
        n = self.modes
        return np.arange(-n, n + 1)

    @staticmethod
    def from_function(f, modes: int, grid_size: int | None = None
                      ) -> "FourierField":
        M = grid_size if grid_size is not None else 4 * modes
        x = 2.0 * math.pi * np.arange(2 * M) / (2 * M)
        return FourierField.from_grid(f(x), modes, M)

    @staticmethod
    def from_grid(values: np.ndarray, modes: int,
                  grid_size: int | None = None) -> "FourierField":
        values = np.asarray(values, dtype=float)
        M = grid_size if grid_size is not None else 4 * modes
        full = np.fft.fft(values) / values.size
        c = np.empty(2 * modes + 1, dtype=complex)
        for k in range(-modes, modes + 1):
            c[k + modes] = full[k % values.size]
        return FourierField(c, M)

    def grid_values(self, grid_size: int | None = None) -> np.ndarray:
        M = grid_size if grid_size is not None else self.grid_size
        return _to_grid(self.coeffs, M)

    def derivative(self) -> "FourierField":
        return FourierField(1j * self.wavenumbers * self.coeffs,
                            self.grid_size)

    def l2_norm(self) -> float:
        return math.sqrt(2.0 * math.pi * float(np.sum(np.abs(self.coeffs)
                                                      ** 2)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "re", "im"])
            for k, c in zip(self.wavenumbers, self.coeffs):
                writer.writerow([int(k), repr(float(c.real)),
                                 repr(float(c.imag))])


@dataclass(frozen=True)
class SobolevInertia:
    """The inertia operator (1 - Laplacian)^s as a Fourier multiplier."""

    s: float

    def __post_init__(self):
        if self.s < 1.0:
            raise ValueError("Sobolev order must be >= 1")

    def multiplier(self, k: np.ndarray) -> np.ndarray:
        return (1.0 + np.asarray(k, dtype=float) ** 2) ** self.s

    def apply(self, u: FourierField) -> FourierField:
        return FourierField(self.multiplier(u.wavenumbers) * u.coeffs,
                            u.grid_size)

    def solve(self, m: FourierField) -> FourierField:
        return FourierField(m.coeffs / self.multiplier(m.wavenumbers),
                            m.grid_size)


def _to_grid(coeffs: np.ndarray, M: int) -> np.ndarray:
    n = coeffs.size // 2
    full = np.zeros(M, dtype=complex)
    for k in range(-n, n + 1):
        full[k % M] = coeffs[k + n]
    return np.real(np.fft.ifft(full) * M)


def _from_grid(values: np.ndarray, n: int) -> np.ndarray:
    M = values.size
    full = np.fft.fft(values) / M
    c = np.empty(2 * n + 1, dtype=complex)
    for k in range(-n, n + 1):
        c[k + n] = full[k % M]
    return c


@dataclass
class EPDiffTrajectory:
    """Time-sampled spectral snapshots with an energy series."""

    times: np.ndarray
    snapshots: np.ndarray  # (n_times, 2N+1) complex
    energies: np.ndarray
    modes: int
    grid_size: int
    metadata: dict = field(default_factory=dict)

    def field_at(self, index: int) -> FourierField:
        return FourierField(self.snapshots[index], self.grid_size)

    @property
    def energy_drift(self) -> float:
        e0 = self.energies[0]
        if e0 == 0.0:
            return float(np.max(np.abs(self.energies)))
        return float(np.max(np.abs(self.energies - e0)) / abs(e0))

    def energy_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "E"])
            for t, e in zip(self.times, self.energies):
                writer.writerow([repr(float(t)), repr(float(e))])

    def snapshots_to_csv(self, path) -> None:
        n = self.modes
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"{p}{k}" for k in range(-n, n + 1)
                                     for p in ("re", "im")])
            for t, snap in zip(self.times, self.snapshots):
                row = [repr(float(t))]
                for c in snap:
                    row += [repr(float(c.real)), repr(float(c.imag))]
                writer.writerow(row)


def energy(u: FourierField, A: SobolevInertia) -> float:
    """E = 1/2 <A_s u, u>_{L2} = pi * sum_k (1+k^2)^s |u_k|^2."""
    mult = A.multiplier(u.wavenumbers)
    return math.pi * float(np.sum(mult * np.abs(u.coeffs) ** 2))


def _rhs_coeffs(uc: np.ndarray, n: int, M: int, mult: np.ndarray,
                ac: np.ndarray, dealias: bool) -> np.ndarray:
    """du/dt in coefficient space; products on the (optionally) padded grid."""
    k = np.arange(-n, n + 1)
    grid = M if dealias else 2 * n + 1
    u = _to_grid(uc, grid)
    ux = _to_grid(1j * k * uc, grid)
    mc = mult * uc
    m = _to_grid(mc, grid)
    mx = _to_grid(1j * k * mc, grid)
    a = _to_grid(ac, grid)
    ax = _to_grid(1j * k * ac, grid)
    mt_grid = -(u * mx + 2.0 * ux * m) - (ax * u + 2.0 * a * ux)
    mt = _from_grid(mt_grid, n)
    return mt / mult


def lorentz_field(u: FourierField, A: SobolevInertia,
                  a: FourierField) -> FourierField:
    """Y u = A_s^{-1}(a_x u + 2 a u_x), the Lorentz force on vector fields."""
    n, M = u.modes, u.grid_size
    k = u.wavenumbers
    ug = _to_grid(u.coeffs, M)
    uxg = _to_grid(1j * k * u.coeffs, M)
    ag = _to_grid(a.coeffs, M)
    axg = _to_grid(1j * k * a.coeffs, M)
    flat = _from_grid(axg * ug + 2.0 * ag * uxg, n)
    return A.solve(FourierField(flat, M))


def epdiff_rhs(u: FourierField, A: SobolevInertia, a: FourierField,
               dealias: bool = True) -> FourierField:
    """Right-hand side u_t = A_s^{-1} m_t of the magnetic EPDiff equation."""
    if u.modes != a.modes:
        raise ValueError("u and a must share the retained band")
    mult = A.multiplier(u.wavenumbers)
    return FourierField(_rhs_coeffs(u.coeffs, u.modes, u.grid_size, mult,
                                    a.coeffs, dealias), u.grid_size)


def integrate_epdiff(u0: FourierField, A: SobolevInertia, a: FourierField,
                     T: float, dt: float, dealias: bool = True,
                     sample_every: int = 1) -> EPDiffTrajectory:
    """RK4 in spectral space with conserved-energy recording.

    Enforces the CFL-type bound dt * max|u| * N <= 0.5 on the initial data
    and monitors it along the run.
    """
    n, M = u0.modes, u0.grid_size
    mult = A.multiplier(u0.wavenumbers)
    ac = a.coeffs
    sup0 = float(np.max(np.abs(u0.grid_values())))
    if sup0 > 0 and dt * sup0 * n > 0.5:
        raise CFLError(dt, 0.5 / (sup0 * n))

    def rhs(c):
        return _rhs_coeffs(c, n, M, mult, ac, dealias)

    n_steps = int(round(T / dt))
    uc = u0.coeffs.copy()
    times = [0.0]
    snaps = [uc.copy()]
    energies = [math.pi * float(np.sum(mult * np.abs(uc) ** 2))]
    for i in range(n_steps):
        k1 = rhs(uc)
        k2 = rhs(uc + 0.5 * dt * k1)
        k3 = rhs(uc + 0.5 * dt * k2)
        k4 = rhs(uc + dt * k3)
        uc_new = uc + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(uc_new)):
            raise BlowUpError(f"non-finite state at t={(i + 1) * dt}",
                              i * dt, FourierField(uc, M))
        sup = float(np.max(np.abs(_to_grid(uc_new, M))))
        if dt * sup * n > 1.0:
            raise CFLError(dt, 0.5 / (sup * n))
        uc = uc_new
        if (i + 1) % sample_every == 0 or i + 1 == n_steps:
            times.append((i + 1) * dt)
            snaps.append(uc.copy())
            energies.append(math.pi * float(np.sum(mult * np.abs(uc) ** 2)))
    meta = {"integrator": "epdiff_rk4", "dt": dt, "T": T, "s": A.s,
            "dealias": dealias}
    return EPDiffTrajectory(np.asarray(times), np.asarray(snaps),
                            np.asarray(energies), n, M, meta)


def decay_monitor(traj: EPDiffTrajectory, band: tuple[int, int]) -> dict:
    """Spectral-slope stability of log|u_k| vs log k over a mode band.

    A qualitative witness that evolution neither gains nor loses smoothness:
    the fitted slope should stay near its initial value.
    """
    lo, hi = band
    if lo < 1 or hi > traj.modes or hi - lo < 2:
        raise ValueError("band must contain >= 3 modes within 1..N")
    ks = np.arange(lo, hi + 1)
    logk = np.log(ks)
    slopes = []
    for snap in traj.snapshots:
        mags = np.abs(snap[ks + traj.modes])
        logm = np.log(np.maximum(mags, 1e-300))
        slope = np.polyfit(logk, logm, 1)[0]
        slopes.append(slope)
    slopes = np.asarray(slopes)
    return {"band": [int(lo), int(hi)], "slopes": slopes,
            "initial_slope": float(slopes[0]),
            "max_deviation": float(np.max(np.abs(slopes - slopes[0])))}
