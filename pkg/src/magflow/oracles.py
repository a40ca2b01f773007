"""Independent reference implementations used as oracles.

Each routine here deliberately avoids the code paths of the main modules:
the Camassa-Holm solver works in the velocity form on a plain FFT grid, the
Mane value is found by nested grid search rather than the QP, and the so(3)
closed forms come from the rotation-group structure directly.
"""

from __future__ import annotations

import math

import numpy as np


def so3_magnetic_closed_form(u0: np.ndarray, strength: float,
                             times: np.ndarray) -> np.ndarray:
    """u(t) for the bi-invariant so(3) system with alpha = strength * e3.

    The Euler term vanishes (A = Id), so du/dt = -Y u = strength * e3 x u
    and u precesses about the third axis at rate `strength`.
    """
    out = np.empty((times.size, 3))
    for i, t in enumerate(times):
        ang = strength * t
        ct, st = math.cos(ang), math.sin(ang)
        R = np.array([[ct, -st, 0.0], [st, ct, 0.0], [0.0, 0.0, 1.0]])
        out[i] = R @ u0
    return out


def rigid_body_euler(m0: np.ndarray, inertia_diag: np.ndarray, T: float,
                     dt: float) -> np.ndarray:
    """Plain RK4 on the rigid-body equations dm/dt = m x Omega, Omega = I^-1 m."""
    def rhs(m):
        return np.cross(m, m / inertia_diag)

    n = int(round(T / dt))
    m = np.asarray(m0, dtype=float)
    out = np.empty((n + 1, 3))
    out[0] = m
    for i in range(n):
        k1 = rhs(m)
        k2 = rhs(m + 0.5 * dt * k1)
        k3 = rhs(m + 0.5 * dt * k2)
        k4 = rhs(m + dt * k3)
        m = m + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = m
    return out


def mane_grid_search(A_matrix: np.ndarray, alpha: np.ndarray,
                     ann_basis: np.ndarray, half_width: float = 4.0,
                     rounds: int = 5, points: int = 41) -> float:
    """Nested grid search for min over beta in span(ann_basis) of
    1/2 (alpha+beta)^T A^-1 (alpha+beta)."""
    Ainv = np.linalg.inv(A_matrix)

    def value(y):
        v = alpha + ann_basis @ y
        return 0.5 * float(v @ Ainv @ v)

    k = ann_basis.shape[1]
    if k == 0:
        return value(np.zeros(0))
    center = np.zeros(k)
    width = half_width
    best = value(center)
    for _ in range(rounds):
        axes = [np.linspace(c - width, c + width, points) for c in center]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        vals = np.array([value(p) for p in pts])
        idx = int(np.argmin(vals))
        center = pts[idx]
        best = vals[idx]
        width = 2.0 * (2.0 * width / (points - 1))
    return best


def dual_norm_direction_search(A_matrix: np.ndarray, p: np.ndarray,
                               samples: int = 200000, seed: int = 0) -> float:
    """max p(v) / |v|_A over random directions (lower bound on the dual norm)."""
    rng = np.random.default_rng(seed)
    dim = p.size
    v = rng.standard_normal((samples, dim))
    num = v @ p
    den = np.sqrt(np.einsum("ni,ij,nj->n", v, A_matrix, v))
    return float(np.max(np.abs(num) / den))


def camassa_holm_velocity_form(u0_grid: np.ndarray, T: float,
                               dt: float) -> np.ndarray:
    """Camassa-Holm in velocity form on a plain periodic FFT grid.

    u_t = (1 - dxx)^{-1} [ -3 u u_x + 2 u_x u_xx + u u_xxx ],
    with spectral derivatives and no explicit band truncation.
    """
    M = u0_grid.size
    k = np.fft.fftfreq(M, d=1.0 / M)
    helm = 1.0 + k ** 2

    def dx(f, order=1):
        return np.real(np.fft.ifft((1j * k) ** order * np.fft.fft(f)))

    def rhs(u):
        ux = dx(u)
        uxx = dx(u, 2)
        uxxx = dx(u, 3)
        forcing = -3.0 * u * ux + 2.0 * ux * uxx + u * uxxx
        return np.real(np.fft.ifft(np.fft.fft(forcing) / helm))

    u = np.asarray(u0_grid, dtype=float).copy()
    n = int(round(T / dt))
    for _ in range(n):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return u
