"""Lie algebra and Lie group kernels for a fixed catalog of desk-scale groups.

Supported groups: so3, heisenberg3, se2 and a Fourier-truncated model of the
vector fields on the circle (vect_s1_truncated).  All operations are pure
functions on immutable value types; the bracket is encoded once as a dense
structure-constant tensor c[i, j, k] with [e_i, e_j] = sum_k c[i,j,k] e_k.

Velocities are right-trivialized throughout: u = (d/dt g) g^{-1}, and the
discrete evolution step is g_{i+1} = exp(dt xi_i) g_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MATRIX_GROUPS = ("so3", "heisenberg3", "se2")
CATALOG = MATRIX_GROUPS + ("vect_s1_truncated",)


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebra:
    """A finite-dimensional Lie algebra in a fixed basis."""

    name: str
    dim: int
    structure_constants: np.ndarray  # c[i, j, k]
    basis_matrices: np.ndarray | None = None  # (dim, n, n) for matrix groups
    modes: int | None = None          # retained Fourier modes N (vect case)
    grid_size: int | None = None      # collocation grid size M (vect case)
    bracket_sign: float = 1.0         # convention flag for the vect bracket

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        if c.shape != (self.dim, self.dim, self.dim):
            raise ValueError("structure constants must be (dim, dim, dim)")
        anti = np.max(np.abs(c + np.swapaxes(c, 0, 1)))
        if anti > 0:
            raise ValueError(f"structure constants not antisymmetric: {anti}")
        object.__setattr__(self, "structure_constants", c)

    @property
    def is_matrix_group(self) -> bool:
        return self.name in MATRIX_GROUPS

    def check_vector(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatchError(
                f"expected vector of length {self.dim}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vector has non-finite entries")
        return v


@dataclass(frozen=True)
class GroupPoint:
    """A group element: a matrix, or grid samples of a circle diffeomorphism.

    In the diffeomorphism case rep[j] = phi(x_j) on the uniform grid, with
    phi(x + 2*pi) = phi(x) + 2*pi, so rep - grid is periodic.
    """

    group: str
    rep: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rep", np.asarray(self.rep, dtype=float))


@dataclass(frozen=True)
class ControlPath:
    """Piecewise-constant algebra-valued controls discretizing an H^1 path."""

    controls: np.ndarray  # (N, dim)
    dt: float
    start: GroupPoint | None = None
    declared_target: GroupPoint | None = None

    def __post_init__(self):
        c = np.asarray(self.controls, dtype=float)
        if c.ndim != 2 or c.shape[0] == 0:
            raise ValueError("controls must be a non-empty (N, dim) array")
        if not np.all(np.isfinite(c)):
            raise ValueError("controls have non-finite entries")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "controls", c)

    @property
    def total_time(self) -> float:
        return self.dt * self.controls.shape[0]


# ---------------------------------------------------------------------------
# catalog constructors

def so3() -> LieAlgebra:
    """so(3) in the cross-product basis: [e_i, e_j] = eps_ijk e_k."""
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    basis = np.array([
        [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
        [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
    ], dtype=float)
    return LieAlgebra("so3", 3, c, basis_matrices=basis)


def heisenberg3() -> LieAlgebra:
    """The 3-d Heisenberg algebra: [e1, e2] = e3, e3 central."""
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    c[1, 0, 2] = -1.0
    basis = np.zeros((3, 3, 3))
    basis[0, 0, 1] = 1.0  # e1 -> E_{12}
    basis[1, 1, 2] = 1.0  # e2 -> E_{23}
    basis[2, 0, 2] = 1.0  # e3 -> E_{13}
    return LieAlgebra("heisenberg3", 3, c, basis_matrices=basis)


def se2() -> LieAlgebra:
    """se(2): e1 rotation, e2/e3 translations; [e1,e2]=e3, [e1,e3]=-e2."""
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    c[1, 0, 2] = -1.0
    c[0, 2, 1] = -1.0
    c[2, 0, 1] = 1.0
    basis = np.array([
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
        [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
    ], dtype=float)
    return LieAlgebra("se2", 3, c, basis_matrices=basis)


def _trig_basis_matrix(modes: int, x: np.ndarray) -> np.ndarray:
    """Rows: L2-orthonormal trig basis evaluated at points x.

    b_0 = 1/sqrt(2 pi), b_{2k-1} = cos(kx)/sqrt(pi), b_{2k} = sin(kx)/sqrt(pi).
    """
    dim = 2 * modes + 1
    B = np.empty((dim, x.size))
    B[0] = 1.0 / math.sqrt(2.0 * math.pi)
    for k in range(1, modes + 1):
        B[2 * k - 1] = np.cos(k * x) / math.sqrt(math.pi)
        B[2 * k] = np.sin(k * x) / math.sqrt(math.pi)
    return B


def _trig_basis_deriv(modes: int, x: np.ndarray) -> np.ndarray:
    dim = 2 * modes + 1
    D = np.zeros((dim, x.size))
    for k in range(1, modes + 1):
        D[2 * k - 1] = -k * np.sin(k * x) / math.sqrt(math.pi)
        D[2 * k] = k * np.cos(k * x) / math.sqrt(math.pi)
    return D


def vect_s1(modes: int, grid_size: int | None = None,
            bracket_sign: float = 1.0) -> LieAlgebra:
    """Truncated Vect(S^1): trig polynomials of degree <= modes.

    The bracket [u, v] = u v_x - v u_x is evaluated pseudospectrally on a
    grid large enough to resolve the degree-2N product exactly, then
    Galerkin-projected back onto the retained modes.  The truncation breaks
    the Jacobi identity; the residual is reported, not asserted.
    """
    if modes < 1:
        raise ValueError("modes must be >= 1")
    dim = 2 * modes + 1
    M = grid_size if grid_size is not None else 4 * modes + 4
    if M < 4 * modes + 2:
        raise ValueError("grid_size must be at least 4*modes + 2")
    x = 2.0 * math.pi * np.arange(M) / M
    B = _trig_basis_matrix(modes, x)
    D = _trig_basis_deriv(modes, x)
    # bracket of basis pairs on the grid, projected by discrete L2 pairing
    # (exact for trig polynomials of degree < M/2)
    w = 2.0 * math.pi / M
    c = np.zeros((dim, dim, dim))
    for i in range(dim):
        for j in range(i + 1, dim):
            vals = bracket_sign * (B[i] * D[j] - B[j] * D[i])
            coords = w * (B @ vals)
            c[i, j] = coords
            c[j, i] = -coords
    return LieAlgebra("vect_s1_truncated", dim, c, modes=modes, grid_size=M,
                      bracket_sign=bracket_sign)


def make_algebra(name: str, **kwargs) -> LieAlgebra:
    if name == "so3":
        return so3()
    if name == "heisenberg3":
        return heisenberg3()
    if name == "se2":
        return se2()
    if name == "vect_s1_truncated":
        return vect_s1(**kwargs)
    raise ValueError(f"unknown group tag {name!r}; catalog: {CATALOG}")


# ---------------------------------------------------------------------------
# algebra operations

def bracket(a: np.ndarray, b: np.ndarray, alg: LieAlgebra) -> np.ndarray:
    """[a, b] via structure constants; bilinear, antisymmetric."""
    a = alg.check_vector(a)
    b = alg.check_vector(b)
    return np.einsum("i,j,ijk->k", a, b, alg.structure_constants)


def coad(u: np.ndarray, m: np.ndarray, alg: LieAlgebra) -> np.ndarray:
    """The coadjoint operator: <coad(u, m), v> = <m, [u, v]>."""
    u = alg.check_vector(u)
    m = alg.check_vector(m)
    # [u, e_j] = sum_{i,k} u_i c[i,j,k] e_k, so (ad*_u m)_j = u_i c[i,j,k] m_k
    return np.einsum("i,ijk,k->j", u, alg.structure_constants, m)


def jacobi_residual(alg: LieAlgebra) -> float:
    """Max-norm residual of [[ei,ej],ek] + [[ej,ek],ei] + [[ek,ei],ej]."""
    c = alg.structure_constants
    t = np.einsum("ijm,mkl->ijkl", c, c)
    res = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# group operations

def identity(alg: LieAlgebra) -> GroupPoint:
    if alg.is_matrix_group:
        n = alg.basis_matrices.shape[1]
        return GroupPoint(alg.name, np.eye(n))
    x = 2.0 * math.pi * np.arange(alg.grid_size) / alg.grid_size
    return GroupPoint(alg.name, x)


def to_matrix(xi: np.ndarray, alg: LieAlgebra) -> np.ndarray:
    """Algebra coordinates -> matrix representation (matrix groups only)."""
    return np.einsum("i,ijk->jk", alg.check_vector(xi), alg.basis_matrices)


def _exp_so3_batch(xis: np.ndarray) -> np.ndarray:
    """Rodrigues' formula, vectorized over a stack of (n, 3) vectors."""
    theta = np.linalg.norm(xis, axis=-1)
    small = theta < 1e-8
    th = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta ** 2 / 6.0, np.sin(th) / th)
    b = np.where(small, 0.5 - theta ** 2 / 24.0, (1.0 - np.cos(th)) / th ** 2)
    n = xis.shape[0]
    K = np.zeros((n, 3, 3))
    K[:, 0, 1] = -xis[:, 2]; K[:, 1, 0] = xis[:, 2]
    K[:, 0, 2] = xis[:, 1];  K[:, 2, 0] = -xis[:, 1]
    K[:, 1, 2] = -xis[:, 0]; K[:, 2, 1] = xis[:, 0]
    K2 = K @ K
    return np.eye(3) + a[:, None, None] * K + b[:, None, None] * K2


def _exp_heis_batch(xis: np.ndarray) -> np.ndarray:
    n = xis.shape[0]
    g = np.tile(np.eye(3), (n, 1, 1))
    g[:, 0, 1] = xis[:, 0]
    g[:, 1, 2] = xis[:, 1]
    g[:, 0, 2] = xis[:, 2] + 0.5 * xis[:, 0] * xis[:, 1]
    return g


def _exp_se2_batch(xis: np.ndarray) -> np.ndarray:
    theta = xis[:, 0]
    small = np.abs(theta) < 1e-8
    th = np.where(small, 1.0, theta)
    s = np.where(small, 1.0 - theta ** 2 / 6.0, np.sin(th) / th)
    c1 = np.where(small, theta / 2.0, (1.0 - np.cos(th)) / th)
    n = xis.shape[0]
    g = np.zeros((n, 3, 3))
    g[:, 0, 0] = np.cos(theta); g[:, 0, 1] = -np.sin(theta)
    g[:, 1, 0] = np.sin(theta); g[:, 1, 1] = np.cos(theta)
    g[:, 0, 2] = s * xis[:, 1] - c1 * xis[:, 2]
    g[:, 1, 2] = c1 * xis[:, 1] + s * xis[:, 2]
    g[:, 2, 2] = 1.0
    return g


def exp_batch(xis: np.ndarray, alg: LieAlgebra) -> np.ndarray:
    """Closed-form matrix exponential on a stack of algebra vectors."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if alg.name == "so3":
        return _exp_so3_batch(xis)
    if alg.name == "heisenberg3":
        return _exp_heis_batch(xis)
    if alg.name == "se2":
        return _exp_se2_batch(xis)
    raise ValueError(f"exp_batch needs a matrix group, got {alg.name}")


def field_values(coords: np.ndarray, alg: LieAlgebra,
                 points: np.ndarray) -> np.ndarray:
    """Evaluate a truncated vector field at arbitrary circle points."""
    return _trig_basis_matrix(alg.modes, np.asarray(points)).T @ coords


def _flow_points(z: np.ndarray, xi: np.ndarray, alg: LieAlgebra,
                 time: float) -> np.ndarray:
    """RK4 flow of dz/dt = xi(z) from points z; substeps scale with |xi|."""
    sup = float(np.max(np.abs(field_values(xi, alg, z)))) if z.size else 0.0
    nsub = 16 * max(1, math.ceil(sup * abs(time)))
    h = time / nsub
    for _ in range(nsub):
        k1 = field_values(xi, alg, z)
        k2 = field_values(xi, alg, z + 0.5 * h * k1)
        k3 = field_values(xi, alg, z + 0.5 * h * k2)
        k4 = field_values(xi, alg, z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


def group_exp(xi: np.ndarray, alg: LieAlgebra) -> GroupPoint:
    """exp: matrix exponential, or time-1 flow of the field (vect case)."""
    xi = alg.check_vector(xi)
    if alg.is_matrix_group:
        return GroupPoint(alg.name, exp_batch(xi[None, :], alg)[0])
    z0 = identity(alg).rep
    return GroupPoint(alg.name, _flow_points(z0, xi, alg, 1.0))


def _fourier_interp(values: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation of periodic grid samples."""
    M = values.size
    coeffs = np.fft.fft(values) / M
    k = np.fft.fftfreq(M, d=1.0 / M)
    # symmetrize the Nyquist mode for real interpolants
    if M % 2 == 0:
        coeffs[M // 2] *= 0.5
        phases = np.exp(1j * np.outer(queries, k))
        out = phases @ coeffs + np.conj(phases[:, M // 2]) * coeffs[M // 2]
    else:
        phases = np.exp(1j * np.outer(queries, k))
        out = phases @ coeffs
    return out.real


def compose(g: GroupPoint, h: GroupPoint, alg: LieAlgebra) -> GroupPoint:
    """Group product g * h (matrix product / composition phi_g o phi_h)."""
    if alg.is_matrix_group:
        return GroupPoint(alg.name, g.rep @ h.rep)
    x = identity(alg).rep
    disp = g.rep - x  # periodic displacement of phi_g
    return GroupPoint(alg.name, h.rep + _fourier_interp(disp, h.rep))


def group_inverse(g: GroupPoint, alg: LieAlgebra) -> GroupPoint:
    if alg.is_matrix_group:
        return GroupPoint(alg.name, np.linalg.inv(g.rep))
    raise NotImplementedError("inverse for diffeomorphisms is not needed")


def group_log(g: GroupPoint, alg: LieAlgebra) -> np.ndarray:
    """Inverse of group_exp on matrix groups (principal branch)."""
    m = g.rep
    if alg.name == "so3":
        cos_t = np.clip((np.trace(m) - 1.0) / 2.0, -1.0, 1.0)
        theta = math.acos(cos_t)
        if theta < 1e-8:
            w = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0],
                          m[1, 0] - m[0, 1]]) * 0.5
            return w
        if theta > math.pi - 1e-6:
            import scipy.linalg
            L = np.real(scipy.linalg.logm(m))
            return np.array([L[2, 1], L[0, 2], L[1, 0]])
        f = theta / (2.0 * math.sin(theta))
        return f * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0],
                             m[1, 0] - m[0, 1]])
    if alg.name == "heisenberg3":
        a, b = m[0, 1], m[1, 2]
        return np.array([a, b, m[0, 2] - 0.5 * a * b])
    if alg.name == "se2":
        theta = math.atan2(m[1, 0], m[0, 0])
        if abs(theta) < 1e-8:
            s, c1 = 1.0 - theta ** 2 / 6.0, theta / 2.0
        else:
            s = math.sin(theta) / theta
            c1 = (1.0 - math.cos(theta)) / theta
        V = np.array([[s, -c1], [c1, s]])
        v = np.linalg.solve(V, m[:2, 2])
        return np.array([theta, v[0], v[1]])
    raise NotImplementedError(f"group_log not available for {alg.name}")


def constraint_residual(g: GroupPoint, alg: LieAlgebra) -> float:
    """Distance of g.rep from the group's defining constraints."""
    m = g.rep
    if alg.name == "so3":
        return float(max(np.max(np.abs(m.T @ m - np.eye(3))),
                         abs(np.linalg.det(m) - 1.0)))
    if alg.name == "heisenberg3":
        mask = np.tril(np.ones((3, 3)), -1).astype(bool)
        diag_res = np.max(np.abs(np.diag(m) - 1.0))
        return float(max(np.max(np.abs(m[mask])), diag_res))
    if alg.name == "se2":
        R = m[:2, :2]
        return float(max(np.max(np.abs(R.T @ R - np.eye(2))),
                         np.max(np.abs(m[2] - np.array([0.0, 0.0, 1.0])))))
    # diffeomorphism: orientation preservation, phi' > 0
    x = identity(alg).rep
    disp = m - x
    M = m.size
    k = np.fft.fftfreq(M, d=1.0 / M)
    dphi = 1.0 + np.real(np.fft.ifft(1j * k * np.fft.fft(disp)))
    return float(max(0.0, -np.min(dphi)))


def evolve(path: ControlPath, alg: LieAlgebra,
           g0: GroupPoint | None = None) -> GroupPoint:
    """Discrete evolution: g_N with g_{i+1} = exp(dt xi_i) g_i."""
    g = g0 if g0 is not None else (path.start or identity(alg))
    if alg.is_matrix_group:
        steps = exp_batch(path.dt * path.controls, alg)
        m = g.rep
        for E in steps:
            m = E @ m
        return GroupPoint(alg.name, m)
    z = g.rep
    for xi in path.controls:
        z = _flow_points(z, xi, alg, path.dt)
    return GroupPoint(alg.name, z)
