"""The magnetic structure at the identity.

An exact right-invariant magnetic system is parametrized by an inertia
operator A (the metric at the identity) and a covector alpha; the two-form is
sigma = d alpha, whose value on right-invariant extensions reduces to
sigma(u, v) = -alpha([u, v]).  The Lorentz force Y is the metric-dual of
sigma, and the Mane critical value is a finite equality-constrained convex
quadratic program over the annihilator of the derived subalgebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import LieAlgebra, bracket, coad


@dataclass(frozen=True)
class InertiaOperator:
    """Symmetric positive-definite operator representing the metric at e."""

    matrix: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("inertia operator must be a square matrix")
        sym = np.max(np.abs(m - m.T))
        if sym > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError(f"inertia operator not symmetric: residual {sym}")
        m = 0.5 * (m + m.T)
        try:
            chol = np.linalg.cholesky(m)
        except np.linalg.LinAlgError as exc:
            raise ValueError("inertia operator not positive definite") from exc
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def solve(self, p: np.ndarray) -> np.ndarray:
        y = scipy.linalg.solve_triangular(self._chol, p, lower=True)
        return scipy.linalg.solve_triangular(self._chol.T, y, lower=False)

    @staticmethod
    def identity(dim: int) -> "InertiaOperator":
        return InertiaOperator(np.eye(dim))

    @staticmethod
    def sobolev(alg: LieAlgebra, s: float) -> "InertiaOperator":
        """(1 - Laplacian)^s as a multiplier, diagonal in the trig basis."""
        if alg.modes is None:
            raise ValueError("sobolev inertia requires vect_s1_truncated")
        mult = [1.0]
        for k in range(1, alg.modes + 1):
            mult += [(1.0 + k * k) ** s] * 2
        return InertiaOperator(np.diag(mult))


@dataclass(frozen=True)
class MagneticSystem:
    """A group tag, metric at the identity, and right-invariant primitive.

    Induces sigma = d alpha and the Lorentz force Y with G(Yu, v) = sigma(u,v).
    """

    algebra: LieAlgebra
    A: InertiaOperator
    alpha: np.ndarray
    kappa_default: float | None = None

    def __post_init__(self):
        a = self.algebra.check_vector(self.alpha)
        if self.A.dim != self.algebra.dim:
            raise ValueError("inertia operator dimension mismatch")
        object.__setattr__(self, "alpha", a)

    def system_hash(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(self.algebra.name.encode())
        h.update(self.A.matrix.tobytes())
        h.update(self.alpha.tobytes())
        return h.hexdigest()[:16]


def kinetic_energy(A: InertiaOperator, u: np.ndarray) -> float:
    """E(u) = 1/2 <A u, u>."""
    u = np.asarray(u, dtype=float)
    return 0.5 * float(u @ A.apply(u))


def metric_norm(A: InertiaOperator, u: np.ndarray) -> float:
    return math.sqrt(max(0.0, 2.0 * kinetic_energy(A, u)))


def dual_norm(A: InertiaOperator, p: np.ndarray) -> float:
    """Operator norm of the covector p induced by the metric: sqrt(p A^-1 p)."""
    p = np.asarray(p, dtype=float)
    return math.sqrt(max(0.0, float(p @ A.solve(p))))


def sigma_at_identity(sys: MagneticSystem, u: np.ndarray,
                      v: np.ndarray) -> float:
    """sigma(u, v) = -<alpha, [u, v]> for the exact form sigma = d alpha."""
    return -float(sys.alpha @ bracket(u, v, sys.algebra))


def sigma_flat(sys: MagneticSystem, u: np.ndarray) -> np.ndarray:
    """The covector sigma(u, .); equals -coad(u, alpha)."""
    return -coad(u, sys.alpha, sys.algebra)


def lorentz(sys: MagneticSystem, u: np.ndarray) -> np.ndarray:
    """Lorentz force Y u = A^-1 sigma(u, .); skew w.r.t. the metric."""
    return sys.A.solve(sigma_flat(sys, u))


def derived_subalgebra_basis(alg: LieAlgebra) -> np.ndarray:
    """Orthonormal basis (columns) of span{[e_i, e_j]}."""
    c = alg.structure_constants.reshape(alg.dim * alg.dim, alg.dim)
    u, sv, _ = np.linalg.svd(c.T, full_matrices=False)
    tol = max(c.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    return u[:, :rank]


def annihilator_basis(alg: LieAlgebra) -> np.ndarray:
    """Orthonormal basis (columns) of Ann([g, g]) in coordinate pairing."""
    c = alg.structure_constants.reshape(alg.dim * alg.dim, alg.dim)
    return scipy.linalg.null_space(c)


def mane_critical_value(sys: MagneticSystem) -> tuple[float, np.ndarray]:
    """Mane critical value and the optimal primitive shift.

    Any two right-invariant primitives of sigma differ by a covector
    vanishing on the derived subalgebra, so
        c = min_{beta in Ann([g,g])} 1/2 * dual_norm(A, alpha + beta)^2,
    a convex QP solved by direct factorization.  Returns (c, beta_star).
    """
    Z = annihilator_basis(sys.algebra)
    if Z.shape[1] == 0:
        beta = np.zeros(sys.algebra.dim)
    else:
        Ainv_alpha = sys.A.solve(sys.alpha)
        Ainv_Z = np.column_stack([sys.A.solve(Z[:, j])
                                  for j in range(Z.shape[1])])
        y = np.linalg.solve(Z.T @ Ainv_Z, -Z.T @ Ainv_alpha)
        beta = Z @ y
    c = 0.5 * dual_norm(sys.A, sys.alpha + beta) ** 2
    return c, beta


def mane_certificate(sys: MagneticSystem, beta: np.ndarray) -> float:
    """Norm of the QP gradient restricted to the annihilator at beta."""
    Z = annihilator_basis(sys.algebra)
    if Z.shape[1] == 0:
        return 0.0
    grad = sys.A.solve(sys.alpha + beta)
    return float(np.linalg.norm(Z.T @ grad))


def optimal_primitive(sys: MagneticSystem) -> np.ndarray:
    """alpha + beta_star, the primitive of minimal dual norm."""
    _, beta = mane_critical_value(sys)
    return sys.alpha + beta
