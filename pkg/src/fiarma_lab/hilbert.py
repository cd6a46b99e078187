"""Finite model of a weighted L2 space and the operators acting on it.

A grid of points ``v_1..v_n`` with strictly positive quadrature weights
``w_1..w_n`` stands in for the underlying measure space.  Operators are
stored as dense complex matrices in the orthonormal basis
``e_i = indicator(v_i) / sqrt(w_i)``, so the Euclidean inner product of
coordinate vectors equals the weighted inner product of functions and all
Schatten norms reduce to plain matrix singular-value norms.  Conversions
between matrix entries and integral-operator kernel values are handled by
:func:`kernel_of` / :func:`from_kernel`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NotNormalError(ValueError):
    """Raised when an operation requires a normal operator and the input is not."""


class NotPSDError(ValueError):
    """Raised when an operation requires a positive semidefinite operator."""


class BranchCutError(ValueError):
    """Raised when a complex power is requested on the branch cut [1, inf)."""


@dataclass(eq=False)
class HilbertGrid:
    """Weighted point set: ``points`` carry quadrature weights ``weights``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).ravel()
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.points.size < 1:
            raise ValueError("grid needs at least one point")
        if self.points.shape != self.weights.shape:
            raise ValueError("points and weights must have the same length")
        if not np.all(self.weights > 0):
            raise ValueError("all grid weights must be strictly positive")

    @property
    def n(self) -> int:
        return self.points.size

    @classmethod
    def uniform(cls, n: int) -> "HilbertGrid":
        """Regular grid on (0, 1] with equal weights 1/n."""
        return cls(np.arange(1, n + 1) / n, np.full(n, 1.0 / n))


@dataclass(eq=False)
class LinearOperator:
    """Dense operator in the orthonormal weighted-coordinate basis."""

    entries: np.ndarray
    grid: HilbertGrid

    def __post_init__(self) -> None:
        self.entries = np.ascontiguousarray(self.entries, dtype=complex)
        n = self.grid.n
        if self.entries.shape != (n, n):
            raise ValueError(
                f"operator shape {self.entries.shape} does not match grid size {n}"
            )
        if not np.all(np.isfinite(self.entries.view(float))):
            raise ValueError("operator entries must be finite")

    @property
    def n(self) -> int:
        return self.grid.n

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.entries @ other.entries, self.grid)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.entries + other.entries, self.grid)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.entries - other.entries, self.grid)

    def __rmul__(self, scalar: complex) -> "LinearOperator":
        return LinearOperator(scalar * self.entries, self.grid)


@dataclass(eq=False)
class NormalDecomposition:
    """Unitary frame U and complex singular-value function d with U N U^H = diag(d)."""

    U: np.ndarray
    d: np.ndarray
    grid: HilbertGrid

    def reconstruct(self) -> LinearOperator:
        """Return U^H diag(d) U as an operator."""
        return LinearOperator(self.U.conj().T @ (self.d[:, None] * self.U), self.grid)

    def apply_scalar(self, values: np.ndarray) -> np.ndarray:
        """Matrix of U^H diag(values) U for scalar functions of the eigenvalues."""
        values = np.asarray(values, dtype=complex)
        return self.U.conj().T @ (values[:, None] * self.U)


def identity(grid: HilbertGrid) -> LinearOperator:
    return LinearOperator(np.eye(grid.n, dtype=complex), grid)


def zero_operator(grid: HilbertGrid) -> LinearOperator:
    return LinearOperator(np.zeros((grid.n, grid.n), dtype=complex), grid)


def adjoint(a: LinearOperator) -> LinearOperator:
    """Conjugate transpose; an involution."""
    return LinearOperator(a.entries.conj().T, a.grid)


def operator_norm(a: np.ndarray | LinearOperator) -> float:
    """Largest singular value (Schatten-infinity norm)."""
    m = a.entries if isinstance(a, LinearOperator) else np.asarray(a)
    if not m.size:
        return 0.0
    return float(np.linalg.norm(m, 2))


def schatten_norm(a: LinearOperator, p: float) -> float:
    """Singular-value norm ``(sum sigma_i^p)^(1/p)``; ``p=inf`` gives max sigma.

    ``p`` must satisfy ``p >= 1`` (the smaller-p classes are the smaller
    spaces: for p <= p' the p-norm dominates the p'-norm).
    """
    if not p >= 1:
        raise ValueError(f"Schatten order must satisfy p >= 1, got {p}")
    sigma = np.linalg.svd(a.entries, compute_uv=False)
    top = float(sigma[0]) if sigma.size else 0.0
    if top == 0.0:
        return 0.0
    if np.isinf(p):
        return top
    # factor out the top singular value so large p cannot overflow
    return top * float(np.sum((sigma / top) ** p)) ** (1.0 / p)


def is_normal(a: LinearOperator, tol: float = 1e-10) -> bool:
    """True when ``A A^H - A^H A`` vanishes relative to ``||A||^2``."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    m = a.entries
    comm = m @ m.conj().T - m.conj().T @ m
    scale = operator_norm(m) ** 2
    if scale == 0.0:
        return True
    return operator_norm(comm) <= tol * scale


def normal_decompose(n_op: LinearOperator, tol: float = 1e-10) -> NormalDecomposition:
    """Diagonalize a normal operator by a unitary: ``U N U^H = diag(d)``.

    Uses a complex Schur factorization, whose triangular factor is diagonal
    exactly when the input is normal.  The reconstruction
    ``U^H diag(d) U`` is checked against the input to ``tol * ||N||``.
    """
    if not is_normal(n_op, tol):
        raise NotNormalError("operator not normal")
    t, q = scipy.linalg.schur(n_op.entries, output="complex")
    d = np.diag(t).copy()
    u = q.conj().T
    dec = NormalDecomposition(u, d, n_op.grid)
    scale = operator_norm(n_op)
    err = operator_norm(dec.reconstruct().entries - n_op.entries)
    if scale > 0 and err > tol * scale:
        raise ArithmeticError(
            f"unitary diagonalization failed: reconstruction error {err:.3e}"
        )
    return dec


def operator_power_one_minus_z(d_op: LinearOperator, z: complex) -> LinearOperator:
    """Principal power ``(1 - z)^D = exp(log(1 - z) D)``.

    Defined off the branch cut ``z in [1, inf)``.  Normal exponents go
    through their unitary diagonalization; general exponents through the
    scaling-and-squaring matrix exponential.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real >= 1.0:
        raise BranchCutError(f"z={z} lies on the branch cut [1, inf)")
    w = np.log(1.0 - z)  # principal branch
    if is_normal(d_op, 1e-12):
        dec = normal_decompose(d_op, 1e-10)
        return LinearOperator(dec.apply_scalar(np.exp(w * dec.d)), d_op.grid)
    return LinearOperator(scipy.linalg.expm(w * d_op.entries), d_op.grid)


def sqrt_psd(a: LinearOperator, tol: float | None = None) -> LinearOperator:
    """Hermitian PSD square root ``B`` with ``B @ B = A``.

    Eigenvalues in ``[-tol, 0)`` are treated as rounding noise and clamped
    to zero; anything below ``-tol`` is rejected.  ``tol`` defaults to
    ``1e-10 * ||A||``.
    """
    scale = operator_norm(a)
    if tol is None:
        tol = 1e-10 * scale
    m = a.entries
    herm_defect = operator_norm(m - m.conj().T)
    if herm_defect > max(tol, 1e-14 * max(scale, 1.0)):
        raise NotPSDError(f"not Hermitian (||A - A^H|| = {herm_defect:.3e})")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    if vals.size and vals[0] < -tol:
        raise NotPSDError(f"not positive semidefinite (min eig {vals[0]:.6g})")
    root = vecs @ (np.sqrt(np.clip(vals, 0.0, None))[:, None] * vecs.conj().T)
    return LinearOperator(root, a.grid)


def kernel_of(a: LinearOperator) -> np.ndarray:
    """Kernel values ``k(v_i, v_j)`` of the integral operator equal to ``A``.

    The kernel satisfies ``(A f)(v_i) = sum_j k(v_i, v_j) f(v_j) w_j`` for
    function values ``f``, which in the orthonormal basis amounts to
    ``k_ij = A_ij / sqrt(w_i w_j)``.  The weighted double sum of ``|k|^2``
    recovers the squared Schatten-2 norm of ``A``.
    """
    rw = np.sqrt(a.grid.weights)
    return a.entries / np.outer(rw, rw)


def from_kernel(kernel: np.ndarray, grid: HilbertGrid) -> LinearOperator:
    """Operator whose integral kernel takes the given values on the grid."""
    kernel = np.asarray(kernel, dtype=complex)
    rw = np.sqrt(grid.weights)
    return LinearOperator(kernel * np.outer(rw, rw), grid)
