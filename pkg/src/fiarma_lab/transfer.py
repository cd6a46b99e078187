"""Operator polynomials and transfer functions for fractional filtering.

Covers evaluation and circle-invertibility of AR/MA operator polynomials,
the fractional integration transfer function ``(1 - e^{-i lambda})^{-D}``
with its moving-average coefficient expansion, discrete Fourier inversion
of AR polynomials into two-sided coefficient sequences, and the constructive
split of ``(1 - z)^{N - Id}`` into a power-law moving average ``(k+1)^{-N}``
plus a summable remainder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from .hilbert import (
    HilbertGrid,
    LinearOperator,
    NormalDecomposition,
    is_normal,
    normal_decompose,
    operator_power_one_minus_z,
)

# Euler's constant, 20 significant digits.
EULER_GAMMA = 0.57721566490153286061


class SingularTransferError(ValueError):
    """AR polynomial is (numerically) singular at some frequency."""

    def __init__(self, message: str, lam: float | None = None):
        super().__init__(message)
        self.lam = lam


@dataclass(eq=False)
class OperatorPolynomial:
    """Polynomial with operator coefficients and constant term fixed to Id.

    Only the coefficients of ``z^1 .. z^m`` are stored; whether they enter
    with a minus sign (AR convention) or a plus sign (MA convention) is
    decided by the evaluation function.
    """

    grid: HilbertGrid
    coeffs: tuple[LinearOperator, ...] = ()

    def __post_init__(self) -> None:
        self.coeffs = tuple(self.coeffs)
        for c in self.coeffs:
            if c.grid is not self.grid and c.grid.n != self.grid.n:
                raise ValueError("polynomial coefficients must share one grid")

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def stacked(self) -> np.ndarray:
        """Coefficients as an (m, n, n) array (empty for degree 0)."""
        n = self.grid.n
        if not self.coeffs:
            return np.zeros((0, n, n), dtype=complex)
        return np.stack([c.entries for c in self.coeffs])

    @classmethod
    def scalar(cls, grid: HilbertGrid, *values: complex) -> "OperatorPolynomial":
        """Polynomial whose k-th coefficient is ``values[k-1] * Id``."""
        eye = np.eye(grid.n, dtype=complex)
        return cls(grid, tuple(LinearOperator(v * eye, grid) for v in values))


@dataclass(eq=False)
class FracIntegrationSpec:
    """Bounded memory operator D, with its diagonalization cached when normal."""

    D: LinearOperator
    decomposition: NormalDecomposition | None = None

    def ensure_decomposition(self, tol: float = 1e-10) -> NormalDecomposition:
        if self.decomposition is None:
            self.decomposition = normal_decompose(self.D, tol)
        return self.decomposition

    @property
    def grid(self) -> HilbertGrid:
        return self.D.grid

    @classmethod
    def scalar(cls, grid: HilbertGrid, d: complex) -> "FracIntegrationSpec":
        return cls(LinearOperator(d * np.eye(grid.n, dtype=complex), grid))


@dataclass(eq=False)
class CoefficientSequence:
    """Operator coefficients ``C_{k_min} .. C_{k_min + len - 1}`` of a filter.

    ``meaning`` tags how the sequence was produced (``frac-binomial``,
    ``ar-laurent`` or ``duker-delta``).  ``tail_mass`` carries the estimated
    mass of the discarded/aliased tail where applicable.
    """

    data: np.ndarray
    grid: HilbertGrid
    meaning: str
    k_min: int = 0
    tail_mass: float | None = None

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=complex)
        if self.data.ndim != 3 or self.data.shape[1:] != (self.grid.n, self.grid.n):
            raise ValueError("coefficient data must have shape (m, n, n)")

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def k_max(self) -> int:
        return self.k_min + len(self) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        """Coefficient matrix at absolute index k."""
        if not self.k_min <= k <= self.k_max:
            raise IndexError(f"coefficient index {k} outside [{self.k_min}, {self.k_max}]")
        return self.data[k - self.k_min]

    def operator(self, k: int) -> LinearOperator:
        return LinearOperator(self[k], self.grid)

    def norms(self, ord: float = np.inf) -> np.ndarray:
        """Schatten norms of every coefficient, in index order."""
        sigma = np.linalg.svd(self.data, compute_uv=False)
        if np.isinf(ord):
            return sigma[:, 0] if sigma.size else np.zeros(len(self))
        return np.sum(sigma**ord, axis=1) ** (1.0 / ord)


def eval_poly_ar(phi: OperatorPolynomial, z: complex) -> LinearOperator:
    """AR-sign evaluation ``Id - sum_k A_k z^k``."""
    return LinearOperator(_eval_batch(phi, np.array([z]), sign=-1.0)[0], phi.grid)


def eval_poly_ma(theta: OperatorPolynomial, z: complex) -> LinearOperator:
    """MA-sign evaluation ``Id + sum_k B_k z^k``."""
    return LinearOperator(_eval_batch(theta, np.array([z]), sign=+1.0)[0], theta.grid)


def _eval_batch(poly: OperatorPolynomial, zs: np.ndarray, sign: float) -> np.ndarray:
    """Evaluate Id +/- sum A_k z^k at many points; returns (len(zs), n, n)."""
    n = poly.grid.n
    zs = np.asarray(zs, dtype=complex).ravel()
    out = np.broadcast_to(np.eye(n, dtype=complex), (zs.size, n, n)).copy()
    if poly.degree:
        powers = zs[:, None] ** np.arange(1, poly.degree + 1)  # (F, m)
        out += sign * np.einsum("fm,mij->fij", powers, poly.stacked())
    return out


def ar_values_on_circle(phi: OperatorPolynomial, freqs: np.ndarray) -> np.ndarray:
    """``phi(e^{-i lambda})`` stacked over the given frequencies."""
    return _eval_batch(phi, np.exp(-1j * np.asarray(freqs, dtype=float)), sign=-1.0)


def ma_values_on_circle(theta: OperatorPolynomial, freqs: np.ndarray) -> np.ndarray:
    """``theta(e^{-i lambda})`` stacked over the given frequencies."""
    return _eval_batch(theta, np.exp(-1j * np.asarray(freqs, dtype=float)), sign=+1.0)


def check_invertible_on_circle(
    phi: OperatorPolynomial, grid_size: int = 4096
) -> tuple[bool, float]:
    """Scan the unit circle for the smallest singular value of the AR symbol.

    Returns ``(invertible, min_sv)`` where invertibility is declared when the
    minimum singular value over the scan exceeds ``1e-8`` times the largest
    one.  This is a dense-grid certificate with a safety margin, not a proof.
    """
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    freqs = 2.0 * np.pi * np.arange(grid_size) / grid_size
    sigma = np.linalg.svd(ar_values_on_circle(phi, freqs), compute_uv=False)
    min_sv = float(sigma.min())
    max_sv = float(sigma.max())
    return min_sv > 1e-8 * max_sv, min_sv


def arma_transfer(
    phi: OperatorPolynomial, theta: OperatorPolynomial, lam: float
) -> LinearOperator:
    """One-frequency ARMA transfer ``phi(e^{-i lam})^{-1} theta(e^{-i lam})``."""
    return LinearOperator(
        arma_transfer_batch(phi, theta, np.array([lam]))[0], phi.grid
    )


def arma_transfer_batch(
    phi: OperatorPolynomial,
    theta: OperatorPolynomial,
    freqs: np.ndarray,
    right: np.ndarray | None = None,
) -> np.ndarray:
    """Stacked transfer values, solving rather than inverting.

    With ``right`` given, returns ``phi^{-1} theta @ right`` (the factor is
    applied inside the solve).  Raises :class:`SingularTransferError` naming
    the first offending frequency when the AR symbol is numerically singular.
    """
    freqs = np.asarray(freqs, dtype=float).ravel()
    phi_vals = ar_values_on_circle(phi, freqs)
    sigma = np.linalg.svd(phi_vals, compute_uv=False)
    bad = sigma[:, -1] <= 1e-12 * max(sigma.max(), 1e-300)
    if np.any(bad):
        lam_bad = float(freqs[np.argmax(bad)])
        raise SingularTransferError(
            f"AR symbol singular at frequency {lam_bad:.6g}", lam=lam_bad
        )
    rhs = ma_values_on_circle(theta, freqs)
    if right is not None:
        rhs = rhs @ right
    return np.linalg.solve(phi_vals, rhs)


def frac_transfer(spec: FracIntegrationSpec, lam: float) -> LinearOperator:
    """Fractional integration transfer: zero at frequency 0, else ``(1-e^{-i lam})^{-D}``."""
    if math.remainder(lam, 2.0 * math.pi) == 0.0:
        return LinearOperator(np.zeros((spec.grid.n,) * 2, dtype=complex), spec.grid)
    minus_d = LinearOperator(-spec.D.entries, spec.grid)
    return operator_power_one_minus_z(minus_d, np.exp(-1j * lam))


def frac_transfer_batch(spec: FracIntegrationSpec, freqs: np.ndarray) -> np.ndarray:
    """Stacked fractional transfer values; uses the diagonalization when normal."""
    freqs = np.asarray(freqs, dtype=float).ravel()
    n = spec.grid.n
    out = np.empty((freqs.size, n, n), dtype=complex)
    at_zero = np.array(
        [math.remainder(l, 2.0 * math.pi) == 0.0 for l in freqs], dtype=bool
    )
    if is_normal(spec.D, 1e-12):
        dec = spec.ensure_decomposition()
        logs = np.log(1.0 - np.exp(-1j * freqs[~at_zero]))  # principal branch
        scal = np.exp(-np.outer(logs, dec.d))  # (F_nz, n) values (1-z)^{-d_i}
        out[~at_zero] = np.einsum(
            "ki,fi,ij->fkj", dec.U.conj().T, scal, dec.U, optimize=True
        )
    else:
        for idx in np.flatnonzero(~at_zero):
            out[idx] = frac_transfer(spec, float(freqs[idx])).entries
    out[at_zero] = 0.0
    return out


def frac_ma_coeffs(spec: FracIntegrationSpec, order: int) -> CoefficientSequence:
    """Moving-average coefficients of ``(1 - z)^{-D}`` up to the given order.

    The recursion ``C_0 = Id``, ``C_k = C_{k-1} (D + (k-1) Id) / k`` produces
    the binomial-type expansion; for a scalar exponent ``D = d Id`` the k-th
    coefficient is ``gamma(k + d) / (gamma(d) k!) Id``.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    n = spec.grid.n
    d_mat = spec.D.entries
    eye = np.eye(n, dtype=complex)
    out = np.empty((order + 1, n, n), dtype=complex)
    out[0] = eye
    for k in range(1, order + 1):
        out[k] = out[k - 1] @ (d_mat + (k - 1) * eye) / k
    return CoefficientSequence(out, spec.grid, meaning="frac-binomial")


def ar_inverse_laurent(
    phi: OperatorPolynomial, order: int, fft_size: int = 4096
) -> CoefficientSequence:
    """Two-sided coefficients ``P_{-order} .. P_{order}`` of ``phi^{-1}`` on the circle.

    Obtained by discrete Fourier inversion of ``lambda -> phi(e^{-i lambda})^{-1}``
    on ``fft_size`` points.  The coefficients decay exponentially when the
    polynomial is invertible on the circle, so aliasing is controlled; the
    mass of the discarded middle band is reported as ``tail_mass``.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if fft_size < 4 * max(order, 1) or fft_size & (fft_size - 1):
        raise ValueError("fft_size must be a power of two with fft_size >= 4*order")
    ok, _ = check_invertible_on_circle(phi, max(fft_size, 8))
    if not ok:
        raise SingularTransferError("AR polynomial not invertible on the circle")
    freqs = 2.0 * np.pi * np.arange(fft_size) / fft_size
    vals = np.linalg.inv(ar_values_on_circle(phi, freqs))
    # P_k = (1/M) sum_j vals_j e^{+i lambda_j k}: an inverse DFT along axis 0.
    coeff = np.fft.ifft(vals, axis=0)
    idx = np.concatenate([np.arange(-order, 0) % fft_size, np.arange(order + 1)])
    data = coeff[idx]
    mid = np.delete(coeff, idx, axis=0)
    tail = float(np.sum(np.linalg.norm(mid, axis=(1, 2)))) if mid.size else 0.0
    return CoefficientSequence(
        data, phi.grid, meaning="ar-laurent", k_min=-order, tail_mass=tail
    )


def _beta_tail_sum(k0: int, j: int) -> float:
    """``sum_{t >= k0} (k0/t)^j`` for j >= 2, via the Hurwitz zeta function.

    Term-by-term summation loses ~1/t of the tail for j = 2, which is far
    too slow and too inaccurate; ``zeta(j, k0)`` is the exact tail.
    """
    return float(k0**j) * float(scipy.special.zeta(j, k0))


def _duker_scalar_constant(n_val: complex, k0: int, n_powers_scale: float) -> complex:
    """Scalar value of the matching constant for one eigenvalue.

    Explicit product formula: partial binomial product up to ``k0 - 1``,
    an Euler-constant correction, and a convergent series in ``(n / k0)^j``.
    ``n_powers_scale`` bounds ``|n| / k0`` to size the series truncation.
    """
    prod = complex(1.0)
    for j in range(1, k0):
        prod *= 1.0 - n_val / j
    harmonic = sum(1.0 / t for t in range(1, k0))
    out = prod * np.exp(-n_val * (EULER_GAMMA - harmonic))
    series = complex(0.0)
    j = 2
    while n_powers_scale**j / j >= 1e-16:
        series += (n_val / k0) ** j * _beta_tail_sum(k0, j) / j
        j += 1
    return out * np.exp(-series)


def duker_decomposition(
    n_op: LinearOperator, order: int
) -> tuple[LinearOperator, CoefficientSequence, float]:
    """Split ``(1-z)^{N-Id}`` into ``C (k+1)^{-N}`` power-law weights plus a remainder.

    Returns ``(C, deltas, rho)`` where ``rho`` is the smallest real part of
    the singular-value function of the normal operator ``N``.  The binomial
    coefficients ``b_k`` of ``(1-z)^{N-Id}`` satisfy, by construction,
    ``b_k = C (k+1)^{-N} + Delta_k`` exactly; the testable content is the
    remainder decay ``||Delta_k|| = O(k^{-1-rho})``.

    The matching constant ``C`` is evaluated eigenvalue-wise through the
    diagonalization, with ``k0`` fixed to the smallest integer exceeding
    ``||N||`` so the defining series converge geometrically.
    """
    dec = normal_decompose(n_op)
    rho = float(np.min(dec.d.real))
    norm_n = float(np.max(np.abs(dec.d)))
    k0 = int(math.floor(norm_n)) + 1
    scale = norm_n / k0
    c_vals = np.array(
        [_duker_scalar_constant(nv, k0, scale) for nv in dec.d], dtype=complex
    )
    c_mat = dec.apply_scalar(c_vals)

    minus_mem = FracIntegrationSpec(
        LinearOperator(np.eye(n_op.n, dtype=complex) - n_op.entries, n_op.grid)
    )
    binom = frac_ma_coeffs(minus_mem, order).data  # coefficients of (1-z)^{N-Id}

    ks = np.arange(order + 1, dtype=float)
    powers_scal = np.exp(-np.outer(np.log(ks + 1.0), dec.d))  # (k+1)^{-n_i}
    powerlaw = np.einsum(
        "ki,fi,ij->fkj", dec.U.conj().T, powers_scal, dec.U, optimize=True
    )
    deltas = binom - np.einsum("ij,fjk->fik", c_mat, powerlaw)
    return (
        LinearOperator(c_mat, n_op.grid),
        CoefficientSequence(deltas, n_op.grid, meaning="duker-delta"),
        rho,
    )


def power_law_weights(n_op: LinearOperator, order: int) -> CoefficientSequence:
    """Weights ``(k+1)^{-N} = exp(-log(k+1) N)`` for k = 0..order."""
    ks = np.log(np.arange(1, order + 2, dtype=float))
    if is_normal(n_op, 1e-12):
        dec = normal_decompose(n_op)
        scal = np.exp(-np.outer(ks, dec.d))
        data = np.einsum("ki,fi,ij->fkj", dec.U.conj().T, scal, dec.U, optimize=True)
    else:
        data = np.stack([scipy.linalg.expm(-t * n_op.entries) for t in ks])
    return CoefficientSequence(data, n_op.grid, meaning="duker-powerlaw")


def envelope_bounds(z: complex, lam: float) -> tuple[float, float]:
    """Two-sided envelope for ``|(1 - e^{-i lam})^z|^2`` on ``[-pi, pi] \\ {0}``.

    lower = (2/pi)^(2 max(Re z, 0)) |lam|^(2 Re z) exp(-pi |Im z|)
    upper = (pi/2)^(2 max(-Re z, 0)) |lam|^(2 Re z) exp(+pi |Im z|)
    """
    if lam == 0.0:
        raise ValueError("frequency 0 is outside the envelope's domain")
    if not -math.pi <= lam <= math.pi:
        raise ValueError("frequency must lie in [-pi, pi]")
    z = complex(z)
    # the chord length obeys 2|lam|/pi <= |1 - e^{-i lam}| <= |lam|; which side
    # bounds from below flips with the sign of Re(z)
    two_re = 2.0 * z.real
    inner = (2.0 * abs(lam) / math.pi) ** two_re
    outer = abs(lam) ** two_re
    lower, upper = (inner, outer) if z.real >= 0.0 else (outer, inner)
    arg_swing = math.exp(math.pi * abs(z.imag))
    return lower / arg_swing, upper * arg_swing
