"""Operator spectral densities, autocovariances, and their sample analogues.

Densities are stored with respect to Lebesgue measure on ``(-pi, pi]`` with
the ``1/(2 pi)`` factor folded into the white-noise density ``Sigma/(2 pi)``,
so that ``Gamma(h) = integral of e^{i lam h} g(lam) d lam`` holds and the
lag-0 autocovariance of a white noise is exactly its covariance operator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .hilbert import (
    HilbertGrid,
    LinearOperator,
    NormalDecomposition,
    operator_norm,
    sqrt_psd,
)
from .transfer import (
    FracIntegrationSpec,
    OperatorPolynomial,
    SingularTransferError,
    ar_values_on_circle,
    arma_transfer_batch,
    check_invertible_on_circle,
    frac_transfer_batch,
)

if TYPE_CHECKING:  # pragma: no cover
    from .simulate import SampledPath


@dataclass(eq=False)
class ArmaModel:
    """AR/MA operator polynomials plus the noise covariance operator."""

    phi: OperatorPolynomial
    theta: OperatorPolynomial
    sigma: LinearOperator

    def __post_init__(self) -> None:
        if self.phi.grid.n != self.sigma.grid.n or self.theta.grid.n != self.sigma.grid.n:
            raise ValueError("model components must share one grid")
        # PSD check doubles as the Hermitian check
        sqrt_psd(self.sigma)
        ok, margin = check_invertible_on_circle(self.phi)
        if not ok:
            raise SingularTransferError(
                f"AR polynomial not invertible on the circle (margin {margin:.3e})"
            )

    @property
    def grid(self) -> HilbertGrid:
        return self.sigma.grid

    def is_white_noise(self) -> bool:
        """True when both polynomials are identically the identity."""
        stacked = np.concatenate([self.phi.stacked(), self.theta.stacked()])
        return stacked.size == 0 or not np.any(stacked)


@dataclass(eq=False)
class FiarmaModel:
    """ARMA base model filtered by a fractional integration transfer."""

    base: ArmaModel
    D: FracIntegrationSpec

    def __post_init__(self) -> None:
        if self.D.grid.n != self.base.grid.n:
            raise ValueError("memory operator must live on the model grid")

    @property
    def grid(self) -> HilbertGrid:
        return self.base.grid


@dataclass(eq=False)
class SpectralDensityGrid:
    """Operator density values on a frequency grid, w.r.t. Lebesgue measure."""

    freqs: np.ndarray
    values: np.ndarray
    grid: HilbertGrid
    normalization: str = "lebesgue"

    def __post_init__(self) -> None:
        self.freqs = np.asarray(self.freqs, dtype=float).ravel()
        self.values = np.ascontiguousarray(self.values, dtype=complex)
        n = self.grid.n
        if self.values.shape != (self.freqs.size, n, n):
            raise ValueError("density values must have shape (len(freqs), n, n)")

    def operator(self, j: int) -> LinearOperator:
        return LinearOperator(self.values[j], self.grid)

    def trace(self) -> np.ndarray:
        return np.einsum("fii->f", self.values).real

    def validate(self, tol: float = 1e-10) -> None:
        """Check every value is Hermitian PSD within tol (relative)."""
        scale = max(operator_norm(v) for v in self.values) or 1.0
        herm = max(operator_norm(v - v.conj().T) for v in self.values)
        if herm > tol * scale:
            raise ValueError(f"density values not Hermitian within tolerance ({herm:.3e})")
        mins = np.linalg.eigvalsh(0.5 * (self.values + self.values.conj().transpose(0, 2, 1)))
        if mins.size and mins.min() < -tol * scale:
            raise ValueError(f"density value has eigenvalue {mins.min():.3e} below 0")


@dataclass(eq=False)
class AutocovarianceSequence:
    """Lag-indexed autocovariance operators for h = -H..H."""

    data: np.ndarray
    grid: HilbertGrid
    max_lag: int

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=complex)
        n = self.grid.n
        if self.data.shape != (2 * self.max_lag + 1, n, n):
            raise ValueError("autocovariance data must have shape (2H+1, n, n)")

    def operator(self, h: int) -> LinearOperator:
        if abs(h) > self.max_lag:
            raise IndexError(f"lag {h} outside [-{self.max_lag}, {self.max_lag}]")
        return LinearOperator(self.data[h + self.max_lag], self.grid)


def density_frequencies(n_freq: int) -> np.ndarray:
    """Half-cell-offset grid of ``n_freq`` equispaced frequencies in ``(-pi, pi]``.

    The offset keeps 0 (where fractional transfers are singular) off the
    grid for every size, and the equal-weight quadrature stays exact for
    constants.  Odd sizes include the regular point pi instead.
    """
    if n_freq < 1:
        raise ValueError("need at least one frequency")
    lam = 2.0 * np.pi * (np.arange(n_freq) + 0.5) / n_freq
    return np.sort(np.where(lam > np.pi, lam - 2.0 * np.pi, lam))


def arma_spectral_density(model: ArmaModel, freqs: np.ndarray) -> SpectralDensityGrid:
    """Density ``T(lam) Sigma T(lam)^H / (2 pi)`` with T the ARMA transfer."""
    freqs = np.asarray(freqs, dtype=float).ravel()
    root = sqrt_psd(model.sigma).entries
    half = arma_transfer_batch(model.phi, model.theta, freqs, right=root)
    vals = np.einsum("fij,fkj->fik", half, half.conj()) / (2.0 * np.pi)
    return SpectralDensityGrid(freqs, vals, model.grid)


def fiarma_spectral_density(model: FiarmaModel, freqs: np.ndarray) -> SpectralDensityGrid:
    """Density of the fractionally integrated model: the ARMA half-factor is
    premultiplied by the fractional transfer frequency-wise (zero at 0)."""
    freqs = np.asarray(freqs, dtype=float).ravel()
    root = sqrt_psd(model.base.sigma).entries
    half = arma_transfer_batch(model.base.phi, model.base.theta, freqs, right=root)
    frac = frac_transfer_batch(model.D, freqs)
    half = np.einsum("fij,fjk->fik", frac, half)
    vals = np.einsum("fij,fkj->fik", half, half.conj()) / (2.0 * np.pi)
    return SpectralDensityGrid(freqs, vals, model.grid)


def _quadrature_weights(freqs: np.ndarray) -> np.ndarray:
    """Equal weights for equispaced grids, trapezoid otherwise."""
    if freqs.size == 1:
        return np.array([2.0 * np.pi])
    steps = np.diff(freqs)
    if np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        return np.full(freqs.size, steps[0])
    w = np.empty(freqs.size)
    w[0] = steps[0] / 2.0
    w[-1] = steps[-1] / 2.0
    w[1:-1] = (steps[:-1] + steps[1:]) / 2.0
    return w


def autocov_from_density(g: SpectralDensityGrid, h: int) -> LinearOperator:
    """Lag-h autocovariance ``integral e^{i lam h} g(lam) d lam`` by quadrature.

    Negative lags are returned as the adjoint of the positive lag, so the
    Hermitian symmetry holds by construction.
    """
    if h < 0:
        pos = autocov_from_density(g, -h)
        return LinearOperator(pos.entries.conj().T, g.grid)
    w = _quadrature_weights(g.freqs)
    phase = np.exp(1j * g.freqs * h) * w
    return LinearOperator(np.einsum("f,fij->ij", phase, g.values), g.grid)


def autocov_sequence(g: SpectralDensityGrid, max_lag: int) -> AutocovarianceSequence:
    data = np.empty((2 * max_lag + 1, g.grid.n, g.grid.n), dtype=complex)
    for h in range(max_lag + 1):
        gamma = autocov_from_density(g, h).entries
        data[max_lag + h] = gamma
        data[max_lag - h] = gamma.conj().T
    return AutocovarianceSequence(data, g.grid, max_lag)


def empirical_autocov(path: "SampledPath", h: int) -> LinearOperator:
    """Sample autocovariance ``(1/T) sum x_{t+h} x_t^H`` of a centered path."""
    y = path.values
    t_len = y.shape[0]
    if abs(h) >= t_len:
        raise ValueError(f"lag {h} needs a path longer than {abs(h)}")
    y = y - y.mean(axis=0)
    if h < 0:
        pos = empirical_autocov(path, -h)
        return LinearOperator(pos.entries.conj().T, path.grid)
    gamma = y[h:].T @ y[: t_len - h].conj() / t_len
    return LinearOperator(gamma, path.grid)


def fourier_frequencies(t_len: int, drop_zero: bool = True) -> np.ndarray:
    """Fourier frequencies ``2 pi j / T`` mapped into ``(-pi, pi]``."""
    j = np.arange(t_len)
    lam = 2.0 * np.pi * j / t_len
    lam = np.where(lam > np.pi + 1e-12, lam - 2.0 * np.pi, lam)
    if drop_zero:
        lam = lam[j != 0]
    return np.sort(lam)


def periodogram(path: "SampledPath", freqs: np.ndarray) -> SpectralDensityGrid:
    """Rank-one periodogram values ``d(lam) d(lam)^H / (2 pi T)``.

    Only Fourier frequencies ``2 pi j / T`` are admitted; the discrete
    transform ``d`` is taken of the mean-centered path, so the scaling is
    consistent with the density normalization used by this package.
    """
    freqs = np.asarray(freqs, dtype=float).ravel()
    y = path.values
    t_len = y.shape[0]
    j_float = freqs * t_len / (2.0 * np.pi)
    j_round = np.rint(j_float).astype(int)
    if not np.allclose(j_float, j_round, rtol=0.0, atol=1e-8):
        lam_bad = freqs[np.argmax(np.abs(j_float - j_round))]
        raise ValueError(f"{lam_bad:.6g} is not a Fourier frequency for T={t_len}")
    y = y - y.mean(axis=0)
    dft = np.fft.fft(y, axis=0)  # row j holds sum_t y_t e^{-2 pi i j t / T}
    d = dft[j_round % t_len]
    vals = np.einsum("fi,fj->fij", d, d.conj()) / (2.0 * np.pi * t_len)
    return SpectralDensityGrid(freqs, vals, path.grid)


def local_factorization(
    model: ArmaModel,
    dec: NormalDecomposition | None,
    eta: float,
    freqs: np.ndarray,
) -> tuple[LinearOperator, np.ndarray]:
    """Split the half-factor ``h(lam)`` as ``h0 + lam k(lam)`` near frequency 0.

    ``h(lam)`` is the transfer applied to the noise square root, conjugated
    into the diagonalizing frame when a decomposition is supplied.  The
    window ``(-eta, eta)`` is validated against near-singularity of the AR
    symbol; ``k`` at an exact zero frequency is filled with a symmetric
    difference estimate.  Returns ``(h0, k_values)`` with ``k_values``
    stacked over ``freqs``.
    """
    freqs = np.asarray(freqs, dtype=float).ravel()
    if not 0.0 < eta <= np.pi:
        raise ValueError("eta must lie in (0, pi]")
    if np.any(np.abs(freqs) >= eta):
        raise ValueError("all frequencies must lie inside (-eta, eta)")
    scan = np.linspace(-eta, eta, 513)
    sigma = np.linalg.svd(ar_values_on_circle(model.phi, scan), compute_uv=False)
    # stricter than the circle-wide certificate: the local expansion loses
    # accuracy well before the AR symbol actually becomes singular
    margin = 1e-6 * float(sigma.max())
    if float(sigma[:, -1].min()) <= margin:
        lam_bad = float(scan[int(np.argmin(sigma[:, -1]))])
        raise SingularTransferError(
            f"eta too large: AR symbol near-singular at frequency {lam_bad:.6g}",
            lam=lam_bad,
        )

    root = sqrt_psd(model.sigma).entries

    def half(points: np.ndarray) -> np.ndarray:
        vals = arma_transfer_batch(model.phi, model.theta, points, right=root)
        if dec is not None:
            vals = np.einsum("ij,fjk,kl->fil", dec.U, vals, dec.U.conj().T)
        return vals

    h0 = half(np.array([0.0]))[0]
    h_vals = half(freqs)
    k_vals = np.empty_like(h_vals)
    nz = freqs != 0.0
    k_vals[nz] = (h_vals[nz] - h0) / freqs[nz, None, None]
    if np.any(~nz):
        eps = eta * 1e-6
        sym = half(np.array([eps, -eps]))
        k_vals[~nz] = (sym[0] - sym[1]) / (2.0 * eps)
    return LinearOperator(h0, model.grid), k_vals


def cross_spectral_kernel(g: SpectralDensityGrid) -> np.ndarray:
    """Joint kernel values ``k_g(v_i, v_j; lam)`` of the density, frequency-wise."""
    rw = np.sqrt(g.grid.weights)
    return g.values / np.outer(rw, rw)[None, :, :]
