"""Decide whether the fractional filter applies to a given ARMA process.

The decision runs through the pointwise standard deviation ``sigma_w`` of the
transformed innovation, a set of grid conditions on the real part of the
memory exponents, and a dyadically refined quadrature of the near-zero
frequency integral whose finiteness characterizes existence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import LinearOperator, NormalDecomposition, normal_decompose, sqrt_psd
from .spectral import ArmaModel
from .transfer import (
    FracIntegrationSpec,
    SingularTransferError,
    arma_transfer_batch,
    eval_poly_ar,
    eval_poly_ma,
)


class ExistenceRefusal(RuntimeError):
    """Simulation refused because the existence check reports failure."""

    def __init__(self, condition: str, message: str):
        super().__init__(message)
        self.condition = condition


@dataclass(eq=False)
class ExistenceReport:
    """Outcome of the necessary/sufficient existence conditions on a grid.

    ``verdict`` is ``"fails"`` when a necessary condition is violated,
    ``"holds"`` when the sufficient set is satisfied, and ``"undetermined"``
    when the necessary conditions pass but neither sufficiency side
    condition does, so the criterion is silent either way.
    """

    sigma_w: np.ndarray
    support_tol: float
    cond_ii: bool
    cond_iii: bool
    cond_iii_value: float
    cond_iv: bool
    cond_v: bool
    verdict: str
    i_eta: "IntegralReport | None" = None

    def failed_condition(self) -> str | None:
        if self.verdict != "fails":
            return None
        return "ii" if not self.cond_ii else "iii"

    def to_dict(self) -> dict:
        out = {
            "sigma_w": [float(s) for s in self.sigma_w],
            "support_tol": float(self.support_tol),
            "cond_ii": self.cond_ii,
            "cond_iii": self.cond_iii,
            "cond_iii_value": float(self.cond_iii_value),
            "cond_iv": self.cond_iv,
            "cond_v": self.cond_v,
            "verdict": self.verdict,
        }
        if self.i_eta is not None:
            out["i_eta"] = self.i_eta.to_dict()
        return out


@dataclass(eq=False)
class IntegralReport:
    """Dyadic-shell quadrature of the existence integral near frequency 0."""

    value: float
    diverges: bool
    shells: np.ndarray
    eta: float
    n_freq: int
    n_refine: int
    tail_estimate: float

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "diverges": self.diverges,
            "shells": [float(s) for s in self.shells],
            "eta": float(self.eta),
            "n_freq": int(self.n_freq),
            "n_refine": int(self.n_refine),
            "tail_estimate": float(self.tail_estimate),
        }


@dataclass(eq=False)
class DukerReport:
    """Conditions for the power-law moving average ``sum (k+1)^{-N} eps_{t-k}``."""

    exponents_real: np.ndarray
    sigma_w: np.ndarray
    condition_exponent: bool
    integral_value: float
    grid_sensitive: bool
    passes: bool

    def to_dict(self) -> dict:
        return {
            "exponents_real": [float(x) for x in self.exponents_real],
            "sigma_w": [float(s) for s in self.sigma_w],
            "condition_exponent": self.condition_exponent,
            "integral_value": float(self.integral_value),
            "grid_sensitive": self.grid_sensitive,
            "passes": self.passes,
        }


def _transformed_innovation_half(
    model: ArmaModel, dec: NormalDecomposition
) -> np.ndarray:
    """Matrix ``U phi(1)^{-1} theta(1) Sigma^{1/2}`` in the diagonalizing frame."""
    phi1 = eval_poly_ar(model.phi, 1.0).entries
    sig = np.linalg.svd(phi1, compute_uv=False)
    if sig[-1] <= 1e-12 * max(sig[0], 1e-300):
        raise SingularTransferError("AR root at frequency 0", lam=0.0)
    theta1 = eval_poly_ma(model.theta, 1.0).entries
    root = sqrt_psd(model.sigma).entries
    return dec.U @ np.linalg.solve(phi1, theta1 @ root)


def sigma_w(model: ArmaModel, dec: NormalDecomposition) -> np.ndarray:
    """Pointwise standard deviation of the transformed innovation.

    Computed from the integral kernel of ``U phi(1)^{-1} theta(1) Sigma^{1/2}``:
    the squared value at a grid point is the weighted row sum of squared
    kernel values, which in coordinates is the squared row norm divided by
    the point's weight.
    """
    if dec.grid.n != model.grid.n:
        raise ValueError("model and decomposition must share one grid")
    half = _transformed_innovation_half(model, dec)
    row_sq = np.sum(np.abs(half) ** 2, axis=1)
    return np.sqrt(row_sq / model.grid.weights)


def check_conditions(
    model: ArmaModel, spec: FracIntegrationSpec, tol: float | None = None
) -> ExistenceReport:
    """Evaluate the existence conditions of the fractional filter on the grid.

    Almost-everywhere quantifiers become checks at every grid point, with the
    support of ``sigma_w`` thresholded at ``tol`` (default
    ``1e-12 * max sigma_w``) to guard rounding.
    """
    dec = spec.ensure_decomposition()
    sw = sigma_w(model, dec)
    if tol is None:
        tol = 1e-12 * float(sw.max(initial=0.0))
    d_re = dec.d.real
    support = sw > tol

    cond_ii = bool(np.all(d_re[support] < 0.5)) if support.any() else True
    below_half = d_re < 0.5
    weights = model.grid.weights
    cond_iii_value = float(
        np.sum(sw[below_half] ** 2 / (1.0 - 2.0 * d_re[below_half]) * weights[below_half])
    )
    cond_iii = bool(np.isfinite(cond_iii_value))
    cond_iv = bool(np.all(d_re < 1.0))
    cond_v = model.is_white_noise()

    if not (cond_ii and cond_iii):
        verdict = "fails"
    elif cond_iv or cond_v:
        verdict = "holds"
    else:
        verdict = "undetermined"
    return ExistenceReport(
        sigma_w=sw,
        support_tol=tol,
        cond_ii=cond_ii,
        cond_iii=cond_iii,
        cond_iii_value=cond_iii_value,
        cond_iv=cond_iv,
        cond_v=cond_v,
        verdict=verdict,
    )


def existence_integral(
    model: ArmaModel,
    spec: FracIntegrationSpec,
    eta: float,
    n_freq: int = 64,
    n_refine: int = 40,
) -> IntegralReport:
    """Quadrature of ``|lam|^{-2 Re d(v)} |k_h(v, v'; lam)|^2`` near frequency 0.

    The window ``(-eta, eta)`` is cut into dyadic shells
    ``(eta 2^{-l-1}, eta 2^{-l}]``; each shell carries ``n_freq`` midpoint
    nodes per sign of the frequency.  The half-factor is
    ``h(lam) = U T(lam) Sigma^{1/2} U^H`` with ``T`` the ARMA transfer, and
    the integral is taken against ``d lam / (2 pi)``.

    Divergence is declared when the last three shell-contribution ratios sit
    at or above ``1 - 1e-3`` (the ratios approach ``2^{2 max Re d - 1}``).
    For convergent ratios the geometric tail beyond the deepest shell is
    extrapolated and added to the returned value.
    """
    if not 0.0 < eta < np.pi:
        raise ValueError("eta must lie in (0, pi)")
    if n_freq < 1 or n_refine < 4:
        raise ValueError("need n_freq >= 1 and n_refine >= 4")
    dec = spec.ensure_decomposition()
    d_re = dec.d.real
    root = sqrt_psd(model.sigma).entries
    u = dec.U

    shells = np.empty(n_refine)
    for level in range(n_refine):
        hi = eta * 2.0**-level
        lo = hi / 2.0
        step = (hi - lo) / n_freq
        pts = lo + (np.arange(n_freq) + 0.5) * step
        total = 0.0
        for lam_signed in (pts, -pts):
            vals = arma_transfer_batch(model.phi, model.theta, lam_signed, right=root)
            half = np.einsum("ij,fjk,kl->fil", u, vals, u.conj().T, optimize=True)
            row_sq = np.sum(np.abs(half) ** 2, axis=2)  # (F, n)
            scal = pts[:, None] ** (-2.0 * d_re[None, :])
            total += float(np.sum(scal * row_sq)) * step / (2.0 * np.pi)
        shells[level] = total

    ratios = np.divide(
        shells[1:], shells[:-1], out=np.zeros(n_refine - 1), where=shells[:-1] > 0
    )
    last = ratios[-3:]
    diverges = bool(np.all(last >= 1.0 - 1e-3))
    value = float(shells.sum())
    tail = 0.0
    if not diverges and shells[-1] > 0:
        r = float(last[-1])
        if 0.0 < r < 1.0:
            tail = float(shells[-1]) * r / (1.0 - r)
    return IntegralReport(
        value=value + tail,
        diverges=diverges,
        shells=shells,
        eta=eta,
        n_freq=n_freq,
        n_refine=n_refine,
        tail_estimate=tail,
    )


def check_duker_conditions(
    n_op: LinearOperator,
    sigma: LinearOperator,
    dec: NormalDecomposition | None = None,
    boundary_margin: float = 0.05,
) -> DukerReport:
    """Conditions for convergence of the power-law moving average.

    Requires the real part of every exponent to exceed one half and reports
    the weighted sum ``sum sigma_w^2 / (2 h - 1)``.  Grid points whose
    exponent sits within ``boundary_margin`` of the 1/2 boundary make that
    sum resolution-dependent, which is flagged rather than guessed.
    """
    if dec is None:
        dec = normal_decompose(n_op)
    h = dec.d.real
    root = sqrt_psd(sigma).entries
    half = dec.U @ root
    sw = np.sqrt(np.sum(np.abs(half) ** 2, axis=1) / n_op.grid.weights)

    cond = bool(np.all(h > 0.5))
    above = h > 0.5
    value = float(
        np.sum(sw[above] ** 2 / (2.0 * h[above] - 1.0) * n_op.grid.weights[above])
    )
    sensitive = bool(np.any((h > 0.5) & (h - 0.5 < boundary_margin)))
    return DukerReport(
        exponents_real=h,
        sigma_w=sw,
        condition_exponent=cond,
        integral_value=value,
        grid_sensitive=sensitive,
        passes=cond and bool(np.isfinite(value)),
    )
