"""JSON model configuration: parsing, validation, and assembly.

A config document carries the grid, the model operators (complex entries
written as ``[re, im]`` pairs, bare reals accepted), and a run section with
simulation and frequency-grid settings.  Validation reports every defect it
can find in one pass instead of stopping at the first.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .hilbert import HilbertGrid, LinearOperator
from .simulate import SimConfig
from .spectral import ArmaModel, FiarmaModel
from .transfer import FracIntegrationSpec, OperatorPolynomial, check_invertible_on_circle


class ConfigError(ValueError):
    """Carries the full list of validation messages."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


_RUN_DEFAULTS = {
    "T": 1024,
    "burnin": None,
    "K_trunc": 2048,
    "seed": 0,
    "noise_kind": "auto",
    "replication": 0,
    "n_freq": 4096,
    "eta": 1.0,
    "n_refine": 40,
    "shell_points": 64,
    "K": 64,
    "lags": 8,
    "format": "csv",
}


@dataclass
class RunConfig:
    T: int = 1024
    burnin: int | None = None
    K_trunc: int = 2048
    seed: int = 0
    noise_kind: str = "auto"
    replication: int = 0
    n_freq: int = 4096
    eta: float = 1.0
    n_refine: int = 40
    shell_points: int = 64
    K: int = 64
    lags: int = 8
    format: str = "csv"

    def sim_config(self) -> SimConfig:
        return SimConfig(
            T=self.T,
            burnin=self.burnin,
            K_trunc=self.K_trunc,
            seed=self.seed,
            noise_kind=self.noise_kind,
            replication=self.replication,
        )


@dataclass(eq=False)
class ModelConfig:
    """Validated configuration with assembled model objects."""

    grid: HilbertGrid
    phi: OperatorPolynomial
    theta: OperatorPolynomial
    sigma: LinearOperator
    memory: LinearOperator | None
    power_exponent: LinearOperator | None
    run: RunConfig

    def arma_model(self) -> ArmaModel:
        return ArmaModel(self.phi, self.theta, self.sigma)

    def frac_spec(self) -> FracIntegrationSpec:
        if self.memory is None:
            raise ConfigError(["model.D is required by this subcommand"])
        return FracIntegrationSpec(self.memory)

    def fiarma_model(self) -> FiarmaModel:
        return FiarmaModel(self.arma_model(), self.frac_spec())

    def require_power_exponent(self) -> LinearOperator:
        if self.power_exponent is None:
            raise ConfigError(["model.N is required by this subcommand"])
        return self.power_exponent

    def resolved(self) -> dict:
        """Round-trippable document with all defaults filled in."""
        return {
            "grid": {
                "points": list(map(float, self.grid.points)),
                "weights": list(map(float, self.grid.weights)),
            },
            "model": {
                "phi": [_matrix_doc(c.entries) for c in self.phi.coeffs],
                "theta": [_matrix_doc(c.entries) for c in self.theta.coeffs],
                "sigma": _matrix_doc(self.sigma.entries),
                **({"D": _matrix_doc(self.memory.entries)} if self.memory is not None else {}),
                **(
                    {"N": _matrix_doc(self.power_exponent.entries)}
                    if self.power_exponent is not None
                    else {}
                ),
            },
            "run": asdict(self.run),
        }


def _matrix_doc(entries: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in entries]


def _parse_entry(obj, name: str, errors: list[str]) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if (
        isinstance(obj, list)
        and len(obj) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
    ):
        return complex(obj[0], obj[1])
    errors.append(f"{name}: entries must be numbers or [re, im] pairs")
    return 0.0


def _parse_matrix(obj, name: str, n: int | None, errors: list[str]) -> np.ndarray | None:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        errors.append(f"{name}: expected a matrix as a list of rows")
        return None
    rows = len(obj)
    cols = {len(r) for r in obj}
    if len(cols) != 1 or cols.pop() != rows:
        errors.append(f"{name}: matrix must be square")
        return None
    if n is not None and rows != n:
        errors.append(f"{name}: dimension {rows} does not match grid size {n}")
        return None
    before = len(errors)
    mat = np.array(
        [[_parse_entry(v, name, errors) for v in row] for row in obj], dtype=complex
    )
    if len(errors) > before:
        return None
    if not np.all(np.isfinite(mat.view(float))):
        errors.append(f"{name}: entries must be finite")
        return None
    return mat


def _check_keys(section: dict, allowed: set[str], where: str, errors: list[str]) -> None:
    for key in section:
        if key not in allowed:
            errors.append(f"{where}: unknown key {key!r}")


def parse_config(text: str) -> ModelConfig:
    """Parse and validate a JSON configuration document.

    Raises :class:`ConfigError` carrying every validation message found;
    a well-formed document comes back as assembled model objects with run
    defaults filled in.
    """
    errors: list[str] = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}"]
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError(["top level must be a JSON object"])
    _check_keys(doc, {"grid", "model", "run"}, "config", errors)

    # grid
    grid = None
    gsec = doc.get("grid")
    if not isinstance(gsec, dict):
        errors.append("grid: section missing or not an object")
    else:
        _check_keys(gsec, {"points", "weights"}, "grid", errors)
        points = gsec.get("points")
        weights = gsec.get("weights")
        if not isinstance(points, list) or not points:
            errors.append("grid.points: need a nonempty list of numbers")
        elif not isinstance(weights, list) or len(weights) != len(points):
            errors.append("grid.weights: need a list matching grid.points in length")
        elif any(not isinstance(w, (int, float)) or w <= 0 for w in weights):
            errors.append("grid.weights: all weights must be strictly positive numbers")
        else:
            grid = HilbertGrid(np.asarray(points, float), np.asarray(weights, float))
    n = grid.n if grid is not None else None

    # model operators
    msec = doc.get("model")
    phi_mats: list[np.ndarray] = []
    theta_mats: list[np.ndarray] = []
    sigma_mat = None
    d_mat = None
    n_mat = None
    if not isinstance(msec, dict):
        errors.append("model: section missing or not an object")
    else:
        _check_keys(msec, {"phi", "theta", "sigma", "D", "N"}, "model", errors)
        for label, sink in (("phi", phi_mats), ("theta", theta_mats)):
            seq = msec.get(label, [])
            if not isinstance(seq, list):
                errors.append(f"model.{label}: expected a list of matrices")
                continue
            for k, m in enumerate(seq):
                mat = _parse_matrix(m, f"model.{label}[{k}]", n, errors)
                if mat is not None:
                    sink.append(mat)
        if "sigma" not in msec:
            errors.append("model.sigma: required")
        else:
            sigma_mat = _parse_matrix(msec["sigma"], "model.sigma", n, errors)
        if "D" in msec and "N" in msec:
            errors.append("model: provide at most one of D and N")
        if "D" in msec:
            d_mat = _parse_matrix(msec["D"], "model.D", n, errors)
        if "N" in msec:
            n_mat = _parse_matrix(msec["N"], "model.N", n, errors)

    # run section
    rsec = doc.get("run", {})
    run_kwargs = dict(_RUN_DEFAULTS)
    if not isinstance(rsec, dict):
        errors.append("run: section must be an object")
    else:
        _check_keys(rsec, set(_RUN_DEFAULTS), "run", errors)
        run_kwargs.update({k: v for k, v in rsec.items() if k in _RUN_DEFAULTS})
    run = None
    try:
        run = RunConfig(**run_kwargs)
        for key in ("T", "K_trunc", "n_freq", "n_refine", "shell_points", "K", "lags"):
            if not isinstance(getattr(run, key), int) or getattr(run, key) < 0:
                errors.append(f"run.{key}: must be a nonnegative integer")
        if run.T < 1:
            errors.append("run.T: must be at least 1")
        if run.burnin is not None and (not isinstance(run.burnin, int) or run.burnin < 0):
            errors.append("run.burnin: must be a nonnegative integer or null")
        if run.noise_kind not in ("auto", "real-gaussian", "complex-gaussian"):
            errors.append(f"run.noise_kind: unknown kind {run.noise_kind!r}")
        if not 0.0 < float(run.eta) < np.pi:
            errors.append("run.eta: must lie in (0, pi)")
        if run.format not in ("csv", "bin"):
            errors.append(f"run.format: unknown format {run.format!r}")
    except TypeError:
        errors.append("run: malformed section")

    # semantic checks that need assembled pieces
    if grid is not None and sigma_mat is not None:
        herm = 0.5 * (sigma_mat + sigma_mat.conj().T)
        defect = np.linalg.norm(sigma_mat - sigma_mat.conj().T, 2)
        scale = max(np.linalg.norm(herm, 2), 1e-300)
        if defect > 1e-10 * scale:
            errors.append("model.sigma: not Hermitian")
        else:
            eigs = np.linalg.eigvalsh(herm)
            if eigs[0] < -1e-10 * scale:
                errors.append(f"model.sigma: Sigma not PSD (min eig {eigs[0]:.6g})")
    phi_poly = theta_poly = None
    if grid is not None and not errors:
        phi_poly = OperatorPolynomial(
            grid, tuple(LinearOperator(m, grid) for m in phi_mats)
        )
        theta_poly = OperatorPolynomial(
            grid, tuple(LinearOperator(m, grid) for m in theta_mats)
        )
        ok, margin = check_invertible_on_circle(phi_poly)
        if not ok:
            errors.append(
                f"model.phi: not invertible on the unit circle (margin {margin:.3e})"
            )

    if errors:
        raise ConfigError(errors)
    assert grid is not None and sigma_mat is not None and run is not None
    return ModelConfig(
        grid=grid,
        phi=phi_poly,
        theta=theta_poly,
        sigma=LinearOperator(sigma_mat, grid),
        memory=LinearOperator(d_mat, grid) if d_mat is not None else None,
        power_exponent=LinearOperator(n_mat, grid) if n_mat is not None else None,
        run=run,
    )
