"""Batch command-line interface.

Each invocation runs one subcommand against a JSON config, writes its output
files plus a run manifest into the output directory, and exits with 0 on
success, 2 when an existence check refuses the run, and 1 on any error.
The manifest embeds the fully resolved config so every output can be
regenerated bit-identically from it.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ModelConfig, parse_config
from .dataio import _atomic_write, write_path
from .existence import ExistenceRefusal, check_conditions, existence_integral
from .simulate import (
    simulate_arma,
    simulate_duker,
    simulate_fiarma,
    verify_longmemory_decomposition,
)
from .spectral import (
    arma_spectral_density,
    autocov_sequence,
    density_frequencies,
    fiarma_spectral_density,
    fourier_frequencies,
    periodogram,
)
from .transfer import duker_decomposition, frac_ma_coeffs

SUBCOMMANDS = (
    "simulate",
    "density",
    "autocov",
    "frac-coeffs",
    "check-existence",
    "existence-integral",
    "duker-decompose",
    "duker-verify",
    "periodogram",
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix_cells(mat: np.ndarray) -> list[str]:
    cells = []
    for v in mat.ravel():
        cells.append(_fmt(v.real))
        cells.append(_fmt(v.imag))
    return cells


def _matrix_header(n: int) -> list[str]:
    cols = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            cols += [f"m_{i}_{j}_re", f"m_{i}_{j}_im"]
    return cols


def _write_table(target: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)] + [",".join(r) for r in rows]
    _atomic_write(target, ("\n".join(lines) + "\n").encode())


def _write_json(target: Path, payload: dict) -> None:
    _atomic_write(target, (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode())


def _density_table(out: Path, name: str, freqs: np.ndarray, values: np.ndarray) -> str:
    n = values.shape[1]
    rows = [
        [_fmt(lam)] + _matrix_cells(values[j]) for j, lam in enumerate(freqs)
    ]
    _write_table(out / name, ["lambda"] + _matrix_header(n), rows)
    return name


def _run_simulate(cfg: ModelConfig, out: Path, force: bool) -> list[str]:
    sim = cfg.run.sim_config()
    if cfg.memory is not None:
        path = simulate_fiarma(cfg.fiarma_model(), sim, force=force)
    elif cfg.power_exponent is not None:
        path = simulate_duker(cfg.power_exponent, cfg.sigma, sim, force=force)
    else:
        path = simulate_arma(cfg.arma_model(), sim)
    name = "path.csv" if cfg.run.format == "csv" else "path.bin"
    write_path(path, out / name, fmt=cfg.run.format)
    return [name]


def _run_density(cfg: ModelConfig, out: Path) -> list[str]:
    freqs = density_frequencies(cfg.run.n_freq)
    if cfg.memory is not None:
        g = fiarma_spectral_density(cfg.fiarma_model(), freqs)
    else:
        g = arma_spectral_density(cfg.arma_model(), freqs)
    return [_density_table(out, "density.csv", g.freqs, g.values)]


def _run_autocov(cfg: ModelConfig, out: Path) -> list[str]:
    freqs = density_frequencies(cfg.run.n_freq)
    if cfg.memory is not None:
        g = fiarma_spectral_density(cfg.fiarma_model(), freqs)
    else:
        g = arma_spectral_density(cfg.arma_model(), freqs)
    seq = autocov_sequence(g, cfg.run.lags)
    rows = []
    for h in range(-cfg.run.lags, cfg.run.lags + 1):
        rows.append([str(h)] + _matrix_cells(seq.operator(h).entries))
    _write_table(out / "autocov.csv", ["h"] + _matrix_header(cfg.grid.n), rows)
    return ["autocov.csv"]


def _run_frac_coeffs(cfg: ModelConfig, out: Path) -> list[str]:
    seq = frac_ma_coeffs(cfg.frac_spec(), cfg.run.K)
    rows = [[str(k)] + _matrix_cells(seq[k]) for k in range(len(seq))]
    _write_table(out / "frac_coeffs.csv", ["k"] + _matrix_header(cfg.grid.n), rows)
    return ["frac_coeffs.csv"]


def _run_check_existence(cfg: ModelConfig, out: Path) -> list[str]:
    model = cfg.arma_model()
    spec = cfg.frac_spec()
    report = check_conditions(model, spec)
    report.i_eta = existence_integral(
        model,
        spec,
        eta=cfg.run.eta,
        n_freq=cfg.run.shell_points,
        n_refine=cfg.run.n_refine,
    )
    _write_json(out / "existence.json", report.to_dict())
    return ["existence.json"]


def _run_existence_integral(cfg: ModelConfig, out: Path) -> list[str]:
    report = existence_integral(
        cfg.arma_model(),
        cfg.frac_spec(),
        eta=cfg.run.eta,
        n_freq=cfg.run.shell_points,
        n_refine=cfg.run.n_refine,
    )
    _write_json(out / "existence_integral.json", report.to_dict())
    rows = []
    for level, contribution in enumerate(report.shells):
        hi = report.eta * 2.0**-level
        rows.append([str(level), _fmt(hi / 2.0), _fmt(hi), _fmt(contribution)])
    _write_table(out / "shells.csv", ["level", "lo", "hi", "contribution"], rows)
    return ["existence_integral.json", "shells.csv"]


def _run_duker_decompose(cfg: ModelConfig, out: Path) -> list[str]:
    n_op = cfg.require_power_exponent()
    c_mat, deltas, rho = duker_decomposition(n_op, cfg.run.K)
    _write_table(
        out / "duker_C.csv",
        _matrix_header(cfg.grid.n),
        [_matrix_cells(c_mat.entries)],
    )
    norms = deltas.norms()
    rows = [[str(k), _fmt(norms[k])] for k in range(len(deltas))]
    _write_table(out / "duker_deltas.csv", ["k", "delta_norm"], rows)
    _write_json(out / "duker_decompose.json", {"rho": float(rho), "K": cfg.run.K})
    return ["duker_C.csv", "duker_deltas.csv", "duker_decompose.json"]


def _run_duker_verify(cfg: ModelConfig, out: Path) -> list[str]:
    n_op = cfg.require_power_exponent()
    check = verify_longmemory_decomposition(n_op, cfg.sigma, cfg.run.sim_config())
    _write_json(out / "duker_verify.json", check.to_dict())
    return ["duker_verify.json"]


def _run_periodogram(cfg: ModelConfig, out: Path, force: bool) -> list[str]:
    sim = cfg.run.sim_config()
    if cfg.memory is not None:
        path = simulate_fiarma(cfg.fiarma_model(), sim, force=force)
    elif cfg.power_exponent is not None:
        path = simulate_duker(cfg.power_exponent, cfg.sigma, sim, force=force)
    else:
        path = simulate_arma(cfg.arma_model(), sim)
    freqs = fourier_frequencies(path.t_len)
    pg = periodogram(path, freqs)
    return [_density_table(out, "periodogram.csv", pg.freqs, pg.values)]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiarma-lab",
        description="Operator-valued fractional ARMA toolbox (batch CLI)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument(
            "--force", action="store_true", help="bypass existence refusals"
        )
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="thread budget hint (falls back to FIARMA_LAB_THREADS)",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    try:
        raw = Path(args.config).read_bytes()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(raw.decode())
    except ConfigError as exc:
        for message in exc.errors:
            print(f"config error: {message}", file=sys.stderr)
        return 1

    if args.seed is not None:
        cfg.run.seed = args.seed
    threads = args.threads
    if threads is None:
        env = os.environ.get("FIARMA_LAB_THREADS")
        threads = int(env) if env else None

    try:
        if args.subcommand == "simulate":
            outputs = _run_simulate(cfg, out, args.force)
        elif args.subcommand == "density":
            outputs = _run_density(cfg, out)
        elif args.subcommand == "autocov":
            outputs = _run_autocov(cfg, out)
        elif args.subcommand == "frac-coeffs":
            outputs = _run_frac_coeffs(cfg, out)
        elif args.subcommand == "check-existence":
            outputs = _run_check_existence(cfg, out)
        elif args.subcommand == "existence-integral":
            outputs = _run_existence_integral(cfg, out)
        elif args.subcommand == "duker-decompose":
            outputs = _run_duker_decompose(cfg, out)
        elif args.subcommand == "duker-verify":
            outputs = _run_duker_verify(cfg, out)
        else:
            outputs = _run_periodogram(cfg, out, args.force)
    except ExistenceRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    manifest = {
        "tool": "fiarma-lab",
        "version": __version__,
        "subcommand": args.subcommand,
        "config_sha256": hashlib.sha256(raw).hexdigest(),
        "resolved_config": cfg.resolved(),
        "seed": cfg.run.seed,
        "force": bool(args.force),
        "threads": threads,
        "outputs": outputs,
    }
    _write_json(out / "manifest.json", manifest)
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
