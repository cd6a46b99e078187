"""Path persistence: CSV for readable output, a small binary container for
bit-exact round trips.  All writes go through a temp file and an atomic
rename."""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .hilbert import HilbertGrid
from .simulate import SampledPath

_MAGIC = b"FIAR"
_VERSION = 1


class PathFormatError(ValueError):
    """Malformed or truncated path file."""


def _atomic_write(target: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_bytes(path: SampledPath) -> bytes:
    n = path.grid.n
    header = "t," + ",".join(
        f"coord_{i}_re,coord_{i}_im" for i in range(1, n + 1)
    )
    lines = [header]
    for t, row in enumerate(path.values):
        cells = [str(t)]
        for v in row:
            cells.append(format(v.real, ".17g"))
            cells.append(format(v.imag, ".17g"))
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode()


def _binary_bytes(path: SampledPath) -> bytes:
    t_len, n = path.values.shape
    head = _MAGIC + struct.pack("<HIQ", _VERSION, n, t_len)
    flat = np.empty((t_len, n, 2), dtype="<f8")
    flat[:, :, 0] = path.values.real
    flat[:, :, 1] = path.values.imag
    return head + flat.tobytes()


def write_path(path: SampledPath, file: str | Path, fmt: str | None = None) -> None:
    """Serialize a path as ``csv`` or ``bin`` (chosen from the suffix if not given)."""
    target = Path(file)
    if fmt is None:
        fmt = "bin" if target.suffix in (".bin", ".fiar") else "csv"
    if fmt == "csv":
        _atomic_write(target, _csv_bytes(path))
    elif fmt == "bin":
        _atomic_write(target, _binary_bytes(path))
    else:
        raise ValueError(f"unknown path format {fmt!r}")


def _read_csv(raw: bytes, grid: HilbertGrid | None) -> SampledPath:
    text = raw.decode()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise PathFormatError("empty path")
    header = lines[0].split(",")
    if header[0] != "t" or (len(header) - 1) % 2:
        raise PathFormatError("malformed CSV header")
    n = (len(header) - 1) // 2
    if len(lines) == 1:
        raise PathFormatError("empty path")
    values = np.empty((len(lines) - 1, n), dtype=complex)
    for t, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != 1 + 2 * n:
            raise PathFormatError(f"row {t}: expected {1 + 2 * n} cells")
        nums = [float(c) for c in cells[1:]]
        values[t] = np.array(nums[0::2]) + 1j * np.array(nums[1::2])
    if grid is None:
        grid = HilbertGrid(np.arange(n, dtype=float), np.ones(n))
    return SampledPath(values, grid)


def _read_binary(raw: bytes, grid: HilbertGrid | None) -> SampledPath:
    head_len = len(_MAGIC) + struct.calcsize("<HIQ")
    if len(raw) < head_len:
        raise PathFormatError("truncated file (no header)")
    if raw[:4] != _MAGIC:
        raise PathFormatError("bad magic bytes")
    version, n, t_len = struct.unpack("<HIQ", raw[4:head_len])
    if version != _VERSION:
        raise PathFormatError(f"unsupported container version {version}")
    if t_len == 0:
        raise PathFormatError("empty path")
    expected = head_len + t_len * n * 16
    if len(raw) != expected:
        raise PathFormatError(
            f"truncated file ({len(raw)} bytes, expected {expected})"
        )
    flat = np.frombuffer(raw, dtype="<f8", offset=head_len).reshape(t_len, n, 2)
    values = flat[:, :, 0] + 1j * flat[:, :, 1]
    if grid is None:
        grid = HilbertGrid(np.arange(n, dtype=float), np.ones(n))
    return SampledPath(values, grid)


def read_path(file: str | Path, grid: HilbertGrid | None = None) -> SampledPath:
    """Load a path written by :func:`write_path`; the format is sniffed from
    the magic bytes.  Without a grid, unit weights are assumed."""
    raw = Path(file).read_bytes()
    if raw[:4] == _MAGIC:
        return _read_binary(raw, grid)
    return _read_csv(raw, grid)
