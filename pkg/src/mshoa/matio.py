"""Binary complex-matrix format and CSV grid export.

Matrix files are a bit-exact contract for reuse across runs:

    8 bytes   magic  b"MSHOAMTX"
    u32 LE    version (1)
    u32 LE    dtype tag (1 = complex128)
    u64 LE    rows
    u64 LE    cols
    raw       rows*cols complex128 little-endian, row-major

CSV grids carry a 3-line ``#`` header (plane/offset, extent/resolution/center,
config hash) before the data rows.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import FieldGrid, GridSpec

MAGIC = b"MSHOAMTX"
VERSION = 1
DTYPE_COMPLEX128 = 1
_HEADER = struct.Struct("<8sIIQQ")


class MatrixFormatError(ValueError):
    """Corrupt or incompatible matrix file."""


def export_matrix(path, matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(np.asarray(matrix, dtype=np.complex128))
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {matrix.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, DTYPE_COMPLEX128, *matrix.shape))
        fh.write(matrix.astype("<c16", copy=False).tobytes())


def import_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise MatrixFormatError(f"{path}: truncated header")
    magic, version, dtype, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise MatrixFormatError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_COMPLEX128:
        raise MatrixFormatError(f"{path}: unsupported dtype tag {dtype}")
    expected = _HEADER.size + rows * cols * 16
    if len(data) != expected:
        raise MatrixFormatError(
            f"{path}: payload size mismatch ({len(data)} bytes, expected {expected})"
        )
    flat = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    return flat.reshape(rows, cols).astype(np.complex128)


def _grid_header(spec: GridSpec, config_hash: str) -> list[str]:
    return [
        f"# plane={spec.plane} normal_offset={spec.normal_offset!r}",
        f"# extent={spec.extent[0]!r}x{spec.extent[1]!r} "
        f"resolution={spec.resolution!r} center={spec.center[0]!r},{spec.center[1]!r}",
        f"# config={config_hash}",
    ]


def write_field_csv(path, grid: FieldGrid, config_hash: str) -> None:
    """Complex grid values as CSV, one row of 're+imj' entries per pixel row."""
    lines = _grid_header(grid.spec, config_hash)
    for row in grid.values:
        lines.append(",".join(f"{v.real:.17g}{v.imag:+.17g}j" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_real_csv(path, values: np.ndarray, spec: GridSpec, config_hash: str) -> None:
    """Real grid (e.g. an SDR map in dB) as CSV with the same header."""
    lines = _grid_header(spec, config_hash)
    for row in np.asarray(values):
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_csv(path) -> tuple[np.ndarray, list[str]]:
    """Read back a complex CSV grid; returns (values, header lines)."""
    header, rows = [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            header.append(line)
        elif line.strip():
            rows.append([complex(tok) for tok in line.split(",")])
    return np.array(rows, dtype=complex), header
