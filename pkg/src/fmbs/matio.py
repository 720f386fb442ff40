"""Matrix file formats.

Two interchangeable on-disk representations:

* text: a header line ``rows,cols`` followed by ``rows`` lines of ``cols``
  comma-separated decimal values;
* binary: magic bytes ``FMBS``, one version byte (currently 1), two
  little-endian uint64 dimensions, then rows*cols little-endian float64
  values in row-major order.

``load_matrix`` sniffs the magic bytes to pick the decoder.  Binary files
round-trip bit-identically; text files round-trip value-exactly because
floats are written with shortest-repr precision.
"""

import struct

import numpy as np

from .errors import DimensionError, ParseError
from .linalg import as_matrix

MAGIC = b"FMBS"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sBQQ")


def save_matrix(path, a, fmt="binary"):
    """Write a matrix as 'binary' (default) or 'csv' text."""
    a = np.ascontiguousarray(as_matrix(a))
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, BINARY_VERSION, a.shape[0], a.shape[1]))
            fh.write(a.astype("<f8", copy=False).tobytes())
    elif fmt == "csv":
        lines = [f"{a.shape[0]},{a.shape[1]}"]
        for row in a:
            lines.append(",".join(repr(float(v)) for v in row))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines))
            fh.write("\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def load_matrix(path):
    """Read a matrix from either supported format, sniffing the magic bytes."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] == MAGIC:
        return _load_binary(blob, path)
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError(f"{path}: neither magic-tagged binary nor utf-8 text") from None
    return _load_text(text, path)


def _load_binary(blob, path):
    if len(blob) < _HEADER.size:
        raise ParseError(
            f"{path}: truncated header, expected at least {_HEADER.size} bytes, got {len(blob)}"
        )
    _, version, rows, cols = _HEADER.unpack_from(blob)
    if version != BINARY_VERSION:
        raise ParseError(f"{path}: unsupported binary version {version}")
    if rows == 0 or cols == 0:
        raise ParseError(f"{path}: dimensions must be positive, got {rows}x{cols}")
    expected = _HEADER.size + rows * cols * 8
    if len(blob) != expected:
        raise ParseError(f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(blob)}")
    data = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    out = data.astype(np.float64).reshape(rows, cols)
    if not np.isfinite(out).all():
        raise ParseError(f"{path}: matrix entries must be finite")
    return out


def _load_text(text, path):
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) != 2:
        raise ParseError(f"{path}:1: header must be 'rows,cols'")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"{path}:1: header must be two integers, got {lines[0]!r}") from None
    if rows < 1 or cols < 1:
        raise ParseError(f"{path}:1: dimensions must be positive, got {rows}x{cols}")
    if len(lines) - 1 != rows:
        raise DimensionError(
            f"{path}: header promises {rows} rows, found {len(lines) - 1} data lines"
        )
    out = np.empty((rows, cols))
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != cols:
            raise DimensionError(
                f"{path}:{lineno}: header promises {cols} values, found {len(parts)}"
            )
        try:
            out[lineno - 2] = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not np.isfinite(out).all():
        raise ParseError(f"{path}: matrix entries must be finite")
    return out
