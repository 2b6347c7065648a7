"""File formats: PGM images, one-value-per-line CSV, atomic writes.

PGM (both ASCII ``P2`` and binary ``P5``, maxval 255) carries 2D signals.
Gray level ``g`` maps linearly to float ``g / 255``; on write, values are
clamped to [0, 1] and quantized with round-half-even.  This is the only
place the library clamps: in-memory signals are unconstrained.

CSV files hold 1D data as one value per line, ``.`` decimal separator,
17 significant digits, which round-trips float64 exactly.

All writers go through a temp-file-plus-rename so readers never observe
a partially written artifact.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .signal import as_signal

__all__ = [
    "read_pgm",
    "write_pgm",
    "read_csv",
    "write_csv",
    "atomic_write_bytes",
    "format_value",
]

_MAXVAL = 255


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write ``payload`` to ``path`` atomically (temp file + rename)."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_value(v: float) -> str:
    """Format one float with 17 significant digits (exact round-trip)."""
    return format(float(v), ".17g")


def _tokenize_pgm(raw: bytes, need: int) -> tuple[list[bytes], int]:
    """Return the first ``need`` whitespace tokens of a PGM header.

    Handles ``#`` comments.  Also returns the offset one byte past the
    whitespace character that terminates the last token, which is where
    a P5 raster begins.
    """
    tokens: list[bytes] = []
    i = 0
    n = len(raw)
    while len(tokens) < need:
        while i < n and raw[i : i + 1].isspace():
            i += 1
        if i < n and raw[i : i + 1] == b"#":
            while i < n and raw[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not raw[i : i + 1].isspace() and raw[i : i + 1] != b"#":
            i += 1
        if start == i:
            raise ValueError("truncated PGM header")
        tokens.append(raw[start:i])
        if len(tokens) == need:
            if i >= n:
                raise ValueError("truncated PGM file")
            i += 1  # consume the single whitespace ending the header
    return tokens, i


def read_pgm(path: str) -> np.ndarray:
    """Read a P2 or P5 PGM file into a float 2D signal in [0, 1]."""
    with open(path, "rb") as fh:
        raw = fh.read()
    (magic, wtok, htok, mtok), offset = _tokenize_pgm(raw, 4)
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"unsupported PGM magic {magic!r}")
    width, height, maxval = int(wtok), int(htok), int(mtok)
    if width <= 0 or height <= 0:
        raise ValueError(f"bad PGM dimensions {width}x{height}")
    if maxval != _MAXVAL:
        raise ValueError(f"only maxval {_MAXVAL} is supported, got {maxval}")
    count = width * height
    if magic == b"P5":
        data = np.frombuffer(raw, dtype=np.uint8, count=count, offset=offset)
        if data.size != count:
            raise ValueError("truncated P5 raster")
    else:
        values = raw[offset:].split()
        if len(values) != count:
            raise ValueError(f"expected {count} P2 samples, got {len(values)}")
        data = np.array([int(v) for v in values], dtype=np.int64)
        if data.min() < 0 or data.max() > maxval:
            raise ValueError("P2 sample out of range")
    grid = data.reshape(height, width).astype(np.float64)
    return grid / _MAXVAL


def _quantize(x: np.ndarray) -> np.ndarray:
    clipped = np.clip(x, 0.0, 1.0)
    return np.rint(clipped * _MAXVAL).astype(np.uint8)


def write_pgm(path: str, x, binary: bool = True) -> None:
    """Write a 2D signal to ``path`` as P5 (default) or P2 PGM.

    Values are clamped to [0, 1] before quantization; this is an I/O
    boundary by design.
    """
    arr = as_signal(x)
    if arr.ndim != 2:
        raise ValueError("PGM output requires a 2D signal")
    levels = _quantize(arr)
    height, width = levels.shape
    if binary:
        header = f"P5\n{width} {height}\n{_MAXVAL}\n".encode("ascii")
        atomic_write_bytes(path, header + levels.tobytes())
    else:
        lines = [f"P2\n{width} {height}\n{_MAXVAL}"]
        lines.extend(" ".join(str(int(v)) for v in row) for row in levels)
        atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def read_csv(path: str) -> np.ndarray:
    """Read a one-value-per-line CSV into a 1D float array."""
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value {text!r}") from exc
    if not values:
        raise ValueError(f"{path}: empty CSV")
    return np.asarray(values, dtype=np.float64)


def write_csv(path: str, x) -> None:
    """Write a signal to ``path``, one value per line (row-major for 2D)."""
    arr = as_signal(x).ravel()
    body = "\n".join(format_value(v) for v in arr) + "\n"
    atomic_write_bytes(path, body.encode("ascii"))
