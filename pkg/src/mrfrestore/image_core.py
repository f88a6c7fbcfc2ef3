"""8-bit grayscale image grid and Netpbm graymap (PGM) reading/writing."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAXVAL = 255
_WHITESPACE = b" \t\n\r\v\f"


class PgmError(ValueError):
    """Base class for PGM parse failures."""


class PgmHeaderError(PgmError):
    """Bad magic number or malformed header token."""


class PgmMaxvalError(PgmError):
    """maxval outside 1..255 (16-bit graymaps are not supported)."""


class PgmTruncatedError(PgmError):
    """Raster ends before width*height samples were read."""


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Row-major 8-bit intensity grid, origin top-left.

    ``pixels`` is a read-only ``(height, width)`` uint8 array; pixel
    ``(r, c)`` lives at flat index ``r * width + c``.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                if not np.all(np.equal(np.mod(arr, 1), 0)):
                    raise ValueError("intensities must be integral")
            if arr.min() < 0 or arr.max() > MAXVAL:
                raise ValueError("intensities must lie in [0, 255]")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __getitem__(self, rc):
        return self.pixels[rc]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.pixels
        return self.pixels.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __hash__(self):
        return hash((self.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"ImageGrid({self.height}x{self.width})"

    def flat(self) -> np.ndarray:
        return self.pixels.reshape(-1)


def as_grid(image) -> ImageGrid:
    if isinstance(image, ImageGrid):
        return image
    return ImageGrid(np.asarray(image))


def _tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and (data[pos] in _WHITESPACE or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise PgmHeaderError("header ended early")
        out.append(data[start:pos])
    return out, pos


def _header_int(tok: bytes, what: str) -> int:
    if not tok.isdigit():
        raise PgmHeaderError(f"bad {what}: {tok!r}")
    return int(tok)


def read_pgm(data: bytes) -> ImageGrid:
    """Parse a P2 (ASCII) or P5 (binary) graymap with maxval <= 255."""
    if isinstance(data, (str, Path)) and not isinstance(data, bytes):
        raise TypeError("read_pgm takes bytes; use load_pgm for paths")
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmHeaderError(f"unsupported magic number {magic!r}")
    if len(data) > 2 and data[2] not in _WHITESPACE and data[2] != ord("#"):
        raise PgmHeaderError("magic number must be followed by whitespace")
    (w, h, mx), pos = _tokens(data, 3, 2)
    width = _header_int(w, "width")
    height = _header_int(h, "height")
    maxval = _header_int(mx, "maxval")
    if width < 1 or height < 1:
        raise PgmHeaderError(f"bad dimensions {width}x{height}")
    if maxval < 1 or maxval > MAXVAL:
        raise PgmMaxvalError(f"maxval {maxval} not in 1..255")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise PgmTruncatedError("missing raster")
        raster = data[pos + 1:pos + 1 + count]
        if len(raster) < count:
            raise PgmTruncatedError(f"expected {count} samples, got {len(raster)}")
        pixels = np.frombuffer(raster, dtype=np.uint8)
    else:
        body = data[pos:]
        # comments are legal in the header only, but tolerate none in the raster
        fields = body.split()
        if len(fields) < count:
            raise PgmTruncatedError(f"expected {count} samples, got {len(fields)}")
        try:
            pixels = np.array([int(f) for f in fields[:count]], dtype=np.int64)
        except ValueError as exc:
            raise PgmHeaderError(f"non-numeric sample: {exc}") from None
    if pixels.max(initial=0) > maxval:
        raise PgmError("sample exceeds maxval")
    return ImageGrid(pixels.reshape(height, width).astype(np.uint8))


def write_pgm(grid, mode: str = "binary") -> bytes:
    """Serialize with maxval 255; ``mode`` is ``"binary"`` (P5) or ``"ascii"`` (P2)."""
    grid = as_grid(grid)
    if mode == "binary":
        header = f"P5\n{grid.width} {grid.height}\n{MAXVAL}\n".encode("ascii")
        return header + grid.pixels.tobytes()
    if mode == "ascii":
        lines = [f"P2\n{grid.width} {grid.height}\n{MAXVAL}"]
        for row in grid.pixels:
            lines.append(" ".join(str(int(v)) for v in row))
        return ("\n".join(lines) + "\n").encode("ascii")
    raise ValueError(f"unknown PGM mode {mode!r}")


def load_pgm(path) -> ImageGrid:
    return read_pgm(Path(path).read_bytes())


def save_pgm(path, grid, mode: str = "binary") -> None:
    Path(path).write_bytes(write_pgm(grid, mode))
