"""Periodic grids, sampled fields and spectral calculus.

Everything downstream works on a uniform periodic box of length ``L`` with
``n`` nodes ``x_j = -L/2 + j*h``.  Decaying profiles are represented by their
restriction to the box; derivatives are taken with the discrete Fourier
transform and integrals with the rectangle rule, which is spectrally accurate
for smooth periodic integrands.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, ParameterError

__all__ = [
    "GridSpec",
    "Field",
    "FieldPair",
    "SystemParams",
    "make_grid",
    "wavenumbers",
    "spectral_derivative",
    "derivative_matrix",
    "deriv",
    "integral",
    "inner",
    "random_band_limited",
    "field_to_csv",
    "field_from_csv",
    "field_from_csv_text",
    "field_to_bytes",
    "field_from_bytes",
    "write_snapshots",
    "read_snapshots",
]


@dataclass(frozen=True)
class GridSpec:
    n: int
    length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or self.n % 2:
            raise ParameterError(f"grid size must be an even integer >= 8, got {self.n!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ParameterError(f"domain length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.spacing * np.arange(self.n)


def make_grid(n: int, length: float) -> GridSpec:
    return GridSpec(n, length)


@dataclass(frozen=True)
class SystemParams:
    """Coupling constant of the coupled system (``lam`` multiplies ``v v_x``)."""

    lam: float = -1.0

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise ParameterError(f"coupling must be finite, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))


def _readonly(values, n):
    arr = np.array(values, dtype=float)
    if arr.shape != (n,):
        raise ParameterError(f"expected {n} samples, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("field samples must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of one scalar function on a :class:`GridSpec`."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values, self.grid.n))

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n))

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class FieldPair:
    """Two fields on a shared grid: ``(u, v)``, ``(mu, nu)`` or a covector."""

    first: Field
    second: Field

    def __post_init__(self):
        if self.first.grid != self.second.grid:
            raise GridMismatchError("both members of a FieldPair must share one grid")

    @classmethod
    def from_arrays(cls, grid, a, b):
        return cls(Field(grid, a), Field(grid, b))

    @classmethod
    def zeros(cls, grid):
        return cls(Field.zeros(grid), Field.zeros(grid))

    @property
    def grid(self) -> GridSpec:
        return self.first.grid

    def arrays(self):
        return self.first.values, self.second.values

    def stacked(self) -> np.ndarray:
        return np.stack([self.first.values, self.second.values])

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatchError("field pairs live on different grids")

    def __add__(self, other):
        self._check(other)
        return FieldPair(self.first + other.first, self.second + other.second)

    def __sub__(self, other):
        self._check(other)
        return FieldPair(self.first - other.first, self.second - other.second)

    def __mul__(self, scalar):
        return FieldPair(scalar * self.first, scalar * self.second)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldPair(-self.first, -self.second)

    def max_abs(self) -> float:
        return max(self.first.max_abs(), self.second.max_abs())


def wavenumbers(n: int, length: float) -> np.ndarray:
    """Angular wavenumbers for ``np.fft.rfft`` output, Nyquist entry zeroed."""
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    k[-1] = 0.0
    return k


def spectral_derivative(values, length: float, order: int = 1) -> np.ndarray:
    """Fourier derivative along the last axis of ``values``.

    The Nyquist mode is dropped for every order, so derivatives of all orders
    are exact powers of the first-derivative operator.
    """
    if order not in (1, 2, 3, 4):
        raise ParameterError(f"derivative order must be 1..4, got {order!r}")
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    k = wavenumbers(n, length)
    return np.fft.irfft((1j * k) ** order * np.fft.rfft(values, axis=-1), n=n, axis=-1)


def derivative_matrix(grid: GridSpec, scheme: str = "spectral") -> np.ndarray:
    """Dense first-derivative matrix.

    ``"spectral"`` is the dense circulant matching :func:`deriv`;
    ``"central"`` is the periodic second-order stencil (circulant bandwidth 1).
    Both are antisymmetric and annihilate constants and the grid-scale
    alternating mode.
    """
    n, h = grid.n, grid.spacing
    if scheme == "spectral":
        return spectral_derivative(np.eye(n), grid.length, 1).T
    if scheme == "central":
        mat = np.zeros((n, n))
        idx = np.arange(n)
        mat[idx, (idx + 1) % n] = 0.5 / h
        mat[idx, (idx - 1) % n] = -0.5 / h
        return mat
    raise ParameterError(f"unknown derivative scheme {scheme!r}")


def deriv(f: Field, order: int = 1) -> Field:
    return Field(f.grid, spectral_derivative(f.values, f.grid.length, order))


def integral(f: Field) -> float:
    # fsum is correctly rounded, so cyclic shifts give identical results
    return f.grid.spacing * math.fsum(f.values)


def inner(f: FieldPair, g: FieldPair) -> float:
    if f.grid != g.grid:
        raise GridMismatchError("inner product of fields on different grids")
    return integral(f.first * g.first) + integral(f.second * g.second)


def _band_limited(rng, n, cutoff):
    spec = np.zeros(n // 2 + 1, dtype=complex)
    spec[0] = rng.standard_normal()
    spec[1:cutoff + 1] = rng.standard_normal(cutoff) + 1j * rng.standard_normal(cutoff)
    return np.fft.irfft(spec, n=n)


def random_band_limited(seed: int, grid: GridSpec, cutoff: int, amplitude: float = 1.0,
                        mean_zero: bool = False) -> FieldPair:
    """Reproducible pair of trigonometric polynomials with modes ``0..cutoff``.

    Each member is rescaled so that its max-norm equals ``amplitude``.
    """
    if not 0 < cutoff < grid.n // 2:
        raise ParameterError(f"cutoff must satisfy 0 < cutoff < n/2, got {cutoff!r}")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(2):
        f = _band_limited(rng, grid.n, cutoff)
        if mean_zero:
            f = f - f.mean()
        out.append(amplitude * f / np.max(np.abs(f)))
    return FieldPair.from_arrays(grid, *out)


# -- serialization -----------------------------------------------------------

_HEADER = struct.Struct("<qd")


def field_to_csv(f: Field, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "value"])
    for xj, fj in zip(f.grid.x, f.values):
        writer.writerow([repr(float(xj)), repr(float(fj))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def field_from_csv(path, length: float) -> Field:
    """Read a field written by :func:`field_to_csv`; ``length`` fixes the grid."""
    return field_from_csv_text(Path(path).read_text(), length)


def field_from_csv_text(text: str, length: float) -> Field:
    rows = list(csv.DictReader(io.StringIO(text)))
    grid = GridSpec(len(rows), length)
    xs = np.array([float(r["x"]) for r in rows])
    if not np.allclose(xs, grid.x, atol=1e-12 * length):
        raise ParameterError("CSV node column does not match a uniform periodic grid")
    return Field(grid, [float(r["value"]) for r in rows])


def field_to_bytes(f: Field) -> bytes:
    return _HEADER.pack(f.grid.n, f.grid.length) + np.asarray(f.values, dtype="<f8").tobytes()


def field_from_bytes(data: bytes) -> Field:
    grid, rows = _decode(data)
    if rows.shape[0] != 1:
        raise ParameterError(f"expected one field, found {rows.shape[0]}")
    return Field(grid, rows[0])


def write_snapshots(path, grid: GridSpec, rows) -> None:
    """Binary snapshot file: little-endian header (int64 n, float64 length),
    then consecutive records of ``n`` float64 samples."""
    rows = np.asarray(rows, dtype="<f8").reshape(-1, grid.n)
    if not np.all(np.isfinite(rows)):
        raise ParameterError("refusing to write non-finite samples")
    Path(path).write_bytes(_HEADER.pack(grid.n, grid.length) + rows.tobytes())


def read_snapshots(path):
    return _decode(Path(path).read_bytes())


def _decode(data):
    n, length = _HEADER.unpack_from(data)
    payload = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if payload.size % n:
        raise ParameterError("snapshot payload is not a whole number of records")
    return GridSpec(int(n), float(length)), payload.reshape(-1, n).astype(float)
