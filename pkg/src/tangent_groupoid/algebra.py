"""Functions on the tangent groupoid of the circle as operator kernels.

At fixed ``eps > 0`` a function on the groupoid is a kernel ``k(x_m, x_n)`` on a
periodic grid and the groupoid convolution is kernel composition.  At
``eps = 0`` functions live on the tangent bundle and convolve fibrewise.
``quantize`` sends a phase-space symbol ``h(x, p)`` to the midpoint-ordered
kernel with ``p = eps * xi``.
"""
from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fields import Coord, Cos, Expr, ScalarField, Sin, _children, differentiate, evaluate

__all__ = [
    "GridSpec", "KernelSlice", "TangentSliceFn", "Observable", "GridMismatch",
    "EpsilonMismatch", "convolve", "tangent_convolve", "fiber_transform",
    "quantize", "op_apply", "identity_kernel", "multiplication_kernel",
    "kernel_norm", "poisson_bracket", "classical_limit_defect", "moyal_defect",
    "write_kernel_csv", "read_kernel_csv", "write_kernel_binary", "read_kernel_binary",
]


class GridMismatch(ValueError):
    pass


class EpsilonMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """``N`` sites ``x_m = m L / N`` on a circle of circumference ``L``."""

    N: int
    L: float = 2 * np.pi

    def __post_init__(self):
        if self.N < 8 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two, at least 8")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N // 2, self.N // 2)

    @property
    def frequencies(self) -> np.ndarray:
        return 2 * np.pi * self.modes / self.L

    def plane_wave(self, j: int) -> np.ndarray:
        return np.exp(1j * (2 * np.pi * j / self.L) * self.sites)


@dataclass(frozen=True, eq=False)
class KernelSlice:
    eps: float
    grid: GridSpec
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.shape != (self.grid.N, self.grid.N):
            raise ValueError(f"kernel must be {self.grid.N}x{self.grid.N}, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("kernel entries must be finite")
        if not self.eps > 0:
            raise ValueError("kernel slices live at eps > 0")
        object.__setattr__(self, "entries", a)

    def __add__(self, other: "KernelSlice") -> "KernelSlice":
        _check_pair(self, other)
        return KernelSlice(self.eps, self.grid, self.entries + other.entries)

    def __sub__(self, other: "KernelSlice") -> "KernelSlice":
        _check_pair(self, other)
        return KernelSlice(self.eps, self.grid, self.entries - other.entries)

    def scale(self, c: complex) -> "KernelSlice":
        return KernelSlice(self.eps, self.grid, c * self.entries)


def _check_pair(a: KernelSlice, b: KernelSlice) -> None:
    if a.grid != b.grid:
        raise GridMismatch(f"{a.grid} vs {b.grid}")
    if a.eps != b.eps:
        raise EpsilonMismatch(f"eps {a.eps} vs {b.eps}")


def convolve(a: KernelSlice, b: KernelSlice) -> KernelSlice:
    """``(a*b)(x_m, x_n) = dx * sum_r a(x_m, x_r) b(x_r, x_n)``."""
    _check_pair(a, b)
    return KernelSlice(a.eps, a.grid, a.grid.dx * (a.entries @ b.entries))


def identity_kernel(grid: GridSpec, eps: float) -> KernelSlice:
    """The discrete delta ``delta_mn / dx``, unit of the convolution."""
    return KernelSlice(eps, grid, np.eye(grid.N) / grid.dx)


def multiplication_kernel(grid: GridSpec, eps: float, values) -> KernelSlice:
    return KernelSlice(eps, grid, np.diag(np.asarray(values, dtype=complex)) / grid.dx)


def op_apply(k: KernelSlice, psi) -> np.ndarray:
    """``(k psi)(x_m) = dx * sum_n k(x_m, x_n) psi(x_n)``."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (k.grid.N,):
        raise GridMismatch(f"vector of length {psi.shape} on a grid of {k.grid.N}")
    return k.grid.dx * (k.entries @ psi)


# --------------------------------------------------------------------------
# eps = 0: fibrewise convolution on the tangent bundle

@dataclass(frozen=True, eq=False)
class TangentSliceFn:
    """Values ``a(x_m, X_j)`` with fibre sites ``X_j = j dX``, ``j = -N/2 .. N/2-1``."""

    grid: GridSpec
    values: np.ndarray
    dX: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.N, self.grid.N):
            raise ValueError("values must be N x N (position x fibre)")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if not self.dX > 0:
            raise ValueError("fibre spacing must be positive")
        object.__setattr__(self, "values", v)

    @property
    def fiber_sites(self) -> np.ndarray:
        return self.grid.modes * self.dX


def tangent_convolve(a: TangentSliceFn, b: TangentSliceFn) -> TangentSliceFn:
    """Cyclic convolution along each fibre, ``dX * sum_Y a(x, Y) b(x, X - Y)``."""
    if a.grid != b.grid or a.dX != b.dX:
        raise GridMismatch("fibre grids are not aligned")
    N = a.grid.N
    half = N // 2
    j = np.arange(N)
    # storage index i holds mode i - N/2; X_i - Y_l has mode (i - l) mod N around zero
    diff = (j[:, None] - j[None, :] + half) % N
    out = np.empty_like(a.values)
    for m in range(N):
        out[m] = a.dX * (b.values[m][diff] @ a.values[m])
    return TangentSliceFn(a.grid, out, a.dX)


def fiber_transform(a: TangentSliceFn) -> np.ndarray:
    """Discrete Fourier transform along the fibre (``dX``-weighted)."""
    return a.dX * np.fft.fft(np.fft.ifftshift(a.values, axes=1), axis=1)


# --------------------------------------------------------------------------
# quantization

def _periodic_in_x0(e: Expr, guarded: bool = False) -> bool:
    if isinstance(e, Coord):
        return e.index != 0 or guarded
    guarded = guarded or isinstance(e, (Sin, Cos))
    return all(_periodic_in_x0(c, guarded) for c in _children(e))


@dataclass(frozen=True)
class Observable:
    """Phase-space symbol ``h(x0, x1)`` with ``x0`` the angle and ``x1`` the momentum.

    ``x0`` may only occur inside ``sin``/``cos``, which keeps ``h`` periodic.
    """

    field: ScalarField

    def __post_init__(self):
        if self.field.dim != 2:
            raise ValueError("observables are fields in (x0, x1)")
        if not _periodic_in_x0(self.field.body):
            raise ValueError("x0 must only appear inside sin/cos")

    @classmethod
    def parse(cls, text: str) -> "Observable":
        return cls(ScalarField.parse(text, 2))

    def __call__(self, x, p):
        return evaluate(self.field.body, (x, p))

    def __mul__(self, other: "Observable") -> "Observable":
        return Observable(self.field * other.field)

    def __add__(self, other: "Observable") -> "Observable":
        return Observable(self.field + other.field)


def _as_observable(h) -> Observable:
    if isinstance(h, Observable):
        return h
    if isinstance(h, str):
        return Observable.parse(h)
    return Observable(h)


def _midpoints(grid: GridSpec) -> np.ndarray:
    m = np.arange(grid.N)
    lo = np.minimum(m[:, None], m[None, :])
    hi = np.maximum(m[:, None], m[None, :])
    # shortest arc in index units; antipodal pairs go upward from the smaller index
    gap = hi - lo
    mid2 = np.where(gap <= grid.N // 2, lo + hi, lo + hi + grid.N)
    return (mid2 % (2 * grid.N)) * (grid.dx / 2)


def _phase_table(N: int) -> np.ndarray:
    # exp(2 pi i j / N) with table[N - j] == conj(table[j]) exactly
    j = np.arange(N)
    t = np.exp(2j * np.pi * j / N)
    t[N // 2 + 1:] = np.conj(t[1:N // 2][::-1])
    t[0] = 1.0
    t[N // 2] = -1.0
    return t


def quantize(h, eps: float, grid: GridSpec) -> KernelSlice:
    """Midpoint-ordered kernel of the symbol ``h`` with momentum ``p = eps * xi``::

        k(x_m, x_n) = (1/L) sum_k h(mid(x_m, x_n), eps xi_k) exp(i xi_k (x_m - x_n))
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    h = _as_observable(h)
    N = grid.N
    z = _midpoints(grid)
    m = np.arange(N)
    diff = m[:, None] - m[None, :]
    table = _phase_table(N)
    out = np.zeros((N, N), dtype=complex)
    for k, xi in zip(grid.modes, grid.frequencies):
        vals = np.broadcast_to(np.asarray(h(z, eps * xi), dtype=float), (N, N))
        out += vals * table[(k * diff) % N]
    return KernelSlice(eps, grid, out / grid.L)


def kernel_norm(k: KernelSlice, norm: str = "rowsum") -> float:
    """Operator norm of a kernel.

    ``"rowsum"``: ``dx * max_m sum_n |k(x_m, x_n)|``, the infinity-norm of the
    operator.  ``"resolved"``: spectral norm of the operator restricted to the
    plane waves ``|j| <= N/4`` (the modes the grid resolves with margin).
    """
    grid = k.grid
    if norm == "rowsum":
        return float(grid.dx * np.abs(k.entries).sum(axis=1).max())
    if norm == "resolved":
        j = np.arange(-grid.N // 4, grid.N // 4 + 1)
        basis = np.exp(1j * np.outer(grid.sites, 2 * np.pi * j / grid.L)) / np.sqrt(grid.N)
        return float(np.linalg.norm(grid.dx * (k.entries @ basis), 2))
    raise ValueError(f"unknown norm {norm!r}")


def poisson_bracket(h1, h2) -> Observable:
    """``{h1, h2} = d_x h1 d_p h2 - d_p h1 d_x h2``, computed symbolically."""
    f, g = _as_observable(h1).field, _as_observable(h2).field
    bracket = differentiate(f, 0) * differentiate(g, 1) - differentiate(f, 1) * differentiate(g, 0)
    return Observable(bracket)


def classical_limit_defect(h1, h2, eps: float, grid: GridSpec, norm: str = "rowsum") -> float:
    """``|| Q(h1) * Q(h2) - Q(h1 h2) ||``: first order in eps."""
    h1, h2 = _as_observable(h1), _as_observable(h2)
    prod = convolve(quantize(h1, eps, grid), quantize(h2, eps, grid))
    return kernel_norm(prod - quantize(h1 * h2, eps, grid), norm)


def moyal_defect(h1, h2, eps: float, grid: GridSpec, norm: str = "resolved") -> float:
    """``|| (Q(h1)*Q(h2) - Q(h2)*Q(h1)) / (i eps) - Q({h1, h2}) ||``.

    Measured by default on resolved modes: on the full grid the commutator
    with a momentum symbol picks up aliasing at the Nyquist mode, which the
    row-sum norm sees at full strength.
    """
    h1, h2 = _as_observable(h1), _as_observable(h2)
    k1, k2 = quantize(h1, eps, grid), quantize(h2, eps, grid)
    comm = (convolve(k1, k2) - convolve(k2, k1)).scale(1 / (1j * eps))
    return kernel_norm(comm - quantize(poisson_bracket(h1, h2), eps, grid), norm)


# --------------------------------------------------------------------------
# serialization

_MAGIC = b"TGKR"
_HEADER = struct.Struct("<4sId")


def write_kernel_csv(k: KernelSlice, path) -> None:
    """Rows ``m,n,re,im`` in row-major order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "n", "re", "im"])
    for m in range(k.grid.N):
        for n in range(k.grid.N):
            z = k.entries[m, n]
            w.writerow([m, n, repr(float(z.real)), repr(float(z.imag))])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def read_kernel_csv(path, eps: float, L: float = 2 * np.pi) -> KernelSlice:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    N = int(round(len(rows) ** 0.5))
    if N * N != len(rows):
        raise ValueError("kernel CSV does not hold a square matrix")
    a = np.zeros((N, N), dtype=complex)
    for r in rows:
        a[int(r["m"]), int(r["n"])] = complex(float(r["re"]), float(r["im"]))
    return KernelSlice(eps, GridSpec(N, L), a)


def write_kernel_binary(k: KernelSlice, path) -> None:
    """16-byte header (``TGKR``, u32 N, f64 eps; little-endian) then row-major (re, im) doubles."""
    body = np.ascontiguousarray(k.entries, dtype="<c16").tobytes()
    Path(path).write_bytes(_HEADER.pack(_MAGIC, k.grid.N, float(k.eps)) + body)


def read_kernel_binary(path, L: float = 2 * np.pi) -> KernelSlice:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("truncated kernel file")
    magic, N, eps = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    expected = _HEADER.size + 16 * N * N
    if len(data) != expected:
        raise ValueError(f"expected {expected} bytes, got {len(data)}")
    a = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(N, N).copy()
    return KernelSlice(eps, GridSpec(N, L), a)
