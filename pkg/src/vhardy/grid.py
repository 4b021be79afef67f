"""Discretization substrate: boxes, grid functions, scale ladders, cubes.

Every function on R^n is a sample on a uniform cell-centred grid over a cubic
box, extended by zero outside it.  Functions on the upper half-space are
sampled on the same grid times a logarithmic ladder of scales, so that
``int_0^inf F(t) dt/t`` becomes ``sum_k F(t_k) * dlog``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.signal import fftconvolve
from scipy.special import erfcinv

# unit-ball volume, indexed by dimension
BALL_VOLUME = {1: 2.0, 2: math.pi}

# kernels are treated as vanishing once their tail mass drops below this
KERNEL_TAIL = 1e-14


class TruncationError(ValueError):
    """Kernel mass outside the padded box exceeds the configured tolerance."""


class ResolutionError(ValueError):
    """A scale is too small (or a ladder too coarse) for the grid."""


def _as_tuple(v, dim):
    if np.isscalar(v):
        return (float(v),) * dim
    v = tuple(float(c) for c in v)
    if len(v) != dim:
        raise ValueError(f"expected {dim} coordinates, got {len(v)}")
    return v


@dataclass(frozen=True)
class Box:
    """Cubic box ``prod [lower_i, upper_i)`` split into ``points_per_axis`` cells per axis."""

    dim: int
    lower: tuple
    upper: tuple
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        object.__setattr__(self, "lower", _as_tuple(self.lower, self.dim))
        object.__setattr__(self, "upper", _as_tuple(self.upper, self.dim))
        if self.points_per_axis < 8:
            raise ValueError("points_per_axis must be at least 8")
        ext = [u - l for l, u in zip(self.lower, self.upper)]
        if min(ext) <= 0:
            raise ValueError("upper must exceed lower on every axis")
        if max(ext) - min(ext) > 1e-12 * max(ext):
            raise ValueError("box must be a cube (square cells)")

    @classmethod
    def interval(cls, lower, upper, n):
        return cls(1, (lower,), (upper,), n)

    @classmethod
    def square(cls, lower, upper, n):
        return cls(2, (lower, lower), (upper, upper), n)

    @property
    def length(self) -> float:
        return self.upper[0] - self.lower[0]

    @property
    def h(self) -> float:
        return self.length / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def center(self) -> tuple:
        return tuple(0.5 * (l + u) for l, u in zip(self.lower, self.upper))

    def axis(self, i: int = 0) -> np.ndarray:
        return self.lower[i] + (np.arange(self.points_per_axis) + 0.5) * self.h

    def mesh(self) -> list:
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return np.meshgrid(*[self.axis(i) for i in range(self.dim)], indexing="ij")

    def points(self) -> np.ndarray:
        """Node coordinates with shape ``self.shape + (dim,)``."""
        return np.stack(self.mesh(), axis=-1)

    def sample(self, fn: Callable) -> "GridFunction":
        """Sample ``fn(x)`` (1D) or ``fn(x, y)`` (2D) at the nodes."""
        return GridFunction(self, np.asarray(fn(*self.mesh()), dtype=float))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.shape))

    def pad(self, cells: int) -> "Box":
        """The box enlarged by ``cells`` cells on every side (same spacing)."""
        d = cells * self.h
        return Box(self.dim, tuple(l - d for l in self.lower),
                   tuple(u + d for u in self.upper), self.points_per_axis + 2 * cells)

    def refine(self, factor: int = 2) -> "Box":
        return Box(self.dim, self.lower, self.upper, self.points_per_axis * factor)

    def node_index(self, x) -> tuple:
        """Index of the cell containing the point ``x``."""
        x = _as_tuple(x, self.dim)
        idx = tuple(int(np.floor((c - l) / self.h)) for c, l in zip(x, self.lower))
        return tuple(min(max(i, 0), self.points_per_axis - 1) for i in idx)

    def key(self) -> tuple:
        return (self.dim, self.lower, self.upper, self.points_per_axis)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A scalar field sampled at the nodes of ``box``."""

    box: Box
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.shape != self.box.shape:
            raise ValueError(f"values shape {v.shape} does not match box {self.box.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _wrap(self, values):
        return GridFunction(self.box, values)

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.box != self.box:
                raise ValueError("grid functions live on different boxes")
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def abs(self) -> "GridFunction":
        return self._wrap(np.abs(self.values))

    @property
    def real(self) -> "GridFunction":
        return self._wrap(np.real(self.values))

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def restrict(self, mask) -> "GridFunction":
        return self._wrap(np.where(mask, self.values, 0))


@dataclass(frozen=True)
class ScaleLadder:
    """Logarithmically spaced scales ``t_min = t_0 < ... < t_{levels-1} = t_max``."""

    t_min: float
    t_max: float
    levels: int

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if self.levels < 8:
            raise ValueError("a ladder needs at least 8 levels")

    @property
    def t(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.levels)

    @property
    def dlog(self) -> float:
        """Quadrature weight of one level for the Haar measure dt/t."""
        return math.log(self.t_max / self.t_min) / (self.levels - 1)

    @classmethod
    def for_box(cls, box: Box, levels: int = 64, t_max: float | None = None):
        """Default ladder: smallest scale resolvable in time (t^2 = 2h^2), largest a quarter box."""
        return cls(math.sqrt(2.0) * box.h, t_max or box.length / 4, levels)


@dataclass(frozen=True, eq=False)
class HalfSpaceFunction:
    """Samples of a function on ``box x ladder``; ``values`` has shape ``box.shape + (levels,)``."""

    box: Box
    ladder: ScaleLadder
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        expected = self.box.shape + (self.ladder.levels,)
        if v.shape != expected:
            raise ValueError(f"values shape {v.shape} != {expected}")
        if not np.all(np.isfinite(v)):
            raise ValueError("half-space values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def level(self, k: int) -> GridFunction:
        return GridFunction(self.box, self.values[..., k])

    def _other(self, other):
        if isinstance(other, HalfSpaceFunction):
            if other.box != self.box or other.ladder != self.ladder:
                raise ValueError("half-space functions on different grids")
            return other.values
        return other

    def __add__(self, other):
        return HalfSpaceFunction(self.box, self.ladder, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return HalfSpaceFunction(self.box, self.ladder, self.values - self._other(other))

    def __mul__(self, c):
        return HalfSpaceFunction(self.box, self.ladder, self.values * self._other(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return HalfSpaceFunction(self.box, self.ladder, self.values / c)

    def l2_dtt(self) -> float:
        """``(int int |g|^2 dy dt/t)^(1/2)`` by the ladder quadrature."""
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2))
                         * self.box.cell_volume * self.ladder.dlog)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    @classmethod
    def zeros(cls, box, ladder):
        return cls(box, ladder, np.zeros(box.shape + (ladder.levels,)))


@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube with centre ``center`` and side ``side``."""

    center: tuple
    side: float

    def __post_init__(self):
        c = self.center
        c = (float(c),) if np.isscalar(c) else tuple(float(v) for v in c)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "side", float(self.side))
        if not self.side > 0:
            raise ValueError("cube side must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.side ** self.dim

    @property
    def lower(self) -> tuple:
        return tuple(c - self.side / 2 for c in self.center)

    @property
    def upper(self) -> tuple:
        return tuple(c + self.side / 2 for c in self.center)

    def dilate(self, a: float) -> "Cube":
        return Cube(self.center, a * self.side)

    def contains_cube(self, other: "Cube", tol: float = 1e-12) -> bool:
        return all(ol >= l - tol and ou <= u + tol for l, u, ol, ou in
                   zip(self.lower, self.upper, other.lower, other.upper))

    def sup_distance(self, pts: np.ndarray) -> np.ndarray:
        """``|y - x_Q|_inf`` for points with trailing coordinate axis."""
        return np.max(np.abs(pts - np.asarray(self.center)), axis=-1)

    def indicator(self, box: Box) -> GridFunction:
        """Fraction of each grid cell covered by the cube (exact for aligned cubes)."""
        frac = None
        h = box.h
        for i in range(box.dim):
            x = box.axis(i)
            lo = np.maximum(x - h / 2, self.lower[i])
            hi = np.minimum(x + h / 2, self.upper[i])
            f = np.clip(hi - lo, 0.0, None) / h
            frac = f if frac is None else np.multiply.outer(frac, f)
        return GridFunction(box, frac)

    def node_mask(self, box: Box) -> np.ndarray:
        """Nodes whose cell centre lies in the closed cube."""
        return self.sup_distance(box.points()) <= self.side / 2 + 1e-12 * self.side

    def tent_mask(self, box: Box, ladder: ScaleLadder) -> np.ndarray:
        """Half-space samples ``(y, t_k)`` with ``B(y, t_k)`` inside the cube."""
        margin = self.side / 2 - self.sup_distance(box.points())
        return ladder.t <= margin[..., None] + 1e-12 * self.side

    def key(self) -> tuple:
        return (tuple(round(c, 12) for c in self.center), round(self.side, 12))


def dyadic_family(box: Box, depth: int) -> list:
    """All dyadic subcubes of the box with generations ``0..depth``."""
    cubes = []
    for j in range(depth + 1):
        side = box.length / 2 ** j
        m = 2 ** j
        centers_1d = [[box.lower[i] + (a + 0.5) * side for a in range(m)] for i in range(box.dim)]
        for c in np.stack(np.meshgrid(*centers_1d, indexing="ij"), -1).reshape(-1, box.dim):
            cubes.append(Cube(tuple(c), side))
    return cubes


def integrate(f: GridFunction) -> float:
    """Midpoint-rule integral ``sum values * h^n``."""
    return complex(np.sum(f.values)).real * f.box.cell_volume if np.iscomplexobj(f.values) \
        else float(np.sum(f.values)) * f.box.cell_volume


def const_lp_norm(f: GridFunction, p: float) -> float:
    """``(int |f|^p)^(1/p)`` for a constant exponent ``p > 0``."""
    if p <= 0:
        raise ValueError("p must be positive")
    return (float(np.sum(np.abs(f.values) ** p)) * f.box.cell_volume) ** (1.0 / p)


# ---------------------------------------------------------------------------
# translation-invariant operators


def gaussian_reach(time: float, tail: float = KERNEL_TAIL) -> float:
    """Radius beyond which the heat kernel at ``time`` carries less than ``tail`` mass.

    The margin of 1.5 covers the polynomial factors of t-derivative kernels.
    """
    return 1.5 * math.sqrt(4.0 * time) * float(erfcinv(tail))


def padded_shape(box: Box, reach: float, max_pad_factor: float = 64.0) -> tuple:
    cells = int(math.ceil(reach / box.h)) + 1
    if cells > max_pad_factor * box.points_per_axis:
        raise TruncationError(
            f"kernel reach {reach:.3g} needs {cells} padding cells, more than "
            f"{max_pad_factor} x {box.points_per_axis}")
    n = sfft.next_fast_len(box.points_per_axis + cells, real=True)
    return (n,) * box.dim


def frequency_sq(box: Box, shape: tuple) -> np.ndarray:
    """``|xi|^2`` on the real-FFT frequency grid of a padded array of ``shape``."""
    h = box.h
    axes = []
    for i, n in enumerate(shape):
        if i == len(shape) - 1:
            axes.append(2 * np.pi * sfft.rfftfreq(n, d=h))
        else:
            axes.append(2 * np.pi * sfft.fftfreq(n, d=h))
    grids = np.meshgrid(*axes, indexing="ij")
    return sum(g ** 2 for g in grids)


class Spectral:
    """Forward transform of a zero-padded grid array, reusable for many multipliers."""

    def __init__(self, values: np.ndarray, box: Box, shape: tuple):
        self.box = box
        self.shape = shape
        self.complex = np.iscomplexobj(values)
        if self.complex:
            self.hat = (sfft.rfftn(values.real, s=shape), sfft.rfftn(values.imag, s=shape))
        else:
            self.hat = (sfft.rfftn(values, s=shape),)
        self.xi2 = frequency_sq(box, shape)

    def apply(self, symbol: np.ndarray) -> np.ndarray:
        crop = tuple(slice(0, n) for n in self.box.shape)
        out = [sfft.irfftn(hat * symbol, s=self.shape)[crop] for hat in self.hat]
        return out[0] + 1j * out[1] if self.complex else out[0]


def apply_multiplier(f: GridFunction, symbol: Callable, reach: float,
                     max_pad_factor: float = 64.0) -> GridFunction:
    """Apply the Fourier multiplier ``symbol(|xi|^2)`` to the zero extension of ``f``.

    ``reach`` is the effective radius of the corresponding kernel; the array is
    padded by at least that much so that cyclic wrap-around cannot reach the box.
    """
    shape = padded_shape(f.box, reach, max_pad_factor)
    sp = Spectral(f.values, f.box, shape)
    return GridFunction(f.box, sp.apply(symbol(sp.xi2)))


def heat_symbol(t: float) -> Callable:
    return lambda xi2: np.exp(-t * xi2)


def heat_kernel(x2: np.ndarray, t: float, dim: int) -> np.ndarray:
    """Gaussian heat kernel ``(4 pi t)^(-n/2) exp(-|x|^2 / 4t)`` at squared radius ``x2``."""
    return (4 * np.pi * t) ** (-dim / 2) * np.exp(-x2 / (4 * t))


def apply_kernel(f: GridFunction, kernel, t: float, *, tail_tol: float = 1e-10,
                 max_pad_factor: float = 64.0) -> GridFunction:
    """``int k_t(x - y) f(y) dy`` on the zero extension of ``f``.

    ``kernel`` is either the string ``"gaussian"`` (heat kernel at time ``t``,
    applied as a Fourier multiplier on a padded array) or a callable
    ``k(r, t)`` giving a radial profile.  Callables are sampled at every offset
    that can couple two nodes of the box and convolved directly, which is exact
    for the zero extension; the mass of the profile beyond the box diameter is
    what the grid cannot represent, and must stay below ``tail_tol``.
    """
    if t <= 0:
        raise ValueError("scale must be positive")
    if isinstance(kernel, str):
        if kernel != "gaussian":
            raise ValueError(f"unknown kernel {kernel!r}")
        return apply_multiplier(f, heat_symbol(t), gaussian_reach(t), max_pad_factor)
    box = f.box
    n = box.points_per_axis
    offs = np.arange(-2 * n, 2 * n + 1) * box.h
    r = np.sqrt(sum(g ** 2 for g in np.meshgrid(*([offs] * box.dim), indexing="ij")))
    k = np.asarray(kernel(r, t), dtype=float) * box.cell_volume
    total = float(np.sum(np.abs(k)))
    core = tuple(slice(n + 1, 3 * n) for _ in range(box.dim))
    if total > 0 and total - float(np.sum(np.abs(k[core]))) > tail_tol * total:
        raise TruncationError("kernel mass beyond the box diameter exceeds tolerance")
    full = fftconvolve(f.values, k[core], mode="full")
    crop = tuple(slice(n - 1, 2 * n - 1) for _ in range(box.dim))
    return GridFunction(box, full[crop])


def ladder_average(values: np.ndarray, weights: np.ndarray, dlog: float) -> np.ndarray:
    """Weighted ladder sum ``sum_k w_k v[..., k] * dlog`` in a fixed order."""
    return np.tensordot(values, weights, axes=([-1], [0])) * dlog


def stack_levels(arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack(arrays, axis=-1)
