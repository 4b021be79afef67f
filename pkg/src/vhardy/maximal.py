"""Uncentered Hardy-Littlewood maximal operator and vector-valued checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .exponent import ExponentFunction
from .grid import Box, Cube, GridFunction
from .lebesgue import a_functional, luxemburg_norm


class HypothesisViolationError(ValueError):
    pass


@dataclass(frozen=True)
class MaximalConfig:
    """Averaging sets: ``geometry`` is "cubes" or "balls"; ``radii`` are half-sides / radii.

    ``radii=None`` selects the default ladder: in 1D every interval made of
    whole cells; in 2D half-sides (or radii) growing geometrically by ``ratio``
    from ``h/2`` to the box diameter.
    """

    geometry: str = "cubes"
    radii: tuple | None = None
    ratio: float = 1.25

    def __post_init__(self):
        if self.geometry not in ("cubes", "balls"):
            raise ValueError("geometry must be 'cubes' or 'balls'")
        if self.radii is not None:
            r = np.asarray(self.radii, dtype=float)
            if r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise ValueError("radii must be positive and increasing")

    def widths(self, box: Box) -> list:
        """Window widths in cells (for cubes) derived from the radii."""
        n = box.points_per_axis
        if self.radii is None:
            if box.dim == 1:
                return list(range(1, n + 1))
            out, w = [], 1.0
            while w < n:
                out.append(int(round(w)))
                w *= self.ratio
            out.append(n)
            return sorted(set(out))
        return sorted({min(n, max(1, int(round(2 * r / box.h)))) for r in self.radii})

    def ball_radii(self, box: Box) -> list:
        if self.radii is not None:
            return [float(r) for r in self.radii]
        out, r = [], box.h / 2
        diam = box.length * math.sqrt(box.dim)
        while r < diam:
            out.append(r)
            r *= self.ratio
        return out


def _window_max(means: np.ndarray, k: int, n: int, dim: int) -> np.ndarray:
    """For each node, the largest mean over the width-``k`` windows containing it."""
    pad = [(0, n - s) for s in means.shape]
    a = np.pad(means, pad, constant_values=-np.inf)
    origin = k - 1 - k // 2
    return ndimage.maximum_filter(a, size=(k,) * dim, origin=(origin,) * dim,
                                  mode="constant", cval=-np.inf)


def _cube_means(cs: np.ndarray, k: int, dim: int) -> np.ndarray:
    """Window sums of width ``k`` from a zero-padded cumulative-sum table."""
    if dim == 1:
        return cs[k:] - cs[:-k]
    return cs[k:, k:] - cs[:-k, k:] - cs[k:, :-k] + cs[:-k, :-k]


def _disk_dilation(a: np.ndarray, m: int, r: float, h: float) -> np.ndarray:
    """``max`` of ``a`` over the disk of radius ``r`` around each node (zero outside).

    The disk is split into rows, each handled by a 1D sliding maximum.
    """
    if a.ndim == 1:
        return ndimage.maximum_filter1d(a, 2 * m + 1, mode="constant", cval=0.0)
    out = np.zeros_like(a)
    n = a.shape[0]
    for dy in range(-m, m + 1):
        if abs(dy) >= n:
            continue
        w = int(math.floor(math.sqrt(max(r * r - (dy * h) ** 2, 0.0)) / h + 1e-12))
        shifted = np.zeros_like(a)
        if dy >= 0:
            shifted[:n - dy] = a[dy:]
        else:
            shifted[-dy:] = a[:n + dy]
        np.maximum(out, ndimage.maximum_filter1d(shifted, 2 * w + 1, axis=1, mode="constant",
                                                 cval=0.0), out=out)
    return out


def hl_maximal(f: GridFunction, cfg: MaximalConfig | None = None) -> GridFunction:
    """``Mf(x) = max over averaging sets B containing x of |B|^-1 int_B |f|``.

    Cubes are unions of whole cells; the max over all positions of a given
    width is taken with a sliding maximum filter, so every admissible window
    containing the node is visited.  Balls are discrete disks of grid cells,
    averaged by convolution and maximized over all centres within the radius
    of the node.  Sets reaching outside the box see the zero extension, which
    can only lower their averages, so they are skipped.
    """
    cfg = cfg or MaximalConfig()
    box = f.box
    a = np.abs(f.values).astype(float)
    n, dim = box.points_per_axis, box.dim
    out = np.zeros_like(a)
    if cfg.geometry == "cubes":
        cs = a
        for ax in range(dim):
            cs = np.cumsum(cs, axis=ax)
        cs = np.pad(cs, [(1, 0)] * dim)
        for k in cfg.widths(box):
            means = _cube_means(cs, k, dim) / k ** dim
            np.maximum(out, _window_max(means, k, n, dim), out=out)
        return GridFunction(box, out)
    for r in cfg.ball_radii(box):
        m = min(int(math.floor(r / box.h)), 2 * n)
        offs = np.arange(-m, m + 1) * box.h
        grids = np.meshgrid(*([offs] * dim), indexing="ij")
        disk = (sum(g ** 2 for g in grids) <= r ** 2).astype(float)
        avg = fftconvolve(a, disk, mode="same") / disk.sum() if m > 0 else a.copy()
        np.maximum(out, _disk_dilation(np.clip(avg, 0.0, None), m, r, box.h), out=out)
    return GridFunction(box, out)


def _vector_sum(fs, r):
    acc = np.zeros(fs[0].box.shape)
    for f in fs:
        acc += np.abs(f.values) ** r
    return GridFunction(fs[0].box, acc ** (1.0 / r))


def fs_vector_check(fs: Sequence[GridFunction], r: float, p: ExponentFunction,
                    cfg: MaximalConfig | None = None) -> dict:
    """Ratio ``||(sum (M f_j)^r)^(1/r)||_p / ||(sum |f_j|^r)^(1/r)||_p`` (0 for a zero family)."""
    if p.p_minus <= 1:
        raise HypothesisViolationError("the vector-valued inequality needs p_minus > 1")
    if not r > 1:
        raise ValueError("r must exceed 1")
    if len(fs) == 0:
        return {"ratio": 0.0, "lhs": 0.0, "rhs": 0.0}
    rhs = luxemburg_norm(_vector_sum(fs, r), p).value
    if rhs == 0:
        return {"ratio": 0.0, "lhs": 0.0, "rhs": 0.0}
    lhs = luxemburg_norm(_vector_sum([hl_maximal(f, cfg) for f in fs], r), p).value
    return {"ratio": lhs / rhs, "lhs": lhs, "rhs": rhs}


def dilation_domination(cube: Cube, k: int, r: float, box: Box) -> bool:
    """Nodewise ``chi_{2^k Q} <= 2^(k n / r) (M chi_Q)^(1/r)``."""
    big = cube.dilate(2 ** k).indicator(box).values
    m = hl_maximal(cube.indicator(box)).values
    bound = 2.0 ** (k * box.dim / r) * m ** (1.0 / r)
    return bool(np.all(big <= bound * (1 + 1e-12) + 1e-12))


def dilation_scaling(lambdas, cubes: Sequence[Cube], p: ExponentFunction, r: float,
                     ks=(1, 2, 3, 4), box: Box | None = None) -> dict:
    """Growth of the coefficient functional when every cube is dilated by ``2^k``.

    Returns the ratios ``A(lam, 2^k Q) / A(lam, Q)`` and the least-squares slope
    of their base-2 logarithm in ``k``, to compare with ``n (1/r - 1/p_plus)``.
    """
    base = a_functional(lambdas, cubes, p, box)
    ratios = []
    for k in ks:
        ratios.append(a_functional(lambdas, [c.dilate(2 ** k) for c in cubes], p, box) / base)
    slope = float(np.polyfit(np.asarray(ks, float), np.log2(ratios), 1)[0])
    n = cubes[0].dim
    return {"ratios": ratios, "slope": slope, "bound_slope": n * (1.0 / r - 1.0 / p.p_plus)}
