"""Variable-exponent Lebesgue space: modular, Luxemburg norm, coefficient functional."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exponent import ExponentFunction
from .grid import Box, Cube, GridFunction

DEFAULT_TOL = 1e-8


class InvalidInputError(ValueError):
    pass


@dataclass(frozen=True)
class NormResult:
    value: float
    modular_at_value: float
    iterations: int
    bracket: tuple

    def to_dict(self) -> dict:
        return {"value": self.value, "modular_at_value": self.modular_at_value,
                "iterations": self.iterations}


def modular(f: GridFunction, p: ExponentFunction) -> float:
    """``int |f(x)|^p(x) dx`` by the midpoint rule."""
    a = np.abs(f.values)
    pv = p.on_box(f.box)
    nz = a > 0
    return float(np.sum(a[nz] ** pv[nz])) * f.box.cell_volume


def _log_modular(loga, pv, w, log_lam):
    return float(np.sum(np.exp(pv * (loga - log_lam)))) * w


def luxemburg_norm(f: GridFunction, p: ExponentFunction, tol: float = DEFAULT_TOL,
                   max_iter: int = 400) -> NormResult:
    """``inf{lam > 0 : modular(f/lam) <= 1}`` by bisection in ``log lam``.

    The bracket comes from ``M = modular(f)``: since ``lam -> modular(f/lam)``
    decreases strictly and is squeezed between ``M lam^-p_minus`` and
    ``M lam^-p_plus`` on either side of 1, the root lies between the smallest
    and the largest of ``M^(1/p_plus)``, ``M^(1/p_minus)`` and 1.  Bisection stops
    once ``|modular(f/lam) - 1| <= tol``.
    """
    if not 0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    if not np.all(np.isfinite(f.values)):
        raise InvalidInputError("non-finite values")
    a = np.abs(f.values)
    nz = a > 0
    if not np.any(nz):
        return NormResult(0.0, 0.0, 0, (0.0, 0.0))
    loga = np.log(a[nz])
    pv = p.on_box(f.box)[nz]
    w = f.box.cell_volume
    pmin, pmax = float(pv.min()), float(pv.max())
    logm = math.log(_log_modular(loga, pv, w, 0.0))
    cands = [logm / pmax, logm / pmin, 0.0]
    lo, hi = min(cands), max(cands)
    bracket = (math.exp(lo), math.exp(hi))
    # exact hits at the bracket ends (for instance indicator-type inputs)
    for end in (lo, hi):
        r = _log_modular(loga, pv, w, end)
        if abs(r - 1.0) <= tol:
            return NormResult(math.exp(end), r, 0, bracket)
    it, mid, r = 0, lo, math.nan
    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        r = _log_modular(loga, pv, w, mid)
        if abs(r - 1.0) <= tol or hi - lo < 1e-15:
            break
        if r > 1.0:
            lo = mid
        else:
            hi = mid
    return NormResult(math.exp(mid), r, it, bracket)


def lp_norm(f: GridFunction, p: ExponentFunction | float, tol: float = DEFAULT_TOL) -> float:
    """Luxemburg norm for an exponent function, plain L^q norm for a number."""
    if isinstance(p, ExponentFunction):
        return luxemburg_norm(f, p, tol).value
    from .grid import const_lp_norm

    return const_lp_norm(f, float(p))


# ---------------------------------------------------------------------------
# cube norms and the coefficient functional


def lattice_box(p_box: Box, lower, upper, h: float | None = None) -> Box:
    """Smallest cubic box on the lattice of ``p_box`` (spacing ``h``) covering ``[lower, upper]``."""
    h = h or p_box.h
    origin = np.asarray(p_box.lower)
    lo = origin + np.floor((np.asarray(lower) - origin) / h + 1e-9) * h
    hi = origin + np.ceil((np.asarray(upper) - origin) / h - 1e-9) * h
    cells = int(round(float(np.max(hi - lo)) / h))
    cells = max(cells, 8)
    return Box(p_box.dim, tuple(lo), tuple(lo + cells * h), cells)


class CubeNormCache:
    """Thread-safe memo of ``||chi_Q||_p`` keyed by cube geometry and grid spacing."""

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, key):
        return self._data.get(key)

    def put(self, key, value):
        with self._lock:
            self._data.setdefault(key, value)
        return self._data[key]

    def __len__(self):
        return len(self._data)


_CACHES: dict = {}
_CACHES_LOCK = threading.Lock()


def _cache_for(p: ExponentFunction) -> CubeNormCache:
    key = id(p)
    with _CACHES_LOCK:
        entry = _CACHES.get(key)
        if entry is None or entry[0] is not p:
            entry = (p, CubeNormCache())
            _CACHES[key] = entry
        return entry[1]


def cube_norm(cube: Cube, p: ExponentFunction, h: float | None = None,
              tol: float = DEFAULT_TOL) -> float:
    """``||chi_Q||_p`` with the cube sampled as cell-coverage fractions at spacing ``h``."""
    h = h or p.box.h
    cache = _cache_for(p)
    key = (cube.key(), round(h, 15))
    hit = cache.get(key)
    if hit is not None:
        return hit
    if p.is_constant:
        val = cube.volume ** (1.0 / p.p_minus)
    else:
        box = lattice_box(p.box, cube.lower, cube.upper, h)
        val = luxemburg_norm(cube.indicator(box), p, tol).value
    return cache.put(key, val)


def a_functional(lambdas: Sequence[complex], cubes: Sequence[Cube], p: ExponentFunction,
                 box: Box | None = None, tol: float = DEFAULT_TOL) -> float:
    """``|| (sum_j (|lam_j| chi_Qj / ||chi_Qj||)^pu)^(1/pu) ||_p`` with ``pu = min(1, p_minus)``.

    The sum is sampled on ``box`` (by default the smallest lattice box holding
    every cube, at the spacing of ``p.box``).
    """
    if len(lambdas) != len(cubes):
        raise ValueError("lambdas and cubes must have the same length")
    if len(cubes) == 0:
        return 0.0
    pu = p.underline_p
    if box is None:
        lo = np.min([c.lower for c in cubes], axis=0)
        hi = np.max([c.upper for c in cubes], axis=0)
        box = lattice_box(p.box, lo, hi)
    acc = np.zeros(box.shape)
    for lam, q in zip(lambdas, cubes):
        if lam == 0:
            continue
        acc += (abs(lam) / cube_norm(q, p, box.h, tol)) ** pu * q.indicator(box).values ** pu
    return luxemburg_norm(GridFunction(box, acc ** (1.0 / pu)), p, tol).value


@dataclass
class CubeRatioReport:
    constant: float
    rows: list
    passed: bool

    def to_dict(self) -> dict:
        return {"constant": self.constant, "passed": self.passed, "pairs": self.rows}


def cube_ratio_check(p: ExponentFunction, pairs: Sequence[tuple], h: float | None = None,
                     tol: float = DEFAULT_TOL) -> CubeRatioReport:
    """Smallest ``C`` with ``C^-1 rho^(1/p_minus) <= r <= C rho^(1/p_plus)`` over nested pairs.

    Here ``r = ||chi_Q1|| / ||chi_Q2||`` and ``rho = |Q1| / |Q2|``.
    """
    rows, cmax = [], 1.0
    for q1, q2 in pairs:
        if not q2.contains_cube(q1):
            raise ValueError("cube pairs must be nested (Q1 inside Q2)")
        r = cube_norm(q1, p, h, tol) / cube_norm(q2, p, h, tol)
        rho = q1.volume / q2.volume
        upper = rho ** (1.0 / p.p_plus)
        lower = rho ** (1.0 / p.p_minus)
        c = max(r / upper, lower / r, 1.0)
        cmax = max(cmax, c)
        rows.append({"side_inner": q1.side, "side_outer": q2.side, "ratio": r,
                     "volume_ratio": rho, "pair_constant": c})
    return CubeRatioReport(cmax, rows, bool(math.isfinite(cmax)))


def dyadic_tower(base: Cube, levels: int) -> list:
    """``[Q, 2Q, ..., 2^levels Q]`` sharing the lower corner of ``Q`` (so each contains the last)."""
    out = []
    for k in range(levels + 1):
        side = base.side * 2 ** k
        out.append(Cube(tuple(l + side / 2 for l in base.lower), side))
    return out
