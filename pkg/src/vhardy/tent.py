"""Tent spaces: cone and Carleson functionals, atoms, stopping-time decomposition.

Cone discretization.  The cone ``{(y, t): |y - x| < t}`` at level ``t_k`` is a
stencil of weights over node offsets: the fraction of each grid cell lying in
the ball of radius ``t_k`` (exact in 1D, supersampled in 2D and rescaled so the
weights integrate to ``omega_n t_k^n``).  Hence

    T(g)(x)^2 = sum_k dlog / t_k^n * sum_y w_k(x - y) |g(y, t_k)|^2 h^n

and, summing over every ``x`` the stencil can reach, ``||T g||_2^2`` equals
``omega_n`` times the ladder quadrature of ``int int |g|^2 dy dt/t`` to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .exponent import ExponentFunction
from .grid import (BALL_VOLUME, Box, Cube, GridFunction, HalfSpaceFunction, ScaleLadder,
                   const_lp_norm, dyadic_family)
from .lebesgue import a_functional, cube_norm, luxemburg_norm
from .maximal import hl_maximal


@lru_cache(maxsize=512)
def cone_stencil(h: float, t: float, dim: int, supersample: int = 8) -> np.ndarray:
    """Weights ``w(offset)`` (cell fraction inside ``B(0, t)``), odd-sized and centred."""
    m = int(math.ceil(t / h + 0.5))
    offs = np.arange(-m, m + 1) * h
    if dim == 1:
        lo = np.maximum(offs - h / 2, -t)
        hi = np.minimum(offs + h / 2, t)
        return np.clip(hi - lo, 0.0, None) / h
    sub = (np.arange(supersample) + 0.5) / supersample - 0.5
    px = (offs[:, None] + sub[None, :] * h).ravel()
    inside = (px[:, None] ** 2 + px[None, :] ** 2) < t * t
    w = inside.reshape(2 * m + 1, supersample, 2 * m + 1, supersample).mean(axis=(1, 3))
    total = w.sum() * h * h
    if total > 0:
        w = w * (BALL_VOLUME[2] * t * t / total)
    else:
        w[m, m] = BALL_VOLUME[2] * t * t / (h * h)
    return w


def cone_reach_cells(box: Box, ladder: ScaleLadder) -> int:
    return int(math.ceil(ladder.t_max / box.h + 0.5))


def tent_T(g: HalfSpaceFunction, extend: bool = False) -> GridFunction:
    """Cone functional ``T(g)(x) = (int_{|y-x|<t} |g(y,t)|^2 dy dt / t^(n+1))^(1/2)``.

    With ``extend=True`` the result lives on the box padded by ``t_max`` so that
    every ``x`` whose cone meets the support is included.
    """
    box, ladder = g.box, g.ladder
    n = box.dim
    pad = cone_reach_cells(box, ladder) if extend else 0
    out_box = box.pad(pad) if pad else box
    acc = np.zeros(out_box.shape)
    a2 = np.abs(g.values) ** 2
    for k, t in enumerate(ladder.t):
        lev = a2[..., k]
        if not np.any(lev):
            continue
        if pad:
            lev = np.pad(lev, pad)
        w = cone_stencil(box.h, float(t), n)
        conv = fftconvolve(lev, w, mode="same") if w.size > 1 else lev * w.ravel()[0]
        acc += conv * (ladder.dlog * box.cell_volume / t ** n)
    np.clip(acc, 0.0, None, out=acc)
    return GridFunction(out_box, np.sqrt(acc))


def tent_norm(g: HalfSpaceFunction, p: ExponentFunction | float) -> float:
    """``||T(g)||`` in ``L^p(.)`` (Luxemburg) or in ``L^q`` for a number ``q``."""
    tg = tent_T(g, extend=True)
    if isinstance(p, ExponentFunction):
        return luxemburg_norm(tg, p).value
    return const_lp_norm(tg, float(p))


def _cumulative_levels(g: HalfSpaceFunction) -> np.ndarray:
    a2 = np.abs(g.values) ** 2
    return np.concatenate([np.zeros(a2.shape[:-1] + (1,)), np.cumsum(a2, axis=-1)], axis=-1)


def tent_mass(g: HalfSpaceFunction, cube: Cube, cumulative: np.ndarray | None = None) -> float:
    """``int int_{tent(Q)} |g|^2 dy dt/t`` by the ladder quadrature."""
    cum = _cumulative_levels(g) if cumulative is None else cumulative
    box = g.box
    pts = box.points()
    margin = cube.side / 2 - cube.sup_distance(pts)
    sel = margin >= g.ladder.t_min * (1 - 1e-12)
    if not np.any(sel):
        return 0.0
    idx = np.searchsorted(g.ladder.t, margin[sel] * (1 + 1e-12), side="right")
    return float(np.sum(cum[sel][np.arange(idx.size), idx])) \
        * box.cell_volume * g.ladder.dlog


def tent_C(g: HalfSpaceFunction, p: ExponentFunction, cubes: Sequence[Cube] | int,
           return_argmax: bool = False):
    """Carleson functional ``C(g)(x) = sup_{Q ∋ x} |Q|^(1/2)/||chi_Q|| (tent mass of Q)^(1/2)``.

    ``cubes`` is a family of cubes or an integer depth of the dyadic family of
    the box.  With ``return_argmax`` the index of the attaining cube per node is
    returned as well (-1 where every cube gives 0).
    """
    box = g.box
    if isinstance(cubes, (int, np.integer)):
        cubes = dyadic_family(box, int(cubes))
    cum = _cumulative_levels(g)
    best = np.zeros(box.shape)
    arg = -np.ones(box.shape, dtype=int)
    for i, q in enumerate(cubes):
        mass = tent_mass(g, q, cum)
        if mass <= 0:
            continue
        val = math.sqrt(q.volume * mass) / cube_norm(q, p, box.h)
        mask = q.node_mask(box)
        upd = mask & (val > best)
        best[upd] = val
        arg[upd] = i
    out = GridFunction(box, best)
    return (out, arg, list(cubes)) if return_argmax else out


# ---------------------------------------------------------------------------
# atoms


def tent_region(cube: Cube, box: Box, ladder: ScaleLadder) -> np.ndarray:
    """Boolean mask of half-space samples ``(y, t_k)`` with ``B(y, t_k)`` inside the cube."""
    return cube.tent_mask(box, ladder)


@dataclass(eq=False)
class TentAtom:
    """Tent atom stored as a block on ``box x ladder`` (nodes ``start..start+shape``, levels ``0..K``)."""

    cube: Cube
    box: Box
    ladder: ScaleLadder
    start: tuple
    block: np.ndarray

    @property
    def values(self) -> HalfSpaceFunction:
        full = np.zeros(self.box.shape + (self.ladder.levels,), dtype=self.block.dtype)
        full[self._slices()] = self.block
        return HalfSpaceFunction(self.box, self.ladder, full)

    def _slices(self):
        sl = tuple(slice(s, s + w) for s, w in zip(self.start, self.block.shape[:-1]))
        return sl + (slice(0, self.block.shape[-1]),)

    def add_into(self, out: np.ndarray, coeff: complex = 1.0):
        out[self._slices()] += coeff * self.block

    def l2_dtt(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.block) ** 2)) * self.box.cell_volume
                         * self.ladder.dlog)

    def max_level(self) -> int:
        return self.block.shape[-1]


@dataclass
class TentDecomposition:
    lambdas: np.ndarray
    atoms: list
    cubes: list
    a_value: float
    box: Box
    ladder: ScaleLadder
    levels: list = field(default_factory=list)
    window: tuple = (0, 0)
    coarse_count: int = 0

    def reconstruct(self) -> HalfSpaceFunction:
        dtype = complex if np.iscomplexobj(self.lambdas) or any(
            np.iscomplexobj(a.block) for a in self.atoms) else float
        out = np.zeros(self.box.shape + (self.ladder.levels,), dtype=dtype)
        for lam, atom in zip(self.lambdas, self.atoms):
            atom.add_into(out, lam)
        return HalfSpaceFunction(self.box, self.ladder, out)

    def __len__(self):
        return len(self.atoms)

    def summary(self) -> dict:
        return {"terms": len(self.atoms), "a_value": self.a_value,
                "level_window": list(self.window), "coarse_terms": self.coarse_count,
                "sum_abs_lambda": float(np.sum(np.abs(self.lambdas)))}


def t2q_bound(cube: Cube, p: ExponentFunction, q: float, h: float | None = None) -> float:
    """Size allowance ``|Q|^(1/q) / ||chi_Q||`` of a tent atom."""
    return cube.volume ** (1.0 / q) / cube_norm(cube, p, h)


def is_tent_atom(a: HalfSpaceFunction, cube: Cube, p: ExponentFunction,
                 qs: Sequence[float] = (2.0,), rtol: float = 1e-9) -> bool:
    """Support in the tent of ``cube`` and ``||a||_{T_2^q} <= |Q|^(1/q)/||chi_Q||`` for all q."""
    inside = tent_region(cube, a.box, a.ladder)
    scale = float(np.max(np.abs(a.values))) if a.values.size else 0.0
    if scale > 0 and np.any(np.abs(a.values[~inside]) > 1e-12 * scale):
        return False
    for q in qs:
        if tent_norm(a, float(q)) > t2q_bound(cube, p, q, a.box.h) * (1 + rtol):
            return False
    return True


# ---------------------------------------------------------------------------
# stopping-time decomposition


def _whitney_labels(inside: np.ndarray, box: Box):
    """Maximal dyadic cube ``Q`` of the box with ``3Q`` inside the set, per node.

    Returns ``(generation, index-array)`` per node; generation -1 marks nodes
    with no admissible cube (they fall back to their own cell).
    """
    n = box.points_per_axis
    dim = box.dim
    levels = int(round(math.log2(n)))
    if 2 ** levels != n:
        raise ValueError("stopping-time decomposition needs a power-of-two grid")
    gen = -np.ones(box.shape, dtype=int)
    for j in range(levels + 1):
        b = n // 2 ** j
        m = 2 ** j
        blocks = inside.reshape(*sum(((m, b) for _ in range(dim)), ())).all(
            axis=tuple(range(1, 2 * dim, 2)))
        padded = np.pad(blocks, 1, constant_values=False)
        ok = np.ones_like(blocks)
        for shift in np.ndindex(*(3,) * dim):
            sl = tuple(slice(s, s + m) for s in shift)
            ok &= padded[sl]
        cell_ok = ok
        for ax in range(dim):
            cell_ok = np.repeat(cell_ok, b, axis=ax)
        newly = cell_ok & (gen < 0)
        gen[newly] = j
    return gen


def _whitney_cube_id(gen: np.ndarray, box: Box) -> np.ndarray:
    """Integer id of the Whitney cube of each node (unique across generations)."""
    n = box.points_per_axis
    idx = np.indices(box.shape)
    levels = int(round(math.log2(n)))
    g = np.where(gen < 0, levels, gen)
    b = n // 2 ** g
    cid = np.zeros(box.shape, dtype=np.int64)
    for ax in range(box.dim):
        cid = cid * n + idx[ax] // b
    return cid * (levels + 2) + g


def tent_atomic_decompose(f: HalfSpaceFunction, p: ExponentFunction,
                          tol: float = 1e-8) -> TentDecomposition:
    """Stopping-time atomic decomposition of a half-space function.

    1. ``T = T(f)`` on the box; levels ``k`` run over the window
       ``[floor(log2 min+ T) - 1, ceil(log2 max T)]`` and ``O_k = {T > 2^k}``.
    2. ``O*_k = {M chi_{O_k} > 1/2}`` (uncentered maximal function on cubes).
    3. A sample ``(y, t)`` is assigned the largest ``k`` with ``B(y, t)`` inside
       ``O*_k`` (distance to the complement, box exterior included, minus half a
       cell diagonal); samples fitting no ``O*_k`` form the coarse group.
    4. Within a level, samples are grouped by the maximal dyadic cube ``Q`` with
       ``3Q`` inside ``O*_k`` that contains ``y`` (single cells as fallback; the
       coarse group uses the whole box).  Each group becomes one atom whose
       cube is concentric with the group cube and just large enough for every
       sample to lie in its tent.
    5. ``lam = ||piece||_{T_2^2} ||chi_Q|| / |Q|^(1/2)`` and ``a = piece / lam``,
       so each atom meets the ``q = 2`` size bound with equality and the pieces
       sum back to ``f`` exactly.
    """
    if not np.all(np.isfinite(f.values)):
        raise ValueError("non-finite half-space values")
    box, ladder = f.box, f.ladder
    n = box.dim
    tgrid = ladder.t
    nonzero = np.abs(f.values) > 0
    if not np.any(nonzero):
        return TentDecomposition(np.zeros(0), [], [], 0.0, box, ladder)
    T = tent_T(f).values
    pos = T[T > 0]
    k_lo = int(math.floor(math.log2(pos.min()))) - 1
    k_hi = int(math.ceil(math.log2(T.max())))
    half_diag = 0.5 * box.h * math.sqrt(n)
    level_of = np.full(f.values.shape, k_lo - 1, dtype=int)
    whitney = {}
    for k in range(k_lo, k_hi + 1):
        ok = T > 2.0 ** k
        if not np.any(ok):
            break
        star = hl_maximal(GridFunction(box, ok.astype(float))).values > 0.5
        star |= ok
        dist = ndimage.distance_transform_edt(np.pad(star, 1), sampling=box.h)
        dist = dist[tuple(slice(1, -1) for _ in range(n))] - half_diag
        fits = tgrid <= dist[..., None] * (1 + 1e-12)
        level_of[fits] = k
        whitney[k] = _whitney_cube_id(_whitney_labels(star, box), box)
    levels_used = sorted(set(np.unique(level_of[nonzero]).tolist()))
    pts = box.points()
    lambdas, atoms, cubes, used = [], [], [], []
    coarse = 0
    omega = BALL_VOLUME[n]
    for k in levels_used:
        sel = nonzero & (level_of == k)
        node_any = sel.any(axis=-1)
        if k < k_lo:
            ids = np.zeros(box.shape, dtype=np.int64)
        else:
            ids = whitney[k]
        for cid in np.unique(ids[node_any]):
            nodes = node_any & (ids == cid)
            mask = sel & nodes[..., None]
            piece_nodes = np.argwhere(nodes)
            lo = piece_nodes.min(axis=0)
            hi = piece_nodes.max(axis=0) + 1
            lev_hi = int(np.max(np.nonzero(mask.any(axis=tuple(range(n))))[0])) + 1
            if k < k_lo:
                centre = np.asarray(box.center)
            else:
                centre = _group_centre(cid, box)
            sub = tuple(slice(a, b) for a, b in zip(lo, hi))
            block_mask = mask[sub + (slice(0, lev_hi),)]
            block = np.where(block_mask, f.values[sub + (slice(0, lev_hi),)], 0)
            yd = np.max(np.abs(pts[sub] - centre), axis=-1)
            reach = np.where(block_mask, yd[..., None] + tgrid[:lev_hi], 0.0).max()
            cube = Cube(tuple(centre), 2.0 * reach * (1 + 1e-9))
            l2 = math.sqrt(float(np.sum(np.abs(block) ** 2)) * box.cell_volume * ladder.dlog)
            if l2 == 0:
                continue
            lam = math.sqrt(omega) * l2 * cube_norm(cube, p, box.h, tol) / math.sqrt(cube.volume)
            atoms.append(TentAtom(cube, box, ladder, tuple(int(v) for v in lo), block / lam))
            lambdas.append(lam)
            cubes.append(cube)
            used.append(k)
            coarse += int(k < k_lo)
    lam_arr = np.asarray(lambdas, dtype=float)
    a_val = a_functional(lam_arr, cubes, p, tol=tol) if cubes else 0.0
    return TentDecomposition(lam_arr, atoms, cubes, a_val, box, ladder, used, (k_lo, k_hi), coarse)


def _group_centre(cid: int, box: Box) -> np.ndarray:
    n = box.points_per_axis
    levels = int(round(math.log2(n)))
    g = int(cid % (levels + 2))
    rest = int(cid // (levels + 2))
    b = n // 2 ** g
    idx = []
    for _ in range(box.dim):
        idx.append(rest % n)
        rest //= n
    idx = idx[::-1]
    side = b * box.h
    return np.array([box.lower[a] + (idx[a] + 0.5) * side for a in range(box.dim)])


def sampling_inequality(lambdas, atoms: Sequence[GridFunction], cubes: Sequence[Cube],
                        p: ExponentFunction) -> dict:
    """Both sides of ``||(sum |lam_j a_j|^pu)^(1/pu)|| <= C ||(sum |lam_j chi_Qj|^pu)^(1/pu)||``."""
    pu = p.underline_p
    box = atoms[0].box
    lhs_acc = np.zeros(box.shape)
    rhs_acc = np.zeros(box.shape)
    for lam, a, q in zip(lambdas, atoms, cubes):
        lhs_acc += np.abs(lam * a.values) ** pu
        rhs_acc += (abs(lam) * q.indicator(box).values) ** pu
    lhs = luxemburg_norm(GridFunction(box, lhs_acc ** (1 / pu)), p).value
    rhs = luxemburg_norm(GridFunction(box, rhs_acc ** (1 / pu)), p).value
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0}
