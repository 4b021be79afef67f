"""BMO-type norms, Carleson measures and duality checks.

Boundary policy.  A grid function is extended outside the box by a constant
``c`` (the mean over the outermost layer of nodes) rather than by zero, and
semigroup operators act on ``f - c``: ``f - P f`` becomes ``(f-c) - P(f-c)``.
For compactly supported data ``c = 0`` and nothing changes; for constants the
oscillation vanishes identically, as it does on the whole space.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .exponent import ExponentFunction
from .grid import (Box, Cube, GridFunction, HalfSpaceFunction, ScaleLadder, dyadic_family,
                   integrate)
from .hardy import compute_Cms, default_ladder
from .lebesgue import cube_norm
from .semigroup import (GAUSSIAN, OperatorParams, SemigroupSpec, apply_projection_level,
                        apply_Pst, q_ladder)
from .tent import tent_C, tent_T


def far_field_constant(f: GridFunction) -> float:
    """Mean of ``f`` over the outermost layer of nodes (exactly ``f`` if ``f`` is constant)."""
    v = f.values
    if np.ptp(np.real(v)) == 0 and np.ptp(np.imag(v)) == 0:
        return v.flat[0]
    edge = np.ones(f.box.shape, dtype=bool)
    edge[tuple(slice(1, -1) for _ in range(f.box.dim))] = False
    return v[edge].mean()


def _family(box: Box, family) -> list:
    if isinstance(family, (int, np.integer)):
        if family < 3:
            raise ValueError("the cube family needs at least 4 dyadic generations (depth >= 3)")
        return dyadic_family(box, int(family))
    return list(family)


@dataclass
class SupReport:
    value: float
    attaining_cube: Cube | None
    family_depth: int | None
    per_cube: list
    stability_drift: float = 0.0

    def to_dict(self) -> dict:
        cube = None if self.attaining_cube is None else {
            "center": list(self.attaining_cube.center), "side": self.attaining_cube.side}
        return {"value": self.value, "attaining_cube": cube, "family_depth": self.family_depth,
                "stability_drift": self.stability_drift}


def bmo_report(f: GridFunction, p: ExponentFunction, s: int = 0, spec: SemigroupSpec = GAUSSIAN,
               family=7) -> SupReport:
    """``sup_Q |Q|^(1/2)/||chi_Q|| (int_Q |f - P_{s, l(Q)^m} f|^2)^(1/2)`` over the family."""
    box = f.box
    cubes = _family(box, family)
    g = f - far_field_constant(f)
    by_side = defaultdict(list)
    for q in cubes:
        by_side[round(q.side, 12)].append(q)
    best, arg, rows = 0.0, None, []
    for side, group in sorted(by_side.items()):
        if g.is_zero():
            diff2 = np.zeros(box.shape)
        else:
            diff2 = np.abs((g - apply_Pst(g, group[0].side ** spec.m, s, spec)).values) ** 2
        for q in group:
            w = q.indicator(box).values
            osc = math.sqrt(float(np.sum(diff2 * w)) * box.cell_volume)
            val = math.sqrt(q.volume) / cube_norm(q, p, box.h) * osc
            rows.append(val)
            if arg is None or val > best:
                best, arg = val, q
    depth = family if isinstance(family, (int, np.integer)) else None
    # relative gain of the sup from the finest generation of cubes
    finest = min(by_side)
    coarser = max((v for q, v in zip(_sorted_cubes(by_side), rows) if round(q.side, 12) != finest),
                  default=0.0)
    drift = (best - coarser) / best if best > 0 else 0.0
    return SupReport(best, arg, depth, rows, drift)


def _sorted_cubes(by_side) -> list:
    return [q for _, group in sorted(by_side.items()) for q in group]


def bmo_norm(f: GridFunction, p: ExponentFunction, s: int = 0, spec: SemigroupSpec = GAUSSIAN,
             family=7) -> float:
    return bmo_report(f, p, s, spec, family).value


@dataclass
class CarlesonMeasure:
    density: HalfSpaceFunction
    norm_value: float
    attaining_cube: Cube | None = None


def carleson_density(g: GridFunction, params: OperatorParams = OperatorParams(),
                     spec: SemigroupSpec = GAUSSIAN,
                     ladder: ScaleLadder | None = None) -> HalfSpaceFunction:
    """``|Q_{s,t^m}(I - P_{s0,t^m}) g|^2`` on the half-space grid (density against dy dt/t)."""
    ladder = ladder or default_ladder(g.box)
    h = g - far_field_constant(g)
    vals = np.zeros(g.box.shape + (ladder.levels,))
    if not h.is_zero():
        for k, t in enumerate(ladder.t):
            out = apply_projection_level(h, float(t) ** spec.m, params, spec)
            vals[..., k] = np.abs(out.values) ** 2
    return HalfSpaceFunction(g.box, ladder, vals)


def carleson_measure(g: GridFunction, p: ExponentFunction, params: OperatorParams = OperatorParams(),
                     spec: SemigroupSpec = GAUSSIAN, family=7,
                     ladder: ScaleLadder | None = None) -> CarlesonMeasure:
    density = carleson_density(g, params, spec, ladder)
    cubes = _family(g.box, family)
    # the Carleson functional of sqrt(density) is the per-cube quantity of the norm
    root = HalfSpaceFunction(density.box, density.ladder, np.sqrt(density.values))
    c, arg, cubes = tent_C(root, p, cubes, return_argmax=True)
    value = float(c.values.max())
    i = int(arg.flat[int(np.argmax(c.values))])
    return CarlesonMeasure(density, value, cubes[i] if i >= 0 else None)


def carleson_norm(g: GridFunction, p: ExponentFunction, s: int = 0, s0: int = 0,
                  spec: SemigroupSpec = GAUSSIAN, family=7,
                  ladder: ScaleLadder | None = None) -> float:
    """``sup_Q |Q|^(1/2)/||chi_Q|| (mu_g(tent Q))^(1/2)`` for ``d mu_g = |Q_{s,t^m}(I-P_{s0,t^m}) g|^2 dy dt/t``."""
    return carleson_measure(g, p, OperatorParams(s, s0), spec, family, ladder).norm_value


def tent_duality_check(f: HalfSpaceFunction, g: HalfSpaceFunction, rtol: float = 1e-12) -> dict:
    """Both sides of ``int int |f g| dy dt/t <= int T(f) T(g) dx`` with the shared cone stencil."""
    if f.box != g.box or f.ladder != g.ladder:
        raise ValueError("f and g must share the half-space grid")
    lhs = float(np.sum(np.abs(f.values * g.values))) * f.box.cell_volume * f.ladder.dlog
    tf, tg = tent_T(f, extend=True), tent_T(g, extend=True)
    rhs = float(np.sum(tf.values * tg.values)) * tf.box.cell_volume
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs * (1 + rtol) + 1e-300)}


# padding of the pairing domain, in units of t_max (Gaussian factor e^-16 at the edge)
PAIRING_PAD = 8.0


def pairing_via_tent(alpha, g: GridFunction, spec: SemigroupSpec = GAUSSIAN,
                     params: OperatorParams = OperatorParams(),
                     ladder: ScaleLadder | None = None) -> tuple:
    """``(int g alpha, C int int Q_{t^m} alpha . Q_{s,t^m}(I - P_{s0,t^m}) g dy dt/t)``.

    ``alpha`` is a ``Molecule`` or a ``GridFunction``.  For the Gaussian
    realization the adjoint operators coincide with the operators themselves.
    """
    a = alpha if isinstance(alpha, GridFunction) else alpha.values
    if not isinstance(a, GridFunction):
        raise TypeError("alpha must be a grid function on R^n or a molecule")
    if spec.kind != "gaussian":
        raise ValueError("the pairing identity is implemented for the self-adjoint Gaussian case")
    ladder = ladder or default_ladder(a.box)
    lhs = integrate(GridFunction(a.box, a.values * g.values))
    if g.is_zero() or a.is_zero():
        return lhs, 0.0
    # both factors spread beyond the box at large t; integrate over a padded box
    pad = int(math.ceil(PAIRING_PAD * ladder.t_max / a.box.h))
    big = a.box.pad(pad)
    sl = tuple(slice(pad, pad + n) for n in a.box.shape)
    ap, gp = np.zeros(big.shape, dtype=a.values.dtype), np.zeros(big.shape, dtype=g.values.dtype)
    ap[sl], gp[sl] = a.values, g.values
    ap, gp = GridFunction(big, ap), GridFunction(big, gp)
    qa = q_ladder(ap, ladder, spec)
    cms = compute_Cms(spec.m, params.s, params.s0)
    total = 0.0
    for k, t in enumerate(ladder.t):
        qg = apply_projection_level(gp, float(t) ** spec.m, params, spec)
        total += float(np.real(np.sum(qa.values[..., k] * qg.values)))
    rhs = cms * total * big.cell_volume * ladder.dlog
    return lhs, rhs
