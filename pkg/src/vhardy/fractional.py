"""Fractional integral L^{-gamma} = Gamma(gamma)^-1 int_0^inf t^(gamma-1) e^{-tL} dt."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import fft as sfft
from scipy.special import gamma as gamma_fn

from .exponent import ExponentFunction, sobolev_conjugate
from .grid import Cube, GridFunction, ScaleLadder, frequency_sq
from .hardy import hardy_norm
from .lebesgue import luxemburg_norm
from .semigroup import GAUSSIAN, SemigroupSpec


class TailError(ValueError):
    """The input has a mean component, against which the large-t integral diverges."""


@dataclass(frozen=True)
class FractionalParams:
    gamma: float
    m: float = 2.0
    n: int = 1

    def __post_init__(self):
        if not 0 < self.gamma < self.n / self.m:
            raise ValueError(f"gamma must lie in (0, n/m) = (0, {self.n / self.m:g})")


# quadrature of the time integral, in log t
T_LOW = 1e-40
LOG_STEP = 0.05
TAIL_CUT = 1e-12


def fractional_multiplier(xi2: np.ndarray, gamma: float, xi2_min: float | None = None,
                          step: float = LOG_STEP, t_low: float = T_LOW) -> np.ndarray:
    """``Gamma(gamma)^-1 int_0^inf t^(gamma-1) e^(-t xi^2) dt`` by quadrature (ideal ``|xi|^-2gamma``).

    The integral is taken in ``log t`` by the trapezoid rule from ``t_low`` to the
    time where ``t^gamma e^(-t xi2_min)`` drops below ``1e-12``; the piece below
    ``t_low`` is added in closed form, ``t_low^gamma / Gamma(gamma+1)`` (there
    ``e^(-t xi^2)`` is 1 to rounding).  Zero frequencies get 0.
    """
    xi2 = np.asarray(xi2, dtype=float)
    pos = xi2[xi2 > 0]
    out = np.zeros_like(xi2)
    if pos.size == 0:
        return out
    lo = float(pos.min()) if xi2_min is None else float(xi2_min)
    t_high = (math.log(1 / TAIL_CUT) + 10.0) / lo
    while t_high ** gamma * math.exp(-t_high * lo) > TAIL_CUT:
        t_high *= 2
    logt = np.arange(math.log(t_low), math.log(t_high) + step, step)
    w = np.full(logt.size, step)
    w[0] = w[-1] = step / 2
    tg = np.exp(gamma * logt)
    tt = np.exp(logt)
    # evaluate on a fine log grid of xi^2 and interpolate (the result is smooth in log xi)
    grid = np.geomspace(pos.min(), pos.max(), 4096) if pos.max() > pos.min() else pos[:1]
    vals = np.empty(grid.size)
    for i0 in range(0, grid.size, 256):
        blk = grid[i0:i0 + 256]
        vals[i0:i0 + 256] = (np.exp(-np.outer(blk, tt)) * tg) @ w
    vals = vals / gamma_fn(gamma) + t_low ** gamma / gamma_fn(gamma + 1)
    if grid.size == 1:
        out[xi2 > 0] = vals[0]
    else:
        out[xi2 > 0] = np.exp(np.interp(np.log(pos), np.log(grid), np.log(vals)))
    return out


def _check_mean(f: GridFunction, threshold: float):
    l1 = float(np.sum(np.abs(f.values)))
    if l1 == 0:
        return
    mean = abs(complex(np.sum(f.values)))
    if mean > threshold * l1:
        raise TailError(f"relative mean {mean / l1:.3g} exceeds {threshold:g}; the large-t "
                        "integral diverges against the zero mode")


def fractional_apply(f: GridFunction, params: FractionalParams, spec: SemigroupSpec = GAUSSIAN,
                     boundary: str = "zero", pad_factor: int | None = None,
                     mean_threshold: float = 1e-4) -> GridFunction:
    """``L^-gamma f`` for the Gaussian semigroup, as the quadrature multiplier above.

    ``boundary="zero"`` acts on the zero extension of ``f``, computed on an array
    ``pad_factor`` times longer per axis so that periodic images are far away;
    ``boundary="periodic"`` treats the box as a torus.
    """
    if spec.kind != "gaussian":
        raise ValueError("fractional integrals are implemented for the Gaussian semigroup")
    if f.box.dim != params.n:
        raise ValueError("params.n must equal the grid dimension")
    if not 0 < params.gamma < params.n / params.m:
        raise ValueError("gamma out of range")
    _check_mean(f, mean_threshold)
    box = f.box
    if boundary == "periodic":
        shape = box.shape
    elif boundary == "zero":
        factor = pad_factor or (8 if box.dim == 1 else 2)
        shape = tuple(sfft.next_fast_len(factor * s, real=True) for s in box.shape)
    else:
        raise ValueError("boundary must be 'zero' or 'periodic'")
    xi2 = frequency_sq(box, shape)
    mult = fractional_multiplier(xi2, params.gamma)
    crop = tuple(slice(0, n) for n in box.shape)
    parts = [f.values.real, f.values.imag] if np.iscomplexobj(f.values) else [f.values]
    outs = [sfft.irfftn(sfft.rfftn(v, s=shape) * mult, s=shape)[crop] for v in parts]
    return GridFunction(box, outs[0] + 1j * outs[1] if len(outs) == 2 else outs[0])


def fractional_hardy_check(family: Sequence[GridFunction], p: ExponentFunction,
                           params: FractionalParams, spec: SemigroupSpec = GAUSSIAN,
                           ladder: ScaleLadder | None = None, gate: float = 10.0) -> dict:
    """Ratios ``||L^-gamma f||_{H^q} / ||f||_{H^p}`` over a family, ``q`` the Sobolev lift of ``p``.

    Zero members are skipped.  Reported: the ratios, their maximum, the slope
    of ``log ratio`` against the member index (growth trend) and whether the
    maximum stays within ``gate`` times the median.
    """
    if p.p_plus > 1 + 1e-12:
        raise ValueError("the fractional Hardy check needs p_plus <= 1")
    q = sobolev_conjugate(p, params.gamma, params.m, params.n)
    ratios, skipped = [], 0
    for f in family:
        if f.is_zero():
            skipped += 1
            continue
        num = hardy_norm(fractional_apply(f, params, spec), q, spec, ladder)
        ratios.append(num / hardy_norm(f, p, spec, ladder))
    r = np.asarray(ratios)
    slope = float(np.polyfit(np.arange(r.size), np.log(r), 1)[0]) if r.size > 2 else 0.0
    med = float(np.median(r)) if r.size else 0.0
    return {"ratios": r.tolist(), "max": float(r.max()) if r.size else 0.0, "median": med,
            "log_slope": slope, "skipped": skipped, "q_minus": q.p_minus, "q_plus": q.p_plus,
            "passed": bool(r.size == 0 or (np.all(np.isfinite(r)) and r.max() <= gate * med))}


def coefficient_inequality(lambdas, cubes: Sequence[Cube], p: ExponentFunction,
                           params: FractionalParams, box=None) -> dict:
    """Both sides of ``||sum |lam_j| |R_j|^(delta/n) chi_Rj||_q <= C ||sum |lam_j| chi_Rj||_p``.

    ``delta = m gamma`` and ``q`` is the Sobolev lift of ``p``; the sums are
    sampled on ``box`` (default: the working box of ``p``).
    """
    q = sobolev_conjugate(p, params.gamma, params.m, params.n)
    box = box or p.box
    delta = params.m * params.gamma
    lhs = np.zeros(box.shape)
    rhs = np.zeros(box.shape)
    for lam, c in zip(lambdas, cubes):
        ind = c.indicator(box).values
        lhs += abs(lam) * c.volume ** (delta / params.n) * ind
        rhs += abs(lam) * ind
    a = luxemburg_norm(GridFunction(box, lhs), q).value
    b = luxemburg_norm(GridFunction(box, rhs), p).value
    return {"lhs": a, "rhs": b, "ratio": a / b if b > 0 else 0.0}
