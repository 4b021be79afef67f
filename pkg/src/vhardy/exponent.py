"""Variable exponents p(.): presets, bounds, log-Hoelder screening, Sobolev lift."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import compile_formula
from .grid import Box


class InvalidExponentError(ValueError):
    pass


class ExponentOverflowError(ValueError):
    """The Sobolev lift 1/q = 1/p - m*gamma/n would leave (0, inf)."""


def _radius(coords):
    return np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in coords))


def _bump_exponent(coords):
    # range [1/2, 6/5] near the origin, tends to 1 at infinity
    r = _radius(coords)
    inner = np.minimum(1.2, np.maximum(0.5, 1.5 - r ** 2))
    return np.maximum(1.0 - np.exp(3.0 - r), inner)


RAMP_SLOPE = 7.0 / (10.0 * (math.sqrt(0.3) - 1.0))


def _ramp_exponent(coords):
    r = _radius(coords)
    inner = np.minimum(1.2, np.maximum(0.5, RAMP_SLOPE * r + 0.5 - RAMP_SLOPE))
    return np.maximum(1.0 - np.exp(3.0 - r), inner)


PRESETS: dict[str, tuple[Callable, str]] = {
    "example-1": (_bump_exponent, "max{1-e^(3-|x|), min(6/5, max(1/2, 3/2-|x|^2))}"),
    "example-2": (_ramp_exponent, "max{1-e^(3-|x|), min(6/5, max(1/2, k|x|+1/2-k))}"),
    "example-1-capped": (lambda c: np.minimum(1.0, _bump_exponent(c)), "min(1, example-1)"),
    "example-2-capped": (lambda c: np.minimum(1.0, _ramp_exponent(c)), "min(1, example-2)"),
}

def _expression_sampler(expr: str) -> Callable:
    try:
        fn = compile_formula(expr, ("x", "y", "r"))
    except ValueError as exc:
        raise InvalidExponentError(str(exc)) from None

    def sampler(coords):
        x = np.asarray(coords[0], dtype=float)
        y = np.asarray(coords[1], dtype=float) if len(coords) > 1 else 0.0
        out = fn(x=x, y=y, r=_radius(coords))
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)).copy()

    return sampler


@dataclass(frozen=True, eq=False)
class ExponentFunction:
    """A variable exponent with bounds cached over a working box.

    ``sampler`` maps a tuple of coordinate arrays (one per axis) to exponent
    values of the same shape.  ``p_minus``/``p_plus`` are taken over a dense
    sample of ``box`` (its nodes, refined fourfold), and ``p_infinity`` is the
    median over far-field probes; ``p_infinity_spread`` is their range.
    """

    sampler: Callable
    box: Box
    name: str = "custom"
    p_minus: float = field(init=False)
    p_plus: float = field(init=False)
    p_infinity: float | None = field(init=False)
    p_infinity_spread: float = field(init=False)

    def __post_init__(self):
        dense = self.box.refine(4) if self.box.dim == 1 else self.box.refine(2)
        vals = self(dense.mesh())
        if not np.all(np.isfinite(vals)):
            raise InvalidExponentError("exponent is not finite on the box")
        lo, hi = float(vals.min()), float(vals.max())
        if lo <= 0:
            raise InvalidExponentError(f"exponent must be positive (found p_minus = {lo})")
        object.__setattr__(self, "p_minus", lo)
        object.__setattr__(self, "p_plus", hi)
        far = self(_far_probes(self.box.dim))
        if np.all(np.isfinite(far)) and far.min() > 0:
            object.__setattr__(self, "p_infinity", float(np.median(far)))
            object.__setattr__(self, "p_infinity_spread", float(np.ptp(far)))
        else:
            object.__setattr__(self, "p_infinity", None)
            object.__setattr__(self, "p_infinity_spread", math.inf)

    def __call__(self, coords) -> np.ndarray:
        """Exponent values at a tuple of coordinate arrays (one per axis)."""
        if isinstance(coords, np.ndarray):
            coords = (coords,)
        return np.asarray(self.sampler(tuple(coords)), dtype=float)

    def at_points(self, pts: np.ndarray) -> np.ndarray:
        """Exponent values at points given with a trailing coordinate axis."""
        pts = np.asarray(pts, dtype=float)
        return self(tuple(pts[..., i] for i in range(pts.shape[-1])))

    @property
    def underline_p(self) -> float:
        return min(1.0, self.p_minus)

    @property
    def is_constant(self) -> bool:
        return self.p_plus - self.p_minus <= 1e-15 * self.p_plus

    def on_box(self, box: Box) -> np.ndarray:
        """Exponent values at the nodes of ``box``."""
        return self(box.mesh())

    def with_box(self, box: Box) -> "ExponentFunction":
        return ExponentFunction(self.sampler, box, self.name)

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, value: float, box: Box) -> "ExponentFunction":
        v = float(value)
        return cls(lambda c: np.full(np.shape(c[0]), v), box, f"const:{v:g}")

    @classmethod
    def from_preset(cls, spec: str, box: Box) -> "ExponentFunction":
        """``const:<v>``, a named preset (see ``PRESETS``) or an expression in x, y, r."""
        spec = spec.strip()
        if spec.startswith("const:"):
            return cls.constant(float(spec.split(":", 1)[1]), box)
        if spec in PRESETS:
            return cls(PRESETS[spec][0], box, spec)
        if spec.startswith("expr:"):
            spec = spec[5:]
        return cls(_expression_sampler(spec), box, spec)


def _far_probes(dim: int):
    radii = np.geomspace(1e4, 1e8, 9)
    if dim == 1:
        return (np.concatenate([radii, -radii]),)
    ang = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    rr, aa = np.meshgrid(radii, ang, indexing="ij")
    return (rr * np.cos(aa), rr * np.sin(aa))


def lower_index_s0(p: ExponentFunction, n: int, m: float) -> int:
    """``s0 = floor((n/m)(1/p_minus - 1))``, clipped below at 0."""
    return max(0, int(math.floor((n / m) * (1.0 / p.p_minus - 1.0) + 1e-12)))


# ---------------------------------------------------------------------------
# log-Hoelder screening


@dataclass
class LogHolderReport:
    c_local: float
    c_infinity: float
    p_infinity_estimate: float
    passed: bool
    worst_pair: tuple
    local_profile: list = field(default_factory=list)
    infinity_profile: list = field(default_factory=list)
    p_infinity_spread: float = 0.0

    def to_dict(self) -> dict:
        return {
            "c_local": self.c_local,
            "c_infinity": self.c_infinity,
            "p_infinity_estimate": self.p_infinity_estimate,
            "p_infinity_spread": self.p_infinity_spread,
            "passed": self.passed,
            "worst_pair": [list(map(float, np.ravel(w))) for w in self.worst_pair],
            "local_profile": self.local_profile,
            "infinity_profile": self.infinity_profile,
        }


def _random_directions(rng, count, dim):
    if dim == 1:
        return rng.choice([-1.0, 1.0], size=(count, 1))
    ang = rng.uniform(0, 2 * np.pi, count)
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def _no_blow_up(profile, rel, atol):
    """Maximum over the second half of a profile is not above the first half's."""
    prof = np.asarray(profile, dtype=float)
    half = len(prof) // 2
    return bool(prof[half:].max() <= (1 + rel) * prof[:half].max() + atol)


def verify_log_holder(p: ExponentFunction, box: Box | None = None, budget: int = 4000,
                      seed: int = 0, rel_growth: float = 0.05, atol: float = 1e-3,
                      far_radius: float = 1e8) -> LogHolderReport:
    """Sampled screen of the local and at-infinity log-Hoelder conditions.

    Pairs are sampled in dyadic bands: for the local condition, separations
    ``delta`` in ``[2^-j-1, 2^-j]`` (down to 1e-9); for the condition at infinity,
    points with ``|x|`` in dyadic shells up to ``far_radius``.  Each band gives
    the maximum of the defining quotient.  A condition passes when the maxima
    do not grow across the finer (resp. farther) half of the bands, the
    discrete signature of a bounded supremum.  The constants reported are the
    raw maxima over all samples.
    """
    if p.p_minus <= 0:
        raise InvalidExponentError("exponent must be positive")
    if budget < 1000:
        raise ValueError("budget must be at least 1000 sampled pairs")
    box = box or p.box
    dim = box.dim
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(box.lower), np.asarray(box.upper)

    # local condition
    bands = int(math.ceil(math.log2(box.length) + 30))
    per = max(16, budget // (2 * bands))
    local_profile = []
    c_local, worst_local = 0.0, (np.zeros(dim), np.zeros(dim))
    for j in range(bands):
        dhi = box.length * 2.0 ** (-j)
        delta = dhi * 2.0 ** (-rng.uniform(0, 1, per))
        x = rng.uniform(lo, hi, size=(per, dim))
        y = x + delta[:, None] * _random_directions(rng, per, dim)
        q = np.abs(p.at_points(x) - p.at_points(y)) * np.log(np.e + 1.0 / delta)
        k = int(np.argmax(q))
        local_profile.append(float(q[k]))
        if q[k] > c_local:
            c_local, worst_local = float(q[k]), (x[k], y[k])

    # condition at infinity
    far = _far_probes(dim)
    p_far = p(far)
    p_inf = float(np.median(p_far))
    shells = int(math.ceil(math.log2(far_radius)))
    per = max(16, budget // (2 * shells))
    inf_profile = []
    c_inf, worst_inf = 0.0, (np.zeros(dim), np.zeros(dim))
    for j in range(shells):
        rad = 2.0 ** (j + rng.uniform(0, 1, per))
        x = rad[:, None] * _random_directions(rng, per, dim)
        q = np.abs(p.at_points(x) - p_inf) * np.log(np.e + rad)
        k = int(np.argmax(q))
        inf_profile.append(float(q[k]))
        if q[k] > c_inf:
            c_inf, worst_inf = float(q[k]), (x[k], np.zeros(dim))

    local_ok = _no_blow_up(local_profile, rel_growth, atol)
    inf_ok = _no_blow_up(inf_profile, rel_growth, atol)
    passed = local_ok and inf_ok and math.isfinite(c_local) and math.isfinite(c_inf)
    if not local_ok:
        worst = worst_local
    elif not inf_ok:
        worst = worst_inf
    else:
        worst = worst_local if c_local >= c_inf else worst_inf
    return LogHolderReport(c_local, c_inf, p_inf, passed, worst, local_profile, inf_profile,
                           float(np.ptp(p_far)))


def sobolev_conjugate(p: ExponentFunction, gamma: float, m: float, n: int) -> ExponentFunction:
    """The exponent ``q`` with ``1/q(x) = 1/p(x) - m*gamma/n``."""
    if not 0 < gamma < n / m:
        raise ValueError(f"gamma must lie in (0, n/m) = (0, {n / m:g})")
    shift = m * gamma / n
    if shift >= 1.0 / p.p_plus:
        raise ExponentOverflowError(
            f"m*gamma/n = {shift:g} is not below 1/p_plus = {1.0 / p.p_plus:g}")
    base = p.sampler

    def sampler(coords):
        return 1.0 / (1.0 / np.asarray(base(coords), dtype=float) - shift)

    return ExponentFunction(sampler, p.box, f"sobolev({p.name}, gamma={gamma:g})")
