"""Heat-type semigroups e^{-tL} and the operators P_{s,t}, Q_{s,t}.

The concrete operator is ``L = -Laplacian`` (Gaussian kernels, homogeneity
``m = 2``).  For it every operator below is a radial Fourier multiplier in
``|xi|^2``; the multipliers are applied to the zero-padded grid function, which
is the same as convolving with the closed-form kernels returned by
``p_kernel``/``q_kernel`` but free of kernel sampling error.

Custom specs carry a user decay profile ``g`` and use the kernel
``p_t(x) = t^(-n/m) g(|x| / t^(1/m)) / int g``; they are meant for the kernel
bound checks, and anything downstream of them is marked experimental.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import hermite
from scipy import integrate as sint
from scipy.special import comb

from .exponent import ExponentFunction, lower_index_s0
from .expr import compile_formula
from .grid import (BALL_VOLUME, Box, GridFunction, HalfSpaceFunction, ResolutionError,
                   ScaleLadder, Spectral, apply_kernel, gaussian_reach, padded_shape)


@dataclass(frozen=True)
class Regularity:
    """Hoelder-type kernel regularity ``(tau, delta, gamma)``; informational only."""

    tau: float | None = None
    delta: float | None = None
    gamma: float | None = None


@dataclass(frozen=True)
class SemigroupSpec:
    kind: str = "gaussian"
    m: float = 2.0
    g_expr: str | None = None
    epsilon: float = 1.0
    regularity: Regularity = field(default_factory=Regularity)
    truncation_tol: float = 1e-10
    max_pad_factor: float = 64.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "custom"):
            raise ValueError("kind must be 'gaussian' or 'custom'")
        if self.kind == "gaussian" and self.m != 2:
            raise ValueError("the Gaussian semigroup has homogeneity m = 2")
        if self.kind == "custom" and not self.g_expr:
            raise ValueError("a custom spec needs a decay profile g_expr")
        if not self.m > 0 or not self.epsilon > 0:
            raise ValueError("m and epsilon must be positive")

    @property
    def experimental(self) -> bool:
        return self.kind == "custom"

    def g(self, r: np.ndarray, dim: int) -> np.ndarray:
        """Decay profile: ``(4 pi)^(-n/2) exp(-r^2/4)`` for the Gaussian, else the user formula."""
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return (4 * np.pi) ** (-dim / 2) * np.exp(-r ** 2 / 4)
        fn = compile_formula(self.g_expr, ("r", "n"))
        return np.broadcast_to(np.asarray(fn(r=r, n=dim), dtype=float), r.shape).copy()

    def g_mass(self, dim: int) -> float:
        """``int_{R^n} g(|x|) dx``."""
        if self.kind == "gaussian":
            return 1.0
        surface = dim * BALL_VOLUME[dim]
        val, _ = sint.quad(lambda r: float(self.g(np.array(r), dim)) * r ** (dim - 1),
                           0, np.inf, limit=400)
        return surface * val

    def kernel_profile(self, dim: int) -> Callable:
        """Radial heat kernel ``k(r, t)`` at time ``t``."""
        if self.kind == "gaussian":
            return lambda r, t: (4 * np.pi * t) ** (-dim / 2) * np.exp(-np.asarray(r) ** 2 / (4 * t))
        mass = self.g_mass(dim)
        m = self.m
        return lambda r, t: t ** (-dim / m) * self.g(np.asarray(r) / t ** (1 / m), dim) / mass

    @classmethod
    def from_dict(cls, d: dict) -> "SemigroupSpec":
        d = dict(d or {})
        reg = Regularity(**{k: d.pop(k) for k in ("tau", "delta", "gamma") if k in d})
        if "g" in d:
            d["g_expr"] = d.pop("g")
        return cls(regularity=reg, **d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "g": self.g_expr, "epsilon": self.epsilon,
                "tau": self.regularity.tau, "delta": self.regularity.delta,
                "gamma": self.regularity.gamma}


GAUSSIAN = SemigroupSpec()


@dataclass(frozen=True)
class OperatorParams:
    s: int = 0
    s0: int = 0

    def __post_init__(self):
        if self.s0 < 0 or self.s < self.s0:
            raise ValueError("need s >= s0 >= 0")

    @classmethod
    def for_exponent(cls, p: ExponentFunction, n: int, m: float, s: int | None = None):
        s0 = lower_index_s0(p, n, m)
        return cls(s0 if s is None else s, s0)


# ---------------------------------------------------------------------------
# multipliers of the Gaussian realization (functions of u = t |xi|^2)


def heat_multiplier(u):
    return np.exp(-u)


def q_multiplier(u, s: int = 0):
    return u ** (s + 1) * np.exp(-u)


def p_multiplier(u, s: int = 0):
    """``sum_{k=1}^{s+1} (-1)^(k+1) C(s+1,k) e^{-k u}`` (equals ``1 - (1-e^{-u})^(s+1)``)."""
    return sum((-1) ** (k + 1) * comb(s + 1, k, exact=True) * np.exp(-k * u)
               for k in range(1, s + 2))


def projection_multiplier(u, s: int, s0: int):
    """Multiplier of ``Q_{s,t}(I - P_{s0,t})``."""
    return u ** (s + 1) * np.exp(-u) * (-np.expm1(-u)) ** (s0 + 1)


def _check_resolved(t: float, box: Box):
    if t < 2 * box.h ** 2 * (1 - 1e-9):
        raise ResolutionError(f"time {t:.3g} is below 2h^2 = {2 * box.h ** 2:.3g}")


def _spectral(f: GridFunction, time: float, spec: SemigroupSpec) -> Spectral:
    shape = padded_shape(f.box, gaussian_reach(time), spec.max_pad_factor)
    return Spectral(f.values, f.box, shape)


# ---------------------------------------------------------------------------
# operators


def heat_apply(f: GridFunction, t: float, spec: SemigroupSpec = GAUSSIAN) -> GridFunction:
    """``e^{-tL} f`` on the zero extension of ``f``."""
    if t <= 0:
        raise ValueError("t must be positive")
    if spec.kind == "gaussian":
        return apply_kernel(f, "gaussian", t, max_pad_factor=spec.max_pad_factor)
    return apply_kernel(f, spec.kernel_profile(f.box.dim), t, tail_tol=spec.truncation_tol)


FD_STEP = 1e-2


def _t_derivative(f, t, k, spec):
    """``t^k d^k/dt^k e^{-tL} f`` by the centred k-th difference with step ``FD_STEP*t``."""
    eta = FD_STEP * t
    acc = None
    for j in range(k + 1):
        tj = t + (j - k / 2) * eta
        term = heat_apply(f, tj, spec).values * ((-1) ** (k - j) * comb(k, j, exact=True))
        acc = term if acc is None else acc + term
    return acc * (t / eta) ** k


def apply_Qst(f: GridFunction, t: float, s: int = 0,
              spec: SemigroupSpec = GAUSSIAN) -> GridFunction:
    """``Q_{s,t} f = (tL)^(s+1) e^{-tL} f``.

    Custom specs use ``(tL)^k e^{-tL} = (-1)^k t^k d^k/dt^k e^{-tL}`` with the
    centred finite-difference stencil ``sum_j (-1)^(k-j) C(k,j) e^{-(t+(j-k/2)eta)L}``,
    ``eta = 0.01 t``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    _check_resolved(t, f.box)
    if spec.kind == "gaussian":
        sp = _spectral(f, t, spec)
        return GridFunction(f.box, sp.apply(q_multiplier(t * sp.xi2, s)))
    k = s + 1
    return GridFunction(f.box, (-1) ** k * _t_derivative(f, t, k, spec))


def apply_Pst(f: GridFunction, t: float, s: int = 0,
              spec: SemigroupSpec = GAUSSIAN) -> GridFunction:
    """``P_{s,t} f = sum_{k=1}^{s+1} (-1)^(k+1) C(s+1,k) e^{-ktL} f``."""
    if t <= 0:
        raise ValueError("t must be positive")
    if spec.kind == "gaussian":
        sp = _spectral(f, (s + 1) * t, spec)
        return GridFunction(f.box, sp.apply(p_multiplier(t * sp.xi2, s)))
    acc = np.zeros(f.box.shape, dtype=f.values.dtype)
    for k in range(1, s + 2):
        acc = acc + (-1) ** (k + 1) * comb(s + 1, k, exact=True) * heat_apply(f, k * t, spec).values
    return GridFunction(f.box, acc)


def apply_projection_level(f: GridFunction, time: float, params: OperatorParams,
                           spec: SemigroupSpec = GAUSSIAN) -> GridFunction:
    """``Q_{s,time}(I - P_{s0,time}) f``."""
    _check_resolved(time, f.box)
    if spec.kind == "gaussian":
        sp = _spectral(f, (params.s0 + 2) * time, spec)
        return GridFunction(f.box, sp.apply(projection_multiplier(time * sp.xi2, params.s,
                                                                  params.s0)))
    g = f - apply_Pst(f, time, params.s0, spec)
    return apply_Qst(g, time, params.s, spec)


def q_ladder(f: GridFunction, ladder: ScaleLadder, spec: SemigroupSpec = GAUSSIAN,
             s: int = 0) -> HalfSpaceFunction:
    """``F(y, t_k) = Q_{s, t_k^m} f(y)`` on every level of the ladder."""
    times = ladder.t ** spec.m
    _check_resolved(float(times[0]), f.box)
    if spec.kind != "gaussian":
        vals = np.stack([apply_Qst(f, float(tau), s, spec).values for tau in times], axis=-1)
        return HalfSpaceFunction(f.box, ladder, vals)
    sp = _spectral(f, float(times[-1]), spec)
    vals = np.stack([sp.apply(q_multiplier(tau * sp.xi2, s)) for tau in times], axis=-1)
    return HalfSpaceFunction(f.box, ladder, vals)


# ---------------------------------------------------------------------------
# closed-form Gaussian kernels


def _hermite_even(z, k):
    c = np.zeros(2 * k + 1)
    c[2 * k] = 1.0
    return hermite.hermval(z, c)


def q_kernel(coords, t: float, s: int = 0) -> np.ndarray:
    """Kernel of ``(tL)^(s+1) e^{-tL}`` for ``L = -Laplacian`` at offsets ``coords``.

    With ``z = x / sqrt(4t)`` one has ``(-t d^2/dx^2)^j G = (-1)^j 4^-j H_2j(z) G``
    (physicists' Hermite polynomials), and in 2D the binomial expansion of
    ``(-t d1^2 - t d2^2)^k`` gives a sum of products.
    """
    if isinstance(coords, np.ndarray):
        coords = (coords,)
    k = s + 1
    dim = len(coords)
    z = [np.asarray(c, dtype=float) / math.sqrt(4 * t) for c in coords]
    gauss = (4 * np.pi * t) ** (-dim / 2) * np.exp(-sum(zi ** 2 for zi in z))
    if dim == 1:
        poly = _hermite_even(z[0], k)
    else:
        poly = sum(comb(k, j, exact=True) * _hermite_even(z[0], j) * _hermite_even(z[1], k - j)
                   for j in range(k + 1))
    return (-1) ** k * 4.0 ** (-k) * poly * gauss


def p_kernel(coords, t: float, s: int = 0) -> np.ndarray:
    """Kernel of ``P_{s,t}``: the binomial combination of heat kernels at times ``k t``."""
    if isinstance(coords, np.ndarray):
        coords = (coords,)
    dim = len(coords)
    r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
    return sum((-1) ** (k + 1) * comb(s + 1, k, exact=True)
               * (4 * np.pi * k * t) ** (-dim / 2) * np.exp(-r2 / (4 * k * t))
               for k in range(1, s + 2))


# ---------------------------------------------------------------------------
# kernel bound certification


@dataclass
class KernelDecayReport:
    passed: bool
    constant: float
    decay_slope: float
    epsilon: float
    witness: dict | None
    checks: dict

    def to_dict(self) -> dict:
        return {"passed": self.passed, "constant": self.constant, "decay_slope": self.decay_slope,
                "epsilon": self.epsilon, "witness": self.witness, "checks": self.checks}


class KernelBoundError(ValueError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def default_probes(decades: int = 8):
    """Scales ``t`` and radii ``rho = |x-y|/t`` used by ``verify_kernel_decay``."""
    return np.geomspace(1e-2, 1e2, 9), np.concatenate([[0.0], np.geomspace(1e-3, 10 ** decades,
                                                                            40 * decades)])


def verify_kernel_decay(spec: SemigroupSpec, dim: int = 1, s: int = 0, probes=None,
                        raise_on_failure: bool = False) -> KernelDecayReport:
    """Certify ``|p_{s,t^m}| + |q_{s,t^m}| <= C t^-n gbar(|x-y|/t)`` on a probe grid.

    ``gbar`` is the comparison profile: for the Gaussian spec the widened
    Gaussian ``exp(-rho^2 / (8(s+1)))`` (the binomial sum reaches time ``(s+1)t^2``
    and the polynomial factor of ``q`` needs some room); for custom specs the
    user profile ``g`` itself.  Also reported is the log-log slope of
    ``rho^(n+eps) g(rho)`` over the two farthest probe decades; it must be
    negative for the profile to decay like ``rho^-(n+eps)``.
    """
    ts, rhos = probes if probes is not None else default_probes()
    rhos = np.asarray(rhos, dtype=float)
    n = dim
    m = spec.m
    witness = None
    checks = {}

    # decay of rho^(n+eps) g(rho)
    far = rhos[rhos > 0]
    top = far[far >= far.max() / 100.0]
    if spec.kind == "gaussian":
        slope = -math.inf
    else:
        vals = top ** (n + spec.epsilon) * spec.g(top, n)
        if np.any(vals <= 0):
            slope = -math.inf
        else:
            slope = float(np.polyfit(np.log(top), np.log(vals), 1)[0])
    decay_ok = slope < 0
    checks["decay"] = decay_ok
    if not decay_ok:
        witness = {"t": 1.0, "x": [float(top[-1])] + [0.0] * (n - 1), "y": [0.0] * n,
                   "reason": "rho^(n+epsilon) g(rho) grows"}

    # pointwise kernel bound on the probe grid (radial profiles, along the first axis)
    if spec.kind == "gaussian":
        def gbar(rho):
            return np.exp(-rho ** 2 / (8 * (s + 1)))
    else:
        def gbar(rho):
            return spec.g(rho, n)
    cmax = 0.0
    near = rhos[rhos <= 50.0] if spec.kind == "gaussian" else rhos
    for t in ts:
        time = t ** m
        x = near * t
        coords = (x,) + tuple(np.zeros_like(x) for _ in range(n - 1))
        if spec.kind == "gaussian":
            k = np.abs(p_kernel(coords, time, s)) + np.abs(q_kernel(coords, time, s))
        else:
            prof = spec.kernel_profile(n)
            pk = prof(x, time)
            eta = FD_STEP * time
            # -t d/dt p_t by a centred difference (k = 1 only)
            qk = -(prof(x, time + eta / 2) - prof(x, time - eta / 2)) * (time / eta)
            k = np.abs(pk) + np.abs(qk)
        bound = t ** (-n) * gbar(near)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bound > 0, k / bound, np.where(k > 0, np.inf, 0.0))
        j = int(np.argmax(ratio))
        if ratio[j] > cmax:
            cmax = float(ratio[j])
            if not math.isfinite(cmax) and witness is None:
                witness = {"t": float(t), "x": [float(x[j])] + [0.0] * (n - 1), "y": [0.0] * n,
                           "reason": "kernel exceeds every multiple of the bound"}
    checks["pointwise_bound"] = math.isfinite(cmax)
    passed = bool(decay_ok and math.isfinite(cmax))
    report = KernelDecayReport(passed, cmax, slope, spec.epsilon, witness, checks)
    if raise_on_failure and not passed:
        raise KernelBoundError("kernel decay bound violated", report)
    return report
