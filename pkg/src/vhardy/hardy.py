"""Hardy space associated with the semigroup: area function, quasi-norm, molecules."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import fft as sfft
from scipy.integrate import trapezoid
from scipy.special import comb, gamma as gamma_fn

from .exponent import ExponentFunction
from .grid import (Box, Cube, GridFunction, HalfSpaceFunction, ResolutionError, ScaleLadder,
                   const_lp_norm, integrate)
from .lebesgue import a_functional, cube_norm, luxemburg_norm
from .maximal import HypothesisViolationError
from .semigroup import (GAUSSIAN, OperatorParams, SemigroupSpec, apply_projection_level,
                        projection_multiplier, q_ladder)
from .tent import TentAtom, TentDecomposition, tent_atomic_decompose, tent_T


def default_ladder(box: Box, levels: int = 64, t_max: float | None = None) -> ScaleLadder:
    return ScaleLadder.for_box(box, levels, t_max)


def lusin_area(f: GridFunction, spec: SemigroupSpec = GAUSSIAN,
               ladder: ScaleLadder | None = None, extend: bool = False) -> GridFunction:
    """``S_L f(x) = (int_{cone(x)} |Q_{t^m} f(y)|^2 dy dt / t^(n+1))^(1/2)``."""
    ladder = ladder or default_ladder(f.box)
    if int(np.sum(ladder.t >= f.box.h / 2)) < 8:
        raise ResolutionError("fewer than 8 ladder levels resolve a grid cell")
    return tent_T(q_ladder(f, ladder, spec), extend=extend)


def hardy_norm(f: GridFunction, p: ExponentFunction | float, spec: SemigroupSpec = GAUSSIAN,
               ladder: ScaleLadder | None = None, tol: float = 1e-8) -> float:
    """``||S_L f||`` in ``L^p(.)`` (or ``L^q`` for a number)."""
    if f.is_zero():
        return 0.0
    s = lusin_area(f, spec, ladder)
    if isinstance(p, ExponentFunction):
        return luxemburg_norm(s, p, tol).value
    return const_lp_norm(s, float(p))


# ---------------------------------------------------------------------------
# reproducing formula


def cms_integral(m: float, s: int, s0: int) -> float:
    """Closed form of ``int_0^inf t^(m(s+2)) e^(-2t^m) (1-e^(-t^m))^(s0+1) dt/t``.

    Substituting ``v = t^m`` and expanding the binomial gives
    ``(1/m) sum_j C(s0+1, j) (-1)^j Gamma(s+2) / (2+j)^(s+2)``.
    """
    return sum(comb(s0 + 1, j, exact=True) * (-1) ** j * gamma_fn(s + 2) / (2 + j) ** (s + 2)
               for j in range(s0 + 2)) / m


def compute_Cms(m: float, s: int, s0: int, points_per_unit: int = 64) -> float:
    """Reciprocal of the defining integral, by the trapezoid rule in ``log t``.

    The integrand decays like ``t^(m(s+3))`` at 0 and doubly exponentially at
    infinity, so the rule on ``[e^-60/m, e^5/m]`` is accurate to rounding.
    """
    if not m > 0 or s < s0 or s0 < 0:
        raise ValueError("need m > 0 and s >= s0 >= 0")
    x = np.linspace(-60.0 / m, 5.0 / m, int(65.0 / m * points_per_unit) + 1)
    v = np.exp(m * x)
    y = v ** (s + 2) * np.exp(-2 * v) * (-np.expm1(-v)) ** (s0 + 1)
    return 1.0 / float(trapezoid(y, x))


def pi_L(F: HalfSpaceFunction, params: OperatorParams = OperatorParams(),
         spec: SemigroupSpec = GAUSSIAN, levels: Sequence[int] | None = None) -> GridFunction:
    """``C_{(m,s)} int_0^inf Q_{s,t^m}(I - P_{s0,t^m}) F(., t) dt/t`` on the ladder."""
    box, ladder = F.box, F.ladder
    cms = compute_Cms(spec.m, params.s, params.s0)
    acc = np.zeros(box.shape, dtype=complex if np.iscomplexobj(F.values) else float)
    idx = range(ladder.levels) if levels is None else levels
    for k in idx:
        lev = F.values[..., k]
        if not np.any(lev):
            continue
        tau = float(ladder.t[k]) ** spec.m
        out = apply_projection_level(GridFunction(box, lev), tau, params, spec)
        acc += out.values
    return GridFunction(box, acc * (cms * ladder.dlog))


def pi_L_block(atom: TentAtom, params: OperatorParams, spec: SemigroupSpec = GAUSSIAN,
               cms: float | None = None) -> GridFunction:
    """``pi_L`` of a block-stored tent atom (only its populated levels are visited)."""
    box, ladder = atom.box, atom.ladder
    cms = cms or compute_Cms(spec.m, params.s, params.s0)
    full = np.zeros(box.shape, dtype=atom.block.dtype)
    acc = np.zeros(box.shape, dtype=atom.block.dtype)
    sl = tuple(slice(s, s + w) for s, w in zip(atom.start, atom.block.shape[:-1]))
    for k in range(atom.block.shape[-1]):
        lev = atom.block[..., k]
        if not np.any(lev):
            continue
        full[...] = 0
        full[sl] = lev
        tau = float(ladder.t[k]) ** spec.m
        acc += apply_projection_level(GridFunction(box, full), tau, params, spec).values
    return GridFunction(box, acc * (cms * ladder.dlog))


def reproducing_multiplier(xi2: np.ndarray, ladder: ScaleLadder,
                           params: OperatorParams = OperatorParams(), m: float = 2.0) -> np.ndarray:
    """Fourier multiplier of ``pi_L(Q_{t^m} .)`` for the Gaussian realization (ideal value 1)."""
    cms = compute_Cms(m, params.s, params.s0)
    acc = np.zeros_like(np.asarray(xi2, dtype=float))
    for t in ladder.t:
        u = t ** m * xi2
        acc += projection_multiplier(u, params.s, params.s0) * u * np.exp(-u)
    return acc * cms * ladder.dlog


def band_energy_fraction(f: GridFunction, cutoff: float = 0.5) -> float:
    """Share of spectral energy above ``cutoff`` times the Nyquist frequency."""
    hat = np.abs(sfft.fftn(f.values)) ** 2
    total = float(hat.sum())
    if total == 0:
        return 0.0
    freqs = np.meshgrid(*[np.abs(sfft.fftfreq(n)) * 2 for n in f.box.shape], indexing="ij")
    high = np.max(np.stack(freqs), axis=0) > cutoff
    return float(hat[high].sum()) / total


# ---------------------------------------------------------------------------
# molecules


def annulus_masks(cube: Cube, box: Box, kmax: int) -> list:
    """Node masks of ``D_0 = 2Q`` and ``D_k = 2^(k+1)Q minus 2^k Q`` for ``k = 1..kmax``."""
    pts = box.points()
    d = cube.sup_distance(pts)
    half = cube.side / 2
    out = [d <= 2 * half]
    for k in range(1, kmax + 1):
        out.append((d > 2 ** k * half) & (d <= 2 ** (k + 1) * half))
    return out


def molecule_decay(alpha: GridFunction, cube: Cube, p: ExponentFunction, delta: float,
                   ks: Sequence[int] = (1, 2, 3)) -> dict:
    """``C_k = sup_{D_k} |alpha| ||chi_Q|| 2^(k(n+delta))`` on each annulus inside the box."""
    n = alpha.box.dim
    norm = cube_norm(cube, p, alpha.box.h)
    masks = annulus_masks(cube, alpha.box, max(ks))
    consts = {}
    for k in ks:
        m = masks[k]
        if not np.any(m):
            continue
        consts[k] = float(np.max(np.abs(alpha.values[m]))) * norm * 2.0 ** (k * (n + delta))
    return {"constants": consts, "max": max(consts.values()) if consts else 0.0}


@dataclass(eq=False)
class Molecule:
    values: GridFunction
    source_atom: TentAtom
    cube: Cube
    params: OperatorParams


@dataclass
class MolecularDecomposition:
    lambdas: np.ndarray
    molecules: list
    cubes: list
    b_value: float
    residual: float
    tent: TentDecomposition
    band_limited: bool = True
    experimental: bool = False

    def reconstruct(self) -> GridFunction:
        if not self.molecules:
            return self.tent.box.zeros()
        acc = np.zeros(self.tent.box.shape, dtype=self.molecules[0].values.values.dtype)
        for lam, mol in zip(self.lambdas, self.molecules):
            acc = acc + lam * mol.values.values
        return GridFunction(self.tent.box, acc)

    def summary(self) -> dict:
        return {"terms": len(self.molecules), "b_value": self.b_value,
                "residual": self.residual, "band_limited": self.band_limited,
                "experimental": self.experimental}


def molecular_decompose(f: GridFunction, p: ExponentFunction, spec: SemigroupSpec = GAUSSIAN,
                        params: OperatorParams = OperatorParams(),
                        ladder: ScaleLadder | None = None, band_tol: float = 1e-6,
                        strict: bool = False) -> MolecularDecomposition:
    """``f = pi_L(Q_{t^m} f)``: decompose ``Q_{t^m} f`` into tent atoms and map each through ``pi_L``.

    The residual ``||f - sum lam_j alpha_j||_2 / ||f||_2`` is recorded.  Inputs
    carrying more than ``band_tol`` of their energy in the upper half of the grid
    band are flagged (or rejected when ``strict``).
    """
    ladder = ladder or default_ladder(f.box)
    band_ok = band_energy_fraction(f) <= band_tol
    if strict and not band_ok:
        raise ValueError("input is not band-limited relative to the grid")
    F = q_ladder(f, ladder, spec)
    dec = tent_atomic_decompose(F, p)
    cms = compute_Cms(spec.m, params.s, params.s0)
    mols = [Molecule(pi_L_block(a, params, spec, cms), a, a.cube, params) for a in dec.atoms]
    out = MolecularDecomposition(dec.lambdas, mols, dec.cubes, dec.a_value, 0.0, dec,
                                 band_ok, spec.experimental)
    fn = const_lp_norm(f, 2)
    out.residual = const_lp_norm(f - out.reconstruct(), 2) / fn if fn > 0 else 0.0
    return out


def synthesis_ratio(lambdas, molecules: Sequence[GridFunction], cubes: Sequence[Cube],
                    p: ExponentFunction, spec: SemigroupSpec = GAUSSIAN,
                    ladder: ScaleLadder | None = None) -> dict:
    """``hardy_norm(sum lam_k alpha_k) / B`` with ``B`` the coefficient functional."""
    acc = sum(lam * m.values for lam, m in zip(lambdas, molecules))
    total = GridFunction(molecules[0].box, acc)
    hn = hardy_norm(total, p, spec, ladder)
    b = a_functional(lambdas, cubes, p)
    return {"hardy_norm": hn, "b_value": b, "ratio": hn / b if b > 0 else 0.0}


def split_molecule(alpha: GridFunction, cube: Cube, kmax: int | None = None) -> dict:
    """Split a molecule into mean-free annular pieces plus telescoping corrections.

    With ``D_k`` the annuli of ``cube``, ``m_k = int_{D_k} alpha``,
    ``chi~_k = chi_{D_k}/|D_k|`` and ``N_k = sum_{j >= k} m_j``:
    ``h_k = alpha chi_{D_k} - m_k chi~_k`` and the corrections
    ``N_{k+1}(chi~_{k+1} - chi~_k)``.  Together with ``N_0 chi~_0`` they sum to
    ``alpha`` restricted to the covered annuli.  Reported: the largest moment
    of any piece relative to ``||alpha||_1``, the piece L^2 sizes and the
    reconstruction error.
    """
    box = alpha.box
    if kmax is None:
        kmax = 0
        while 2 ** (kmax + 1) * cube.side / 2 < box.length:
            kmax += 1
    masks = [m for m in annulus_masks(cube, box, kmax)]
    dv = box.cell_volume
    vals = alpha.values
    chis, ms = [], []
    for m in masks:
        vol = float(m.sum()) * dv
        chis.append(m / vol if vol > 0 else np.zeros(box.shape))
        ms.append(float(np.sum(vals[m])) * dv if vol > 0 else 0.0)
    tails = np.cumsum(ms[::-1])[::-1]
    pieces_h = [np.where(m, vals, 0) - mk * c for m, mk, c in zip(masks, ms, chis)]
    pieces_n = [tails[k + 1] * (chis[k + 1] - chis[k]) for k in range(len(masks) - 1)]
    recon = sum(pieces_h) + sum(pieces_n) + tails[0] * chis[0]
    covered = np.any(np.stack(masks), axis=0)
    l1 = float(np.sum(np.abs(vals))) * dv
    moments = [abs(float(np.sum(pc)) * dv) / l1 for pc in pieces_h + pieces_n] if l1 else [0.0]
    return {
        "pieces": len(pieces_h) + len(pieces_n),
        "max_relative_moment": max(moments),
        "h_sizes": [math.sqrt(float(np.sum(np.abs(pc) ** 2)) * dv) for pc in pieces_h],
        "n_sizes": [math.sqrt(float(np.sum(np.abs(pc) ** 2)) * dv) for pc in pieces_n],
        "total_mass": tails[0],
        "reconstruction_error": math.sqrt(float(np.sum(np.abs(recon - np.where(covered, vals, 0))
                                                        ** 2)) * dv),
    }


# ---------------------------------------------------------------------------
# classical atoms


@dataclass(eq=False)
class ClassicalAtom:
    values: GridFunction
    cube: Cube
    q: float = 2.0
    d: int = 0


def classical_atom_moment_order(p: ExponentFunction, n: int) -> int:
    """``d = max(0, floor(n(1/p_minus - 1)))``."""
    return max(0, int(math.floor(n * (1.0 / p.p_minus - 1.0) + 1e-12)))


def haar_atom(cube: Cube, box: Box, p: ExponentFunction, q: float = 2.0) -> ClassicalAtom:
    """``+-1`` on the two halves of the cube (split along the first axis), normalized so
    that ``||a||_q = |Q|^(1/q) / ||chi_Q||``."""
    c = cube.center
    left = Cube((c[0] - cube.side / 4,) + c[1:], cube.side / 2) if cube.dim == 1 else None
    ind = cube.indicator(box).values
    sign = np.where(box.mesh()[0] < c[0], 1.0, -1.0)
    if left is not None:
        lo = left.indicator(box).values
        vals = 2 * lo - ind
    else:
        vals = sign * ind
    vals = vals / cube_norm(cube, p, box.h)
    return ClassicalAtom(GridFunction(box, vals), cube, q, 0)


def is_classical_atom(a: GridFunction, R: Cube, p: ExponentFunction, q: float, d: int,
                      moment_tol: float = 1e-10) -> bool:
    """Support in ``R``, ``||a||_q <= |R|^(1/q)/||chi_R||`` and vanishing moments up to order ``d``."""
    if not q > max(1.0, p.p_plus):
        raise ValueError("q must exceed max(1, p_plus)")
    box = a.box
    cover = R.indicator(box).values
    if np.any((cover == 0) & (a.values != 0)):
        return False
    if const_lp_norm(a, q) > R.volume ** (1 / q) / cube_norm(R, p, box.h) * (1 + 1e-9):
        return False
    pts = [c - x0 for c, x0 in zip(box.mesh(), R.center)]
    l1 = float(np.sum(np.abs(a.values))) * box.cell_volume
    if l1 == 0:
        return True
    for order in range(d + 1):
        for beta in _multi_indices(box.dim, order):
            mono = np.ones(box.shape)
            for ax, b in enumerate(beta):
                mono = mono * pts[ax] ** b
            mom = abs(integrate(GridFunction(box, a.values * mono)))
            if mom > moment_tol * l1 * max(1.0, R.side) ** order:
                return False
    return True


def _multi_indices(dim, order):
    if dim == 1:
        return [(order,)]
    return [(i, order - i) for i in range(order + 1)]


def classical_atom_embedding_check(atom: ClassicalAtom, p: ExponentFunction,
                                   spec: SemigroupSpec = GAUSSIAN,
                                   ladder: ScaleLadder | None = None) -> float:
    """``hardy_norm`` of a classical atom, after checking the exponent hypotheses."""
    n = atom.values.box.dim
    if spec.kind != "gaussian":
        raise HypothesisViolationError("the embedding check needs the Gaussian semigroup")
    if not (n / (n + 1) < p.p_minus <= 1 + 1e-12):
        raise HypothesisViolationError("need n/(n+1) < p_minus <= 1")
    if not 2 / p.p_minus - 1 / p.p_plus < (n + 1) / n:
        raise HypothesisViolationError("need 2/p_minus - 1/p_plus < (n+1)/n")
    return hardy_norm(atom.values, p, spec, ladder)
