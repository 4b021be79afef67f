"""Certification suites and the batch runner behind ``vhardy run-suite``.

Every suite is a function ``(ctx) -> list[dict]`` returning check records
``{"id", "passed", ...measurements}``.  The runner writes one JSON report per
suite (sorted keys, no timestamps, so reruns with the same seed are
byte-identical), a CSV summary with timings, and optional plots.
"""
from __future__ import annotations

import csv
import json
import math
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import fft as sfft
from scipy.special import erfcinv

from . import families as fam
from .bmo import (bmo_report, carleson_norm, pairing_via_tent,
                  tent_duality_check)
from .config import SuiteConfig
from .exponent import ExponentFunction, verify_log_holder
from .fractional import (FractionalParams, coefficient_inequality, fractional_apply,
                         fractional_hardy_check, fractional_multiplier)
from .grid import (BALL_VOLUME, Box, Cube, GridFunction, HalfSpaceFunction, ScaleLadder,
                   const_lp_norm, frequency_sq, integrate)
from .hardy import (cms_integral, compute_Cms, haar_atom, hardy_norm, lusin_area,
                    molecular_decompose, molecule_decay, pi_L, reproducing_multiplier,
                    split_molecule, synthesis_ratio, classical_atom_embedding_check)
from .lebesgue import (a_functional, cube_ratio_check, dyadic_tower, luxemburg_norm, modular)
from .maximal import (dilation_domination, dilation_scaling, fs_vector_check,
                      hl_maximal)
from .semigroup import (GAUSSIAN, OperatorParams, SemigroupSpec, apply_Pst, apply_Qst,
                        heat_apply, q_ladder, verify_kernel_decay)
from .tent import (is_tent_atom, sampling_inequality, tent_atomic_decompose, tent_norm,
                   tent_T)


@dataclass
class Context:
    cfg: SuiteConfig
    box: Box
    ladder: ScaleLadder
    p: ExponentFunction
    spec: SemigroupSpec
    seed: int

    def rng(self, name: str) -> np.random.Generator:
        """Generator for one check, fixed by the config seed and the check name."""
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])

    @property
    def tol(self):
        return self.cfg.tolerances


def make_context(cfg: SuiteConfig) -> Context:
    g = cfg.grid
    box = Box(g.dim, (g.lower,) * g.dim, (g.upper,) * g.dim, g.points)
    ladder = ScaleLadder.for_box(box, g.levels, g.t_max)
    return Context(cfg, box, ladder, ExponentFunction.from_preset(cfg.exponent, box),
                   SemigroupSpec.from_dict(cfg.semigroup), cfg.seed)


def check(cid: str, passed, **data) -> dict:
    return {"id": cid, "passed": bool(passed), **data}


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def _tail_radius(time: float, tail: float = 1e-10) -> float:
    """Distance beyond which the heat kernel at ``time`` carries mass below ``tail``."""
    return math.sqrt(4 * time) * float(erfcinv(tail))


def _interior(box: Box, reach: float) -> np.ndarray:
    pts = box.mesh()
    mask = np.ones(box.shape, dtype=bool)
    for x, lo, hi in zip(pts, box.lower, box.upper):
        mask &= (x - lo > reach) & (hi - x > reach)
    return mask


def _packets(ctx: Context, name: str, count: int) -> list:
    rng = ctx.rng(name)
    return [fam.random_packet(rng, ctx.box) for _ in range(count)]


def _no_growth(values, factor: float = 2.0) -> bool:
    """Later entries (larger families) stay within ``factor`` of the first."""
    v = np.asarray(values, dtype=float)
    return bool(v.size and np.all(np.isfinite(v)) and v.max() <= factor * v[0])


def _gated(values, gate: float) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(v.size and np.all(np.isfinite(v)) and v.max() <= gate * np.median(v))


# ---------------------------------------------------------------------------
# lebesgue


def suite_lebesgue(ctx: Context) -> list:
    out = []
    tol = ctx.tol.norm
    rng = ctx.rng("lebesgue.const_oracle")
    worst = 0.0
    for q in (0.5, 1.0, 1.5, 2.0):
        pq = ExponentFunction.constant(q, ctx.box)
        for _ in range(ctx.cfg.trials * 2):
            f = fam.random_grid_function(rng, ctx.box)
            worst = max(worst, _rel(luxemburg_norm(f, pq).value, const_lp_norm(f, q)))
    out.append(check("lebesgue.const_oracle", worst < tol, max_rel_error=worst))

    gbox = Box.interval(-1.0, 3.0, 1024)
    pg = ExponentFunction.from_preset("where(x <= 1, 1.0, 2.0)", gbox)
    val = luxemburg_norm(Cube((1.0,), 2.0).indicator(gbox), pg).value
    golden = (1 + math.sqrt(5)) / 2
    out.append(check("lebesgue.golden_ratio", abs(val - golden) < tol, value=val, expected=golden))

    rng = ctx.rng("lebesgue.unit_modular")
    dev = 0.0
    for _ in range(ctx.cfg.trials * 2):
        f = fam.random_grid_function(rng, ctx.box)
        dev = max(dev, abs(modular(f / luxemburg_norm(f, ctx.p).value, ctx.p) - 1))
    out.append(check("lebesgue.unit_modular", dev < tol, max_deviation=dev))

    rng = ctx.rng("lebesgue.homogeneity")
    hom, tri, bound_ratio = 0.0, 0.0, 0.0
    pu = ctx.p.underline_p
    for _ in range(ctx.cfg.trials):
        f = fam.random_grid_function(rng, ctx.box)
        g = fam.random_grid_function(rng, ctx.box)
        c = float(rng.uniform(0.01, 100))
        nf, ng = luxemburg_norm(f, ctx.p).value, luxemburg_norm(g, ctx.p).value
        hom = max(hom, _rel(luxemburg_norm(f * c, ctx.p).value, c * nf))
        nfg = luxemburg_norm(f + g, ctx.p).value
        if ctx.p.p_minus >= 1:
            tri = max(tri, nfg / (nf + ng))
        elif ctx.p.p_plus <= 1:
            tri = max(tri, nfg ** pu / (nf ** pu + ng ** pu))
        # modular(f/delta) = c0 forces ||f|| <= delta max(c0^(1/p_minus), c0^(1/p_plus))
        delta = nf * float(rng.uniform(0.2, 5))
        c0 = modular(f / delta, ctx.p)
        bound = delta * max(c0 ** (1 / ctx.p.p_minus), c0 ** (1 / ctx.p.p_plus))
        bound_ratio = max(bound_ratio, nf / bound)
    out.append(check("lebesgue.homogeneity", hom < 2 * 1e-8 * 10, max_rel_error=hom))
    out.append(check("lebesgue.quasi_triangle", tri <= 1 + 1e-7, max_ratio=tri))
    out.append(check("lebesgue.modular_to_norm", bound_ratio <= 1 + 1e-7,
                     empirical_constant=bound_ratio))

    dim = ctx.box.dim
    base = Cube((0.25,) * dim, 0.5)
    tower = dyadic_tower(base, 5)
    pairs = [(tower[i], tower[i + 1]) for i in range(5)]
    c1 = cube_ratio_check(ctx.p, pairs, ctx.box.h).constant
    c2 = cube_ratio_check(ctx.p, pairs, ctx.box.h / 2).constant
    drift = _rel(c2, c1)
    out.append(check("lebesgue.cube_ratio", math.isfinite(c1) and drift < ctx.tol.drift,
                     constant=c1, constant_refined=c2, drift=drift))

    cubes = [Cube((-2.0,) * dim, 1.0), Cube((2.0,) * dim, 1.0)]
    a = a_functional([1.0, 1.0], cubes, ExponentFunction.constant(1.0, ctx.box))
    out.append(check("lebesgue.a_functional_disjoint", abs(a - 2) < 1e-9, value=a))

    lh = verify_log_holder(ctx.p, budget=2000, seed=ctx.seed)
    out.append(check("lebesgue.log_holder", lh.passed, **{k: v for k, v in lh.to_dict().items()
                                                        if k in ("c_local", "c_infinity",
                                                                 "p_infinity_estimate")}))
    return out


# ---------------------------------------------------------------------------
# maximal


def suite_maximal(ctx: Context) -> list:
    out = []
    box = Box.interval(-4.0, 4.0, 512)
    m = hl_maximal(Cube((0.5,), 1.0).indicator(box))
    i = box.node_index((2.0,))
    val = float(m.values[i])
    out.append(check("maximal.indicator_at_2", abs(val - 0.5) <= 2 * box.h, value=val))

    one = GridFunction(box, np.ones(box.shape))
    dev = float(np.max(np.abs(hl_maximal(one).values - 1)))
    out.append(check("maximal.constant", dev < 1e-12, max_deviation=dev))

    rng = ctx.rng("maximal.dominates")
    ok = True
    for _ in range(ctx.cfg.trials):
        f = fam.random_grid_function(rng, box)
        ok &= bool(np.all(hl_maximal(f).values >= np.abs(f.values) * (1 - 1e-12)))
    out.append(check("maximal.dominates", ok))

    p32 = ExponentFunction.constant(1.5, box)
    ratios = []
    for count in (4, 8, 16):
        fs = [Cube((-3.0 + 6.0 * j / count,), 6.0 / count / 2).indicator(box) for j in range(count)]
        ratios.append(fs_vector_check(fs, 2.0, p32)["ratio"])
    out.append(check("maximal.fs_vector", _no_growth(ratios, 1.5), ratios=ratios))

    r = ctx.p.p_minus / 2
    dom = all(dilation_domination(Cube((0.0,) * ctx.box.dim, 0.5), k, r, ctx.box)
              for k in (1, 2, 3, 4))
    out.append(check("maximal.dilation_domination", dom, r=r))

    rng = ctx.rng("maximal.dilation_scaling")
    cubes = fam.random_cubes(rng, ctx.box, 6, (0.25, 0.5))
    lams = rng.uniform(0.5, 2.0, len(cubes))
    rep = dilation_scaling(lams, cubes, ctx.p, r, box=ctx.box)
    out.append(check("maximal.dilation_scaling",
                     np.all(np.isfinite(rep["ratios"])) and rep["slope"] <= rep["bound_slope"] + 0.05,
                     **rep))
    return out


# ---------------------------------------------------------------------------
# semigroup


def suite_semigroup(ctx: Context) -> list:
    out = []
    box = ctx.box
    x = box.mesh()[0]
    t = 0.5
    xi = 2.0
    inner = _interior(box, _tail_radius(t))
    cosf = GridFunction(box, np.cos(xi * x))

    def mult_err(g, mult, mask=inner):
        ref = mult * np.cos(xi * x)
        return float(np.max(np.abs(g.values - ref)[mask])) / abs(mult)

    e_heat = mult_err(heat_apply(cosf, t), math.exp(-t * xi ** 2))
    e_q = mult_err(apply_Qst(cosf, t, 0), t * xi ** 2 * math.exp(-t * xi ** 2))
    u = t * xi ** 2
    e_p = mult_err(apply_Pst(cosf, t, 1), 1 - (1 - math.exp(-u)) ** 2, _interior(box, _tail_radius(2 * t)))
    out.append(check("semigroup.heat_multiplier", e_heat < 1e-6, rel_error=e_heat))
    out.append(check("semigroup.q_multiplier", e_q < 1e-6, rel_error=e_q))
    out.append(check("semigroup.p_multiplier", e_p < 1e-6, rel_error=e_p))

    rng = ctx.rng("semigroup.laws")
    f = fam.random_packet(rng, box)
    g = fam.random_packet(rng, box)
    tiny = heat_apply(f, 1e-6 * box.h ** 2)
    e_id = const_lp_norm(tiny - f, 2) / const_lp_norm(f, 2)
    out.append(check("semigroup.identity_limit", e_id < 1e-6, rel_error=e_id))

    one = GridFunction(box, np.ones(box.shape))
    cons = float(np.max(np.abs(heat_apply(one, t).values - 1)[inner]))
    cons1 = float(np.max(np.abs(apply_Pst(one, t, 1).values - 1)[_interior(box, _tail_radius(2 * t))]))
    out.append(check("semigroup.conservation", max(cons, cons1) < 1e-9,
                     heat_error=cons, p1_error=cons1))

    two = heat_apply(heat_apply(f, 0.3), 0.7)
    direct = heat_apply(f, 1.0)
    inner1 = _interior(box, _tail_radius(1.0))
    e_law = float(np.linalg.norm((two - direct).values[inner1]) / np.linalg.norm(direct.values[inner1]))
    out.append(check("semigroup.semigroup_law", e_law < 1e-8, rel_error=e_law))

    lhs = integrate(heat_apply(f, t) * g)
    rhs = integrate(f * heat_apply(g, t))
    out.append(check("semigroup.self_adjoint", _rel(lhs, rhs) < 1e-10, lhs=lhs, rhs=rhs))

    qmax = max(const_lp_norm(apply_Qst(f, float(tt) ** 2, 0), 2) for tt in ctx.ladder.t[::4])
    qb = qmax / const_lp_norm(f, 2)
    out.append(check("semigroup.q_bound", qb <= math.exp(-1) * (1 + 1e-9), ratio=qb,
                     bound=math.exp(-1)))

    worst = {}
    for s in (0, 1):
        for q in (2.0, 4.0):
            rs = [const_lp_norm(apply_Pst(f, float(tt) ** 2, s), q) / const_lp_norm(f, q)
                  for tt in ctx.ladder.t[::8]]
            worst[f"s{s}_p{q:g}"] = max(rs)
    ok = all(v <= (2 ** (int(k[1]) + 1) - 1) * (1 + 1e-9) for k, v in worst.items())
    out.append(check("semigroup.uniform_bound", ok, max_ratios=worst))

    rep = verify_kernel_decay(GAUSSIAN, box.dim)
    out.append(check("semigroup.kernel_gaussian", rep.passed, constant=rep.constant))
    good = SemigroupSpec("custom", 2.0, "(1+r)**(-(n+0.5))", 0.4)
    bad = SemigroupSpec("custom", 2.0, "(1+r)**(-(n+0.5))", 0.6)
    rg, rb = verify_kernel_decay(good, box.dim), verify_kernel_decay(bad, box.dim)
    out.append(check("semigroup.kernel_custom_pass", rg.passed, slope=rg.decay_slope))
    out.append(check("semigroup.kernel_custom_reject", (not rb.passed) and rb.witness is not None,
                     witness=rb.witness))

    user = verify_kernel_decay(ctx.spec, box.dim)
    detail = {k: v for k, v in user.to_dict().items() if k != "passed"}
    out.append(check("semigroup.configured_spec", user.passed, spec=ctx.spec.to_dict(),
                     experimental=ctx.spec.experimental, **detail))
    return out


# ---------------------------------------------------------------------------
# tent


def suite_tent(ctx: Context) -> list:
    out = []
    box, ladder, p = ctx.box, ctx.ladder, ctx.p
    rng = ctx.rng("tent.fubini")
    g = fam.random_halfspace(rng, box, ladder)
    fub = const_lp_norm(tent_T(g, extend=True), 2) ** 2 / (BALL_VOLUME[box.dim] * g.l2_dtt() ** 2)
    out.append(check("tent.fubini", abs(fub - 1) < 1e-10, ratio=fub))

    def decompose_family(b, lad, name):
        r = ctx.rng(name)
        rows = []
        for _ in range(ctx.cfg.trials):
            F = fam.random_halfspace(r, b, lad)
            pp = p.with_box(b)
            d = tent_atomic_decompose(F, pp)
            res = (d.reconstruct() - F).l2_dtt() / F.l2_dtt()
            atoms_ok = all(is_tent_atom(a.values, a.cube, pp) for a in d.atoms[:8])
            finite = all(math.isfinite(a.l2_dtt()) for a in d.atoms)
            rows.append({"terms": len(d), "residual": res, "a_value": d.a_value,
                         "tent_norm": tent_norm(F, pp), "atoms_ok": atoms_ok, "t22_finite": finite})
        return rows

    rows = decompose_family(box, ladder, "tent.decompose")
    coarse = Box(box.dim, box.lower, box.upper, box.points_per_axis // 2)
    rows2 = decompose_family(coarse, ScaleLadder.for_box(coarse, ladder.levels, ladder.t_max),
                             "tent.decompose")
    c1 = max(r["a_value"] / r["tent_norm"] for r in rows)
    c2 = max(r["a_value"] / r["tent_norm"] for r in rows2)
    res = max(r["residual"] for r in rows + rows2)
    out.append(check("tent.reconstruction", res < ctx.tol.tent_residual, max_residual=res))
    out.append(check("tent.atoms_valid", all(r["atoms_ok"] for r in rows + rows2)))
    out.append(check("tent.compact_embedding", all(r["t22_finite"] for r in rows + rows2)))
    drift = max(c1, c2) / min(c1, c2)
    out.append(check("tent.a_value_bound", math.isfinite(c1) and drift < 2.0, constant=c1,
                     constant_coarse=c2, drift=drift))

    F = fam.random_halfspace(ctx.rng("tent.single_atom"), box, ladder)
    atom = tent_atomic_decompose(F, p).atoms[0]
    d1 = tent_atomic_decompose(atom.values, p)
    rec = (d1.reconstruct() - atom.values).l2_dtt() / atom.l2_dtt()
    out.append(check("tent.single_atom", rec < ctx.tol.tent_residual and d1.a_value <= c1,
                     terms=len(d1), a_value=d1.a_value))

    zero = tent_atomic_decompose(HalfSpaceFunction.zeros(box, ladder), p)
    out.append(check("tent.zero", len(zero) == 0 and zero.a_value == 0))

    if p.p_plus <= 1:
        rng = ctx.rng("tent.subadditivity")
        pu, worst = p.underline_p, 0.0
        for _ in range(ctx.cfg.trials):
            a, b = fam.random_halfspace(rng, box, ladder), fam.random_halfspace(rng, box, ladder)
            worst = max(worst, tent_norm(a + b, p) ** pu
                        / (tent_norm(a, p) ** pu + tent_norm(b, p) ** pu))
        out.append(check("tent.subadditivity", worst <= 1 + 1e-7, max_ratio=worst))

    rng = ctx.rng("tent.sampling")
    consts = []
    for count in (8, 16, 32):
        best = 0.0
        for _ in range(3):
            cubes = fam.random_cubes(rng, box, count, (0.25, 2.0))
            atoms = []
            for c in cubes:
                v = c.indicator(box).values * rng.uniform(-1, 1, box.shape)
                v *= c.volume ** 0.5 / max(math.sqrt(float(np.sum(np.abs(v) ** 2)) * box.cell_volume),
                                           1e-300)
                atoms.append(GridFunction(box, v))
            best = max(best, sampling_inequality(rng.uniform(0.1, 2, count), atoms, cubes, p)["ratio"])
        consts.append(best)
    out.append(check("tent.sampling_inequality", _no_growth(consts), constants=consts))
    return out


# ---------------------------------------------------------------------------
# hardy


def suite_hardy(ctx: Context) -> list:
    out = []
    box, ladder, p = ctx.box, ctx.ladder, ctx.p
    spec = GAUSSIAN
    q = compute_Cms(2.0, 0, 0)
    out.append(check("hardy.cms", _rel(q, 72 / 5) < 1e-8 and _rel(1 / cms_integral(2, 0, 0), 72 / 5) < 1e-12,
                     value=q))
    q1, c1 = compute_Cms(1.0, 0, 0), 1 / cms_integral(1.0, 0, 0)
    out.append(check("hardy.cms_m1", _rel(q1, c1) < 1e-8, quadrature=q1, closed_form=c1))

    packets = _packets(ctx, "hardy.packets", ctx.cfg.trials)
    area, repro = [], []
    params = OperatorParams()
    for f in packets:
        nf = const_lp_norm(f, 2)
        area.append(const_lp_norm(lusin_area(f, spec, ladder), 2) / nf)
        F = q_ladder(f, ladder, spec)
        repro.append(const_lp_norm(pi_L(F, params, spec) - f, 2) / nf)
    out.append(check("hardy.area_identity", max(abs(a - 0.5) / 0.5 for a in area) < ctx.tol.area_identity,
                     ratios=area, expected=0.5))
    out.append(check("hardy.reproducing", max(repro) < ctx.tol.reproducing, rel_errors=repro))

    xi = np.geomspace(4 / ladder.t_max, 0.25 / ladder.t_min, 200)
    merr = float(np.max(np.abs(reproducing_multiplier(xi ** 2, ladder, params) - 1)))
    out.append(check("hardy.reproducing_multiplier", merr < ctx.tol.reproducing, max_error=merr,
                     band=[float(xi[0]), float(xi[-1])]))

    ones = ExponentFunction.constant(1.0, box)
    f = packets[0]
    hn1 = hardy_norm(f, ones, spec, ladder)
    l1 = const_lp_norm(lusin_area(f, spec, ladder), 1)
    hp = hardy_norm(f, p, spec, ladder)
    hs = hardy_norm(f * 3.7, p, spec, ladder)
    out.append(check("hardy.p1_oracle", _rel(hn1, l1) < 1e-6, value=hn1, oracle=l1))
    out.append(check("hardy.homogeneity", _rel(hs, 3.7 * hp) < 2e-8 * 10, value=hs))

    l4 = [const_lp_norm(lusin_area(g, spec, ladder), 4) / const_lp_norm(g, 4) for g in packets]
    out.append(check("hardy.lp4_comparability", max(l4) / min(l4) <= ctx.tol.stability_gate,
                     ratios=l4))

    rng = ctx.rng("hardy.pi_bound")
    pis = []
    for _ in range(ctx.cfg.trials):
        F = fam.random_halfspace(rng, box, ladder)
        pis.append(const_lp_norm(pi_L(F, params, spec), 2) / math.sqrt(F.l2_dtt() ** 2))
    out.append(check("hardy.pi_bound", _gated(pis, ctx.tol.stability_gate), constants=pis))

    mdecs, res, bratio = [], [], []
    for g in packets[:2]:
        d = molecular_decompose(g, p, spec, params, ladder)
        mdecs.append(d)
        res.append(d.residual)
        bratio.append(d.b_value / hardy_norm(g, p, spec, ladder))
    out.append(check("hardy.molecular_round_trip", max(res) < ctx.tol.molecular_residual,
                     residuals=res, terms=[len(d.molecules) for d in mdecs]))
    out.append(check("hardy.b_value_bound", all(math.isfinite(b) for b in bratio), constants=bratio))

    decay = []
    for mol in mdecs[0].molecules:
        decay.append(molecule_decay(mol.values, mol.cube, p, 1.0)["max"])
    out.append(check("hardy.molecule_decay", all(math.isfinite(v) for v in decay),
                     uniform_constant=max(decay) if decay else 0.0))

    rng = ctx.rng("hardy.synthesis")
    mols = mdecs[0].molecules
    syn = []
    for size in (4, 8, 16):
        best = 0.0
        for _ in range(3):
            idx = rng.choice(len(mols), size=min(size, len(mols)), replace=False)
            lams = rng.uniform(0.2, 2.0, idx.size)
            best = max(best, synthesis_ratio(lams, [mols[i].values for i in idx],
                                             [mols[i].cube for i in idx], p, spec, ladder)["ratio"])
        syn.append(best)
    out.append(check("hardy.synthesis_bound", _no_growth(syn), constants=syn))

    sp = split_molecule(mols[0].values, mols[0].cube)
    out.append(check("hardy.molecule_split", sp["max_relative_moment"] < 1e-10
                     and sp["reconstruction_error"] < 1e-10 * max(1.0, const_lp_norm(mols[0].values, 2)),
                     pieces=sp["pieces"], max_relative_moment=sp["max_relative_moment"]))

    vals = embedding_family(ctx)
    out.append(check("hardy.classical_embedding", max(vals) / min(vals) < ctx.tol.stability_gate,
                     max=max(vals), min=min(vals), spread=max(vals) / min(vals)))
    return out


EMBEDDING_EXPONENT = "0.8 + 0.2*exp(-x**2)"


def embedding_family(ctx: Context | None = None, points: int = 2048, levels: int = 64) -> list:
    """Hardy norms of normalized Haar atoms over dyadic sides 1/4..4 and several translations."""
    box = Box.interval(-32.0, 32.0, points)
    ladder = ScaleLadder.for_box(box, levels)
    p = ExponentFunction.from_preset(EMBEDDING_EXPONENT, box)
    vals = []
    for side in (0.25, 0.5, 1.0, 2.0, 4.0):
        for centre in (-3.0, -0.5, 0.0, 1.25, 3.0):
            atom = haar_atom(Cube((centre + side / 2,), side), box, p)
            vals.append(classical_atom_embedding_check(atom, p, GAUSSIAN, ladder))
    return vals


# ---------------------------------------------------------------------------
# bmo


def suite_bmo(ctx: Context) -> list:
    out = []
    box, ladder, p = ctx.box, ctx.ladder, ctx.p
    depth = ctx.cfg.family_depth
    const = GridFunction(box, np.full(box.shape, 2.5))
    b0 = bmo_report(const, p, family=depth).value
    c0 = carleson_norm(const, p, family=depth, ladder=ladder)
    out.append(check("bmo.constant_zero", b0 == 0 and c0 == 0, bmo=b0, carleson=c0))

    ones = ExponentFunction.constant(1.0, box)
    step = box.sample(lambda x: (x > 0.3).astype(float))
    vals = [bmo_report(step, ones, family=d).value for d in (depth, depth + 1)]
    drift = _rel(vals[1], vals[0])
    out.append(check("bmo.step_depth_stability", drift < 0.05, values=vals, stability_drift=drift))

    q0 = Cube((0.5,) * box.dim, 1.0)
    rep = bmo_report(q0.indicator(box), p, family=depth + 2)
    near = rep.attaining_cube is not None and q0.dilate(3).contains_cube(
        Cube(rep.attaining_cube.center, 1e-9))
    out.append(check("bmo.indicator_attainment", near, **rep.to_dict()))

    rng = ctx.rng("bmo.carleson")
    params = [fam.packet_params(rng, box) for _ in range(max(3, ctx.cfg.trials // 2))]
    gs = [fam.wave_packet(box, **kw) for kw in params]

    def carleson_constant(b, d, functions):
        lad = ScaleLadder.for_box(b, ladder.levels, ladder.t_max)
        pb = p.with_box(b)
        return max(carleson_norm(g, pb, family=d, ladder=lad) / bmo_report(g, pb, family=d).value
                   for g in functions)

    ca = carleson_constant(box, depth, gs)
    cb = carleson_constant(box, depth + 2, gs)
    out.append(check("bmo.carleson_bound", math.isfinite(ca) and _rel(cb, ca) < ctx.tol.drift,
                     constant=ca, constant_deeper=cb, stability_drift=_rel(cb, ca)))
    by_grid = []
    for factor in (0.5, 1.0, 2.0):
        b = Box(box.dim, box.lower, box.upper, int(box.points_per_axis * factor))
        by_grid.append(carleson_constant(b, depth, [fam.wave_packet(b, **kw) for kw in params]))
    gdrift = max(by_grid) / min(by_grid) - 1
    out.append(check("bmo.carleson_refinement", gdrift < ctx.tol.drift, constants=by_grid,
                     stability_drift=gdrift))

    rng = ctx.rng("bmo.duality")
    viol = 0
    for _ in range(ctx.cfg.trials * 3):
        a, b = fam.random_halfspace(rng, box, ladder), fam.random_halfspace(rng, box, ladder)
        viol += not tent_duality_check(a, b)["holds"]
    out.append(check("bmo.tent_duality", viol == 0, pairs=ctx.cfg.trials * 3, violations=viol))

    out.extend(pairing_checks(ctx))
    return out


def pairing_checks(ctx: Context, molecules_from: GridFunction | None = None,
                   g: GridFunction | None = None, max_pairs: int | None = None) -> list:
    """Pairing identity on molecule / band-limited pairs, its bilinearity and the pairing bound.

    The relative criterion is applied to pairs whose pairing is not negligible,
    ``|<alpha, g>| >= c ||alpha||_2 ||g||_2`` with ``c`` the configured
    conditioning threshold; every pair must in addition meet the absolute bound
    ``|lhs - rhs| <= tol * c ||alpha||_2 ||g||_2``.
    """
    box, ladder, p = ctx.box, ctx.ladder, ctx.p
    tol, cond = ctx.tol.pairing, ctx.tol.pairing_conditioning
    rng = ctx.rng("bmo.pairing")
    f = molecules_from if molecules_from is not None else fam.wave_packet(box, 0.0, 2.0, 2.5)
    g = g if g is not None else fam.wave_packet(box, 0.3, 3.0, 2.5, 0.4)
    dec = molecular_decompose(f, p, GAUSSIAN, OperatorParams(), ladder)
    mols = dec.molecules
    if max_pairs is not None and len(mols) > max_pairs:
        mols = [mols[i] for i in sorted(rng.choice(len(mols), max_pairs, replace=False))]
    ng = const_lp_norm(g, 2)
    rel, skipped, abs_ok = [], 0, True
    for m in mols:
        lhs, rhs = pairing_via_tent(m, g, ladder=ladder)
        scale = const_lp_norm(m.values, 2) * ng
        abs_ok &= abs(lhs - rhs) <= tol * cond * scale
        if abs(lhs) >= cond * scale:
            rel.append(abs(lhs - rhs) / abs(lhs))
        else:
            skipped += 1
    worst = max(rel) if rel else 0.0
    out = [check("bmo.pairing_identity", bool(rel) and worst < tol and abs_ok, pairs=len(mols),
                 conditioned_pairs=len(rel), skipped_near_orthogonal=skipped,
                 max_rel_error=worst, median_rel_error=float(np.median(rel)) if rel else 0.0,
                 absolute_bound_met=bool(abs_ok))]

    m1, m2 = mols[0].values, mols[1].values
    c1, c2 = float(rng.uniform(0.5, 2)), float(rng.uniform(-2, -0.5))
    s = pairing_via_tent(m1 * c1 + m2 * c2, g, ladder=ladder)[1]
    r1 = c1 * pairing_via_tent(m1, g, ladder=ladder)[1]
    r2 = c2 * pairing_via_tent(m2, g, ladder=ladder)[1]
    # relative to the size of the summands: the sum itself may cancel
    err = abs(s - (r1 + r2)) / (abs(r1) + abs(r2))
    out.append(check("bmo.pairing_bilinear", err < 1e-10, rel_error=err))

    bg = bmo_report(g, p, family=ctx.cfg.family_depth).value
    bounds = []
    for size in (2, 4, 8):
        idx = rng.choice(len(dec.molecules), size=min(size, len(dec.molecules)), replace=False)
        lams = rng.uniform(0.2, 2.0, idx.size)
        comb = GridFunction(box, sum(l * dec.molecules[i].values.values for l, i in zip(lams, idx)))
        bounds.append(abs(integrate(comb * g)) / (hardy_norm(comb, p, GAUSSIAN, ladder) * bg))
    out.append(check("bmo.pairing_bound", all(math.isfinite(b) for b in bounds)
                     and max(bounds) <= ctx.tol.stability_gate * max(np.median(bounds), 1e-300),
                     ratios=bounds))
    return out


# ---------------------------------------------------------------------------
# fractional


def suite_fractional(ctx: Context, gamma: float | None = None, p: ExponentFunction | None = None) -> list:
    out = []
    box = ctx.box
    gamma = gamma if gamma is not None else ctx.cfg.gamma
    params = FractionalParams(gamma, 2.0, box.dim)
    tol = ctx.tol.fractional_multiplier

    shape = tuple(sfft.next_fast_len(8 * s, real=True) for s in box.shape)
    xi2 = frequency_sq(box, shape)
    xi_all = np.sqrt(xi2[xi2 > 0])
    lo, hi = float(xi_all.min()), float(xi_all.max())
    band = np.geomspace(lo, hi, 400)
    mid = band[(np.log(band) >= np.log(lo) + 0.25 * np.log(hi / lo))
               & (np.log(band) <= np.log(lo) + 0.75 * np.log(hi / lo))]
    merr = float(np.max(np.abs(fractional_multiplier(mid ** 2, gamma, lo ** 2) * mid ** (2 * gamma) - 1)))
    out.append(check("fractional.multiplier", merr < tol, max_rel_error=merr,
                     band=[float(mid[0]), float(mid[-1])]))

    k = 8
    xi = 2 * np.pi * k / box.length
    x = box.mesh()[0]
    cosf = GridFunction(box, np.cos(xi * x))
    got = fractional_apply(cosf, params, boundary="periodic")
    e_cos = float(np.max(np.abs(got.values - xi ** (-2 * gamma) * np.cos(xi * x)))) / xi ** (-2 * gamma)
    out.append(check("fractional.cosine_mode", e_cos < tol, rel_error=e_cos, xi=xi))

    two = GridFunction(box, np.cos(xi * x) + 0.5 * np.sin(3 * xi * x))
    lin = fractional_apply(two, params, boundary="periodic")
    parts = fractional_apply(cosf, params, boundary="periodic").values + 0.5 * fractional_apply(
        GridFunction(box, np.sin(3 * xi * x)), params, boundary="periodic").values
    e_lin = float(np.max(np.abs(lin.values - parts)))
    out.append(check("fractional.linearity", e_lin < 1e-12, max_error=e_lin))

    f = fam.wave_packet(box, 0.0, 2.0, 2.5)
    ident = fractional_apply(f, FractionalParams(1e-9, 2.0, box.dim))
    e_id = const_lp_norm(ident - f, 2) / const_lp_norm(f, 2)
    out.append(check("fractional.identity_limit", e_id < 1e-6, rel_error=e_id))

    g1, g2 = 0.4 * min(gamma, 0.2), 0.6 * min(gamma, 0.2)
    comp = fractional_apply(fractional_apply(f, FractionalParams(g1, 2.0, box.dim)),
                            FractionalParams(g2, 2.0, box.dim))
    direct = fractional_apply(f, FractionalParams(g1 + g2, 2.0, box.dim))
    e_c = const_lp_norm(comp - direct, 2) / const_lp_norm(direct, 2)
    out.append(check("fractional.composition", e_c < ctx.tol.composition, rel_error=e_c))

    pe = p if p is not None else ExponentFunction.constant(1.0, box)
    atoms = []
    for side in (0.25, 0.5, 1.0, 2.0):
        for centre in (-2.0, -0.75, 0.0, 0.5, 2.0):
            atoms.append(haar_atom(Cube((centre,) * box.dim, side), box, pe).values)
    rep = fractional_hardy_check(atoms, pe, params, ladder=ctx.ladder, gate=ctx.tol.stability_gate)
    trend_ok = abs(rep["log_slope"]) * (len(atoms) - 1) < math.log(ctx.tol.stability_gate)
    out.append(check("fractional.hardy_ratio", rep["passed"] and trend_ok, members=len(atoms),
                     max=rep["max"], median=rep["median"], log_slope=rep["log_slope"],
                     q_minus=rep["q_minus"], q_plus=rep["q_plus"]))

    rng = ctx.rng("fractional.coefficients")
    ratios = []
    for _ in range(50):
        cubes = fam.random_cubes(rng, box, int(rng.integers(1, 12)), (0.25, 4.0))
        ratios.append(coefficient_inequality(rng.uniform(0.1, 3, len(cubes)), cubes, pe, params)["ratio"])
    out.append(check("fractional.coefficient_inequality", _gated(ratios, ctx.tol.stability_gate),
                     families=len(ratios), max=max(ratios), median=float(np.median(ratios))))
    return out


SUITES: dict[str, Callable] = {
    "lebesgue": suite_lebesgue,
    "maximal": suite_maximal,
    "semigroup": suite_semigroup,
    "tent": suite_tent,
    "hardy": suite_hardy,
    "bmo": suite_bmo,
    "fractional": suite_fractional,
}


# ---------------------------------------------------------------------------
# runner


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n"


@dataclass
class SuiteResult:
    passed: bool
    failing: list
    reports: dict
    timings: dict
    output_dir: Path


def run_suite(cfg: SuiteConfig, suites: dict | None = None) -> SuiteResult:
    """Run the selected suites, write ``<suite>.json`` and ``summary.csv``, return the outcome."""
    suites = suites or SUITES
    outdir = cfg.resolved_output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = make_context(cfg) if cfg.suites else None
    reports, timings, failing = {}, {}, []
    # where the reports go is not part of what they certify
    config = {k: v for k, v in cfg.to_dict().items() if k != "output_dir"}
    for name in cfg.suites:
        t0 = time.perf_counter()
        try:
            checks = suites[name](ctx)
        except Exception as exc:  # a crashing suite is a failing suite
            checks = [check(f"{name}.error", False, error=f"{type(exc).__name__}: {exc}")]
        timings[name] = time.perf_counter() - t0
        report = {"suite": name, "seed": cfg.seed, "config": config, "checks": checks,
                  "passed": all(c["passed"] for c in checks)}
        reports[name] = report
        failing += [c["id"] for c in checks if not c["passed"]]
        (outdir / f"{name}.json").write_text(dump_json(report))
    with open(outdir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["suite", "check", "passed", "suite_seconds"])
        for name, rep in reports.items():
            for c in rep["checks"]:
                w.writerow([name, c["id"], int(c["passed"]), f"{timings[name]:.2f}"])
    if cfg.plots and ctx is not None:
        from .plots import write_plots
        write_plots(ctx, outdir)
    return SuiteResult(not failing, failing, reports, timings, outdir)
