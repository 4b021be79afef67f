"""Acceptance criteria 1-13, each at its stated tolerance.

Every criterion records one PASS/FAIL line; the lines are printed together at
the end of the module (visible in ``pytest -v`` output).  Oracles are computed
independently of the code under test wherever one exists: closed-form constant
exponent norms, Plancherel constants by adaptive quadrature, periodic Fourier
modes, brute-force sums.
"""
import filecmp
import math
import time

import numpy as np
import pytest
from scipy import integrate as sint

from vhardy import families as fam
from vhardy.bmo import bmo_report, carleson_norm, tent_duality_check
from vhardy.config import SuiteConfig
from vhardy.exponent import ExponentFunction
from vhardy.fractional import (FractionalParams, coefficient_inequality, fractional_apply,
                               fractional_hardy_check)
from vhardy.grid import BALL_VOLUME, Box, Cube, GridFunction, ScaleLadder, const_lp_norm
from vhardy.hardy import (compute_Cms, haar_atom, lusin_area, molecular_decompose, pi_L,
                          synthesis_ratio)
from vhardy.lebesgue import cube_ratio_check, dyadic_tower, luxemburg_norm, modular
from vhardy.semigroup import GAUSSIAN, OperatorParams, q_ladder
from vhardy.suites import EMBEDDING_EXPONENT, embedding_family, make_context, pairing_checks, run_suite
from vhardy.tent import tent_atomic_decompose, tent_norm

BOX = Box.interval(-16.0, 16.0, 1024)
LADDER = ScaleLadder.for_box(BOX, 64)
P_EX = ExponentFunction.from_preset("example-1", BOX)
P_CAP = ExponentFunction.from_preset("example-1-capped", BOX)

RESULTS: dict = {}
TITLES = {
    1: "Luxemburg norm vs constant-exponent oracle, golden ratio",
    2: "unit modular at the norm",
    3: "cube-ratio constant on a 6-level tower, refinement drift",
    4: "reproducing formula on band-limited inputs",
    5: "area-function L2 identity",
    6: "tent atomic decomposition",
    7: "molecular round trip and synthesis bound",
    8: "tent duality inequality",
    9: "Carleson bound vs BMO, constant has zero BMO",
    10: "pairing identity and pairing bound",
    11: "fractional multiplier, Hardy ratio, coefficient inequality",
    12: "classical-atom embedding",
    13: "determinism of the default suite",
}


def record(n: int, passed: bool, detail: str):
    RESULTS[n] = (bool(passed), detail)
    return passed


@pytest.fixture(scope="module", autouse=True)
def report_lines(request):
    yield
    tr = request.config.pluginmanager.getplugin("terminalreporter")
    lines = []
    for n, title in TITLES.items():
        ok, detail = RESULTS.get(n, (False, "not run"))
        lines.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    text = "\n".join(["", "acceptance criteria", *lines])
    if tr is not None:
        tr.write_line(text)
    else:
        print(text)


def rel(a, b):
    return abs(a - b) / abs(b)


def test_c01_luxemburg_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for q in (0.5, 1.0, 1.5, 2.0):
        pq = ExponentFunction.constant(q, BOX)
        for _ in range(50):
            f = fam.random_grid_function(rng, BOX)
            # closed form for a constant exponent: (sum |f|^q h)^(1/q)
            oracle = float(np.sum(np.abs(f.values) ** q) * BOX.h) ** (1 / q)
            worst = max(worst, rel(luxemburg_norm(f, pq).value, oracle))
    gbox = Box.interval(-1.0, 3.0, 1024)
    pg = ExponentFunction.from_preset("where(x <= 1, 1.0, 2.0)", gbox)
    golden = luxemburg_norm(Cube((1.0,), 2.0).indicator(gbox), pg).value
    gerr = abs(golden - (1 + math.sqrt(5)) / 2)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and gerr < 1e-6 and elapsed < 10
    record(1, ok, f"max rel err {worst:.2e}, golden err {gerr:.2e}, {elapsed:.1f}s")
    assert worst < 1e-6 and gerr < 1e-6
    assert elapsed < 10


def test_c02_unit_modular():
    rng = np.random.default_rng(102)
    exps = [P_EX, ExponentFunction.from_preset("example-2", BOX), P_CAP,
            ExponentFunction.from_preset("expr:1.5 + 0.5*sin(x)/(1 + x**2)", BOX)]
    dev = 0.0
    for i in range(100):
        p = exps[i % len(exps)]
        f = fam.random_grid_function(rng, BOX)
        assert not f.is_zero()
        dev = max(dev, abs(modular(f / luxemburg_norm(f, p).value, p) - 1))
    record(2, dev < 1e-6, f"max |rho(f/||f||) - 1| = {dev:.2e} over 100 inputs")
    assert dev < 1e-6


def test_c03_cube_ratio():
    tower = dyadic_tower(Cube((0.25,), 0.5), 5)
    assert len(tower) == 6
    pairs = [(a, b) for i, a in enumerate(tower) for b in tower[i + 1:]]
    c1 = cube_ratio_check(P_EX, pairs, BOX.h)
    c2 = cube_ratio_check(P_EX, pairs, BOX.h / 2)
    # independent recomputation of the two-sided bound with the reported constant
    for row in c1.rows:
        r, rho = row["ratio"], row["volume_ratio"]
        assert rho ** (1 / P_EX.p_minus) / c1.constant <= r * (1 + 1e-12)
        assert r <= c1.constant * rho ** (1 / P_EX.p_plus) * (1 + 1e-12)
    drift = rel(c2.constant, c1.constant)
    ok = math.isfinite(c1.constant) and drift < 0.10
    record(3, ok, f"C = {c1.constant:.4f}, refined {c2.constant:.4f}, drift {drift:.2%}")
    assert ok


def test_c04_reproducing_formula():
    assert compute_Cms(2.0, 0, 0) == pytest.approx(72 / 5, rel=1e-10)
    start = time.perf_counter()
    rng = np.random.default_rng(104)
    errs = []
    for _ in range(20):
        f = fam.random_packet(rng, BOX)
        rec = pi_L(q_ladder(f, LADDER, GAUSSIAN), OperatorParams(0, 0), GAUSSIAN)
        errs.append(const_lp_norm(rec - f, 2) / const_lp_norm(f, 2))
    elapsed = time.perf_counter() - start
    ok = max(errs) < 0.01 and elapsed < 60
    record(4, ok, f"max rel err {max(errs):.2e} over 20 inputs, {elapsed:.1f}s")
    assert max(errs) < 0.01
    assert elapsed < 60


def test_c05_area_identity():
    # Plancherel: ||S f||^2 = omega_1 ||f||^2 int_0^inf (t^2)^2 e^(-2 t^2) dt/t
    integral = sint.quad(lambda t: t ** 3 * math.exp(-2 * t * t), 0, np.inf)[0]
    oracle = math.sqrt(BALL_VOLUME[1] * integral)
    assert oracle == pytest.approx(0.5, rel=1e-12)
    rng = np.random.default_rng(105)
    ratios = []
    for _ in range(10):
        f = fam.random_packet(rng, BOX)
        ratios.append(const_lp_norm(lusin_area(f, GAUSSIAN, LADDER), 2) / const_lp_norm(f, 2))
    worst = max(abs(r - oracle) / oracle for r in ratios)
    record(5, worst < 0.02, f"ratios in [{min(ratios):.5f}, {max(ratios):.5f}], oracle {oracle:.5f}")
    assert worst < 0.02


def test_c06_tent_decomposition():
    def run(box):
        lad = ScaleLadder.for_box(box, LADDER.levels, LADDER.t_max)
        p = P_CAP.with_box(box)
        rng = np.random.default_rng(106)
        res, consts = [], []
        for _ in range(20):
            F = fam.random_halfspace(rng, box, lad)
            d = tent_atomic_decompose(F, p)
            res.append((d.reconstruct() - F).l2_dtt() ** 2 / F.l2_dtt() ** 2)
            consts.append(d.a_value / tent_norm(F, p))
        return max(res), max(consts)

    r1, c1 = run(BOX)
    r2, c2 = run(Box.interval(-16.0, 16.0, 512))
    drift = max(c1, c2) / min(c1, c2)
    ok = max(r1, r2) < 1e-6 and drift < 2
    record(6, ok, f"max T2^2 residual {max(r1, r2):.1e}, C = {c1:.3f} / {c2:.3f} (x{drift:.2f})")
    assert max(r1, r2) < 1e-6
    assert drift < 2


def test_c07_molecular_round_trip():
    rng = np.random.default_rng(107)
    residuals, mols = [], []
    for _ in range(4):
        f = fam.random_packet(rng, BOX)
        d = molecular_decompose(f, P_CAP, GAUSSIAN, OperatorParams(), LADDER)
        # residual recomputed from the stored molecules
        rebuilt = GridFunction(BOX, sum(l * m.values.values for l, m in zip(d.lambdas, d.molecules)))
        residuals.append(const_lp_norm(rebuilt - f, 2) / const_lp_norm(f, 2))
        mols += d.molecules
    consts = []
    for size in (4, 8, 16, 32):
        best = 0.0
        for _ in range(3):
            idx = rng.choice(len(mols), size=size, replace=False)
            lams = rng.uniform(0.2, 2.0, size)
            best = max(best, synthesis_ratio(lams, [mols[i].values for i in idx],
                                             [mols[i].cube for i in idx], P_CAP, GAUSSIAN,
                                             LADDER)["ratio"])
        consts.append(best)
    stable = all(math.isfinite(c) for c in consts) and max(consts) <= 2 * consts[0]
    ok = max(residuals) < 0.02 and stable
    record(7, ok, f"max residual {max(residuals):.1e}, synthesis C by family size "
                  f"{[round(c, 3) for c in consts]}")
    assert max(residuals) < 0.02
    assert stable


def test_c08_tent_duality():
    rng = np.random.default_rng(108)
    violations = 0
    for _ in range(100):
        a, b = fam.random_halfspace(rng, BOX, LADDER), fam.random_halfspace(rng, BOX, LADDER)
        rep = tent_duality_check(a, b)
        # lhs recomputed directly
        lhs = float(np.sum(np.abs(a.values * b.values))) * BOX.h * LADDER.dlog
        assert rep["lhs"] == pytest.approx(lhs, rel=1e-12)
        violations += not rep["holds"]
    record(8, violations == 0, f"{violations} violations in 100 pairs")
    assert violations == 0


def test_c09_carleson_bound():
    rng = np.random.default_rng(109)
    gs = [fam.random_packet(rng, BOX) for _ in range(20)]

    def constant(depth):
        return max(carleson_norm(g, P_CAP, family=depth, ladder=LADDER)
                   / bmo_report(g, P_CAP, family=depth).value for g in gs)

    c7, c9 = constant(7), constant(9)
    const = GridFunction(BOX, np.full(BOX.shape, 3.25))
    b0 = bmo_report(const, P_CAP, family=7).value
    drift = rel(c9, c7)
    ok = math.isfinite(c7) and drift < 0.10 and b0 == 0.0
    record(9, ok, f"C = {c7:.4f} (depth 7), {c9:.4f} (depth 9), drift {drift:.2%}, "
                  f"bmo(const) = {b0}")
    assert b0 == 0.0
    assert math.isfinite(c7) and drift < 0.10


def test_c10_pairing():
    ctx = make_context(SuiteConfig())
    checks = {c["id"]: c for c in pairing_checks(ctx)}
    ident, bound = checks["bmo.pairing_identity"], checks["bmo.pairing_bound"]
    ok = ident["passed"] and bound["passed"]
    record(10, ok, f"max rel err {ident['max_rel_error']:.1e} on {ident['conditioned_pairs']} "
                   f"conditioned pairs ({ident['skipped_near_orthogonal']} near-orthogonal), "
                   f"bound ratios {[round(r, 4) for r in bound['ratios']]}")
    assert ident["passed"], ident
    assert bound["passed"], bound


def test_c11_fractional():
    gamma = 0.125
    params = FractionalParams(gamma, 2.0, 1)
    x = BOX.mesh()[0]
    # resolved periodic modes: exact eigenfunctions, oracle |xi|^(-2 gamma)
    worst = 0.0
    for k in (1, 2, 4, 8, 16, 32, 64, 128):
        xi = 2 * math.pi * k / BOX.length
        out = fractional_apply(GridFunction(BOX, np.cos(xi * x)), params, boundary="periodic")
        worst = max(worst, float(np.max(np.abs(out.values * xi ** (2 * gamma) - np.cos(xi * x)))))

    # variable exponent with p_plus <= 1 and p_minus > 1/2 (so Haar atoms qualify)
    pv = ExponentFunction.from_preset(EMBEDDING_EXPONENT, BOX)
    atoms = [haar_atom(Cube((c,), side), BOX, pv).values
             for side in (0.25, 0.5, 1.0, 2.0) for c in (-2.0, -0.75, 0.0, 0.5, 2.0)]
    hr = fractional_hardy_check(atoms, pv, params, ladder=LADDER, gate=10)
    trend_ok = hr["passed"] and abs(hr["log_slope"]) * (len(atoms) - 1) < math.log(10)

    rng = np.random.default_rng(111)
    ratios = []
    for _ in range(50):
        cubes = fam.random_cubes(rng, BOX, int(rng.integers(1, 12)), (0.25, 4.0))
        rep = coefficient_inequality(rng.uniform(0.1, 3, len(cubes)), cubes, pv, params)
        assert math.isfinite(rep["ratio"])
        ratios.append(rep["ratio"])
    coeff_ok = max(ratios) <= 10 * float(np.median(ratios))
    ok = worst < 1e-3 and trend_ok and coeff_ok
    record(11, ok, f"mode err {worst:.1e}; Hardy ratio max/median {hr['max'] / hr['median']:.2f} "
                   f"slope {hr['log_slope']:.3f} over {len(atoms)} atoms; coefficient ratio "
                   f"max/median {max(ratios) / np.median(ratios):.2f} over 50 families")
    assert worst < 1e-3
    assert trend_ok
    assert coeff_ok


def test_c12_classical_embedding():
    vals = embedding_family()
    spread = max(vals) / min(vals)
    record(12, spread < 10, f"max/min = {spread:.3f} over {len(vals)} atoms")
    assert spread < 10


def test_c13_determinism(tmp_path):
    start = time.perf_counter()
    a = run_suite(SuiteConfig(output_dir=str(tmp_path / "a")))
    b = run_suite(SuiteConfig(output_dir=str(tmp_path / "b")))
    elapsed = time.perf_counter() - start
    names = [f"{s}.json" for s in SuiteConfig().suites]
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    ok = not mismatch and not errors and a.passed and b.passed and elapsed < 15 * 60
    record(13, ok, f"{len(match)} identical reports, {elapsed:.0f}s for two runs, "
                   f"failing checks {a.failing}")
    assert not mismatch and not errors
    assert a.passed and b.passed, a.failing
    assert elapsed < 15 * 60
