import math

import numpy as np
import pytest
from scipy import integrate as sint

from vhardy.exponent import ExponentFunction
from vhardy.families import random_packet, wave_packet
from vhardy.grid import Box, Cube, ScaleLadder, const_lp_norm, integrate
from vhardy.hardy import (classical_atom_embedding_check, cms_integral, compute_Cms, haar_atom,
                          hardy_norm, is_classical_atom, lusin_area, molecular_decompose, pi_L,
                          reproducing_multiplier, split_molecule)
from vhardy.maximal import HypothesisViolationError
from vhardy.semigroup import GAUSSIAN, OperatorParams, SemigroupSpec, q_ladder

BOX = Box.interval(-16, 16, 1024)
LADDER = ScaleLadder.for_box(BOX, 64)


def test_cms_closed_forms():
    assert compute_Cms(2.0, 0, 0) == pytest.approx(72 / 5, rel=1e-8)
    # independent oracle: the defining integral in t by adaptive quadrature
    def integrand(t, m, s, s0):
        v = t ** m
        return v ** (s + 2) * math.exp(-2 * v) * (-math.expm1(-v)) ** (s0 + 1) / t
    for m, s, s0 in [(1.0, 0, 0), (2.0, 0, 0), (2.0, 1, 0), (2.0, 1, 1)]:
        val = sint.quad(integrand, 0, np.inf, args=(m, s, s0), limit=200)[0]
        assert cms_integral(m, s, s0) == pytest.approx(val, rel=1e-8)
        assert compute_Cms(m, s, s0) == pytest.approx(1 / val, rel=1e-8)
    assert compute_Cms(1.0, 0, 0) == pytest.approx(36 / 5, rel=1e-8)


def test_cms_rejects_bad_orders():
    with pytest.raises(ValueError):
        compute_Cms(2.0, 0, 1)


def test_area_identity_plancherel():
    rng = np.random.default_rng(11)
    for _ in range(3):
        f = random_packet(rng, BOX)
        ratio = const_lp_norm(lusin_area(f, GAUSSIAN, LADDER), 2) / const_lp_norm(f, 2)
        assert ratio == pytest.approx(0.5, rel=0.02)


def test_reproducing_formula():
    f = random_packet(np.random.default_rng(12), BOX)
    rec = pi_L(q_ladder(f, LADDER, GAUSSIAN), OperatorParams(), GAUSSIAN)
    assert const_lp_norm(rec - f, 2) < 0.01 * const_lp_norm(f, 2)


def test_reproducing_multiplier_resolved_band():
    xi = np.geomspace(4 / LADDER.t_max, 0.25 / LADDER.t_min, 100)
    assert np.max(np.abs(reproducing_multiplier(xi ** 2, LADDER, OperatorParams()) - 1)) < 0.01


def test_hardy_norm_p1_is_l1_of_area():
    f = wave_packet(BOX, 0.0, 2.0, 3.0)
    ones = ExponentFunction.constant(1.0, BOX)
    assert hardy_norm(f, ones, GAUSSIAN, LADDER) == pytest.approx(
        const_lp_norm(lusin_area(f, GAUSSIAN, LADDER), 1), rel=1e-6)


def test_molecular_round_trip(p_capped):
    f = wave_packet(BOX, 0.5, 2.2, 3.0)
    d = molecular_decompose(f, p_capped, GAUSSIAN, OperatorParams(), LADDER)
    assert d.residual < 0.02 and d.band_limited and not d.experimental
    assert const_lp_norm(d.reconstruct() - f, 2) == pytest.approx(d.residual * const_lp_norm(f, 2))


def test_strict_rejects_unresolved_input(p_capped):
    noise = np.random.default_rng(0).normal(size=BOX.shape)
    from vhardy.grid import GridFunction
    with pytest.raises(ValueError):
        molecular_decompose(GridFunction(BOX, noise), p_capped, strict=True, ladder=LADDER)


def test_molecule_split_moments(p_capped):
    f = wave_packet(BOX, 0.0, 2.0, 3.0)
    mol = molecular_decompose(f, p_capped, GAUSSIAN, ladder=LADDER).molecules[0]
    sp = split_molecule(mol.values, mol.cube)
    assert sp["max_relative_moment"] < 1e-10


def test_haar_atom_is_atom():
    b = Box.interval(-32, 32, 2048)
    p = ExponentFunction.from_preset("0.8 + 0.2*exp(-x**2)", b)
    cube = Cube((0.5,), 1.0)
    atom = haar_atom(cube, b, p)
    assert abs(integrate(atom.values)) < 1e-12
    assert is_classical_atom(atom.values, cube, p, 2.0, 0)
    assert not is_classical_atom(atom.values * 1.5, cube, p, 2.0, 0)


def test_embedding_hypotheses_enforced():
    b = Box.interval(-32, 32, 1024)
    p_low = ExponentFunction.constant(0.4, b)
    atom = haar_atom(Cube((0.5,), 1.0), b, ExponentFunction.constant(0.8, b))
    with pytest.raises(HypothesisViolationError):
        classical_atom_embedding_check(atom, p_low)
    custom = SemigroupSpec("custom", 2.0, "(1+r)**(-3)", 0.5)
    with pytest.raises(HypothesisViolationError):
        classical_atom_embedding_check(atom, ExponentFunction.constant(0.8, b), custom)
