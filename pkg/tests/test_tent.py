import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vhardy.families import random_halfspace
from vhardy.grid import BALL_VOLUME, Box, Cube, HalfSpaceFunction, ScaleLadder, const_lp_norm
from vhardy.tent import (cone_stencil, is_tent_atom, tent_atomic_decompose, tent_C, tent_norm,
                         tent_T)
from vhardy.exponent import ExponentFunction

BOX = Box.interval(-16, 16, 512)
LADDER = ScaleLadder.for_box(BOX, 48)
P = ExponentFunction.from_preset("example-1-capped", BOX)


def test_cone_stencil_counts_cells():
    st_ = cone_stencil(0.1, 1.0, 1)
    # the aperture-one cone at height t covers 2t of the line
    assert np.sum(st_) * 0.1 == pytest.approx(2.0, rel=0.02)


@settings(max_examples=8)
@given(st.integers(0, 2 ** 32 - 1))
def test_fubini_identity(seed):
    g = random_halfspace(np.random.default_rng(seed), BOX, LADDER)
    lhs = const_lp_norm(tent_T(g, extend=True), 2) ** 2
    assert lhs == pytest.approx(BALL_VOLUME[1] * g.l2_dtt() ** 2, rel=1e-10)


def test_tent_norm_homogeneous():
    g = random_halfspace(np.random.default_rng(0), BOX, LADDER)
    assert tent_norm(g * 2.5, P) == pytest.approx(2.5 * tent_norm(g, P), rel=1e-7)


@settings(max_examples=5)
@given(st.integers(0, 2 ** 32 - 1))
def test_decomposition_reconstructs(seed):
    F = random_halfspace(np.random.default_rng(seed), BOX, LADDER)
    d = tent_atomic_decompose(F, P)
    assert (d.reconstruct() - F).l2_dtt() < 1e-6 * F.l2_dtt()
    assert all(is_tent_atom(a.values, a.cube, P) for a in d.atoms[:6])
    assert d.a_value > 0 and math.isfinite(d.a_value)


def test_zero_decomposition():
    d = tent_atomic_decompose(HalfSpaceFunction.zeros(BOX, LADDER), P)
    assert len(d) == 0 and d.a_value == 0


def test_non_atom_rejected():
    F = random_halfspace(np.random.default_rng(9), BOX, LADDER)
    assert not is_tent_atom(F, Cube((0.0,), 0.5), P)


def test_carleson_functional_zero_and_scaling():
    F = random_halfspace(np.random.default_rng(2), BOX, LADDER)
    c1 = tent_C(F, P, 4).values
    c2 = tent_C(F * 3, P, 4).values
    assert np.allclose(c2, 3 * c1)
    assert not np.any(tent_C(HalfSpaceFunction.zeros(BOX, LADDER), P, 4).values)
