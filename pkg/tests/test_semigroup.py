import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vhardy.families import random_packet
from vhardy.grid import Box, GridFunction, const_lp_norm, integrate
from vhardy.semigroup import (GAUSSIAN, KernelBoundError, OperatorParams, SemigroupSpec, apply_Pst,
                              apply_Qst, heat_apply, p_kernel, p_multiplier, q_kernel, q_multiplier,
                              verify_kernel_decay)

BOX = Box.interval(-16, 16, 1024)
X = BOX.mesh()[0]
INNER = np.abs(X) < 6


@given(st.floats(0.3, 4.0), st.floats(0.05, 1.0))
def test_heat_multiplier_on_cosines(xi, t):
    out = heat_apply(GridFunction(BOX, np.cos(xi * X)), t)
    ref = math.exp(-t * xi ** 2) * np.cos(xi * X)
    assert np.max(np.abs(out.values - ref)[INNER]) < 1e-8


@pytest.mark.parametrize("s", [0, 1, 2])
def test_q_and_p_multipliers(s):
    xi, t = 1.5, 0.4
    u = t * xi ** 2
    f = GridFunction(BOX, np.cos(xi * X))
    q = apply_Qst(f, t, s).values
    p = apply_Pst(f, t, s).values
    assert np.max(np.abs(q - q_multiplier(u, s) * np.cos(xi * X))[INNER]) < 1e-6
    assert np.max(np.abs(p - p_multiplier(u, s) * np.cos(xi * X))[INNER]) < 1e-6


def test_closed_form_multipliers():
    u = np.linspace(0, 5, 11)
    assert np.allclose(q_multiplier(u, 0), u * np.exp(-u))
    assert np.allclose(p_multiplier(u, 1), 1 - (1 - np.exp(-u)) ** 2)


@pytest.mark.parametrize("s", [0, 1])
def test_kernels_match_fourier_side(s):
    """The closed-form kernels integrate against cos(xi x) to the multipliers."""
    t, xi = 0.3, 2.0
    x = np.linspace(-20, 20, 40001)
    dx = x[1] - x[0]
    qk = np.sum(q_kernel(x, t, s) * np.cos(xi * x)) * dx
    pk = np.sum(p_kernel(x, t, s) * np.cos(xi * x)) * dx
    assert qk == pytest.approx(q_multiplier(t * xi ** 2, s), abs=1e-10)
    assert pk == pytest.approx(p_multiplier(t * xi ** 2, s), abs=1e-10)


def test_semigroup_law_and_self_adjoint():
    rng = np.random.default_rng(3)
    f, g = random_packet(rng, BOX), random_packet(rng, BOX)
    two = heat_apply(heat_apply(f, 0.25), 0.5)
    assert const_lp_norm(two - heat_apply(f, 0.75), 2) < 1e-9 * const_lp_norm(f, 2)
    lhs, rhs = integrate(heat_apply(f, 0.5) * g), integrate(f * heat_apply(g, 0.5))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_contraction():
    f = random_packet(np.random.default_rng(4), BOX)
    for t in (0.01, 0.1, 1.0, 10.0):
        assert const_lp_norm(heat_apply(f, t), 2) <= const_lp_norm(f, 2) * (1 + 1e-12)


def test_kernel_decay_gaussian_passes():
    rep = verify_kernel_decay(GAUSSIAN, 1)
    assert rep.passed and rep.witness is None


def test_kernel_decay_custom():
    good = SemigroupSpec("custom", 2.0, "(1+r)**(-(n+0.5))", 0.4)
    bad = SemigroupSpec("custom", 2.0, "(1+r)**(-(n+0.5))", 0.6)
    assert verify_kernel_decay(good, 1).passed
    rep = verify_kernel_decay(bad, 1)
    assert not rep.passed and rep.witness is not None
    with pytest.raises(KernelBoundError) as exc:
        verify_kernel_decay(bad, 1, raise_on_failure=True)
    assert exc.value.report.witness == rep.witness


def test_spec_validation():
    with pytest.raises(ValueError):
        SemigroupSpec("gaussian", 1.0)
    with pytest.raises(ValueError):
        SemigroupSpec("custom", 2.0)
    assert SemigroupSpec.from_dict(GAUSSIAN.to_dict()) == GAUSSIAN


def test_operator_params_order():
    with pytest.raises(ValueError):
        OperatorParams(0, 1)
