import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sint
from scipy.special import gamma as gamma_fn

from vhardy.exponent import ExponentFunction
from vhardy.families import wave_packet
from vhardy.fractional import (FractionalParams, TailError, coefficient_inequality,
                               fractional_apply, fractional_multiplier)
from vhardy.grid import Box, Cube, GridFunction, const_lp_norm

BOX = Box.interval(-16, 16, 1024)


@given(st.floats(0.05, 0.45), st.floats(-2, 2))
def test_multiplier_is_power_law(gamma, log_xi):
    xi2 = np.array([10.0 ** (2 * log_xi)])
    got = fractional_multiplier(xi2, gamma, 1e-6)[0]
    assert got == pytest.approx(xi2[0] ** -gamma, rel=1e-6)


def test_multiplier_against_quadrature_oracle():
    # Gamma(g)^-1 int_0^inf t^(g-1) e^(-t u) dt = u^-g, evaluated independently with quad
    g, u = 0.3, 2.7
    val = sint.quad(lambda t: t ** (g - 1) * math.exp(-t * u), 0, np.inf)[0] / gamma_fn(g)
    assert fractional_multiplier(np.array([u]), g, 1e-4)[0] == pytest.approx(val, rel=1e-8)


def test_periodic_cosine_mode():
    x = BOX.mesh()[0]
    xi = 2 * math.pi * 8 / BOX.length
    out = fractional_apply(GridFunction(BOX, np.cos(xi * x)), FractionalParams(0.2), boundary="periodic")
    assert np.max(np.abs(out.values - xi ** -0.4 * np.cos(xi * x))) < 1e-3 * xi ** -0.4


def test_composition():
    f = wave_packet(BOX, 0.0, 2.0, 2.5)
    two = fractional_apply(fractional_apply(f, FractionalParams(0.05)), FractionalParams(0.07))
    one = fractional_apply(f, FractionalParams(0.12))
    assert const_lp_norm(two - one, 2) < 1e-2 * const_lp_norm(one, 2)


def test_mean_bearing_input_rejected():
    bump = GridFunction(BOX, np.exp(-BOX.mesh()[0] ** 2))
    with pytest.raises(TailError):
        fractional_apply(bump, FractionalParams(0.2))


@pytest.mark.parametrize("gamma", [0.0, 0.5, 0.7])
def test_gamma_range(gamma):
    with pytest.raises(ValueError):
        FractionalParams(gamma)


def test_coefficient_inequality_finite():
    p = ExponentFunction.constant(1.0, BOX)
    rep = coefficient_inequality([1.0, 2.0], [Cube((0.0,), 1.0), Cube((3.0,), 0.5)], p,
                                 FractionalParams(0.125))
    assert 0 < rep["ratio"] < np.inf
