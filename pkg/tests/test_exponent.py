import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vhardy.exponent import (PRESETS, ExponentFunction, ExponentOverflowError, InvalidExponentError,
                             lower_index_s0, sobolev_conjugate, verify_log_holder)
from vhardy.grid import Box


def test_presets_bounds(box):
    p1 = ExponentFunction.from_preset("example-1", box)
    assert p1.p_minus == pytest.approx(0.5, abs=1e-3)
    assert p1.p_plus <= 1.2 + 1e-12
    pc = ExponentFunction.from_preset("example-1-capped", box)
    assert pc.p_plus <= 1.0
    for name in PRESETS:
        assert ExponentFunction.from_preset(name, box).p_minus > 0


def test_example_values_at_points(box):
    p = ExponentFunction.from_preset("example-1", box)
    # near the origin the middle piece min(6/5, max(1/2, 3/2 - x^2)) is 6/5
    assert p.at_points(np.array([[0.0]]))[0] == pytest.approx(1.2)
    # far out the first piece 1 - e^(3 - |x|) tends to 1
    assert p.at_points(np.array([[30.0]]))[0] == pytest.approx(1 - math.exp(-27))


def test_const_and_expr(box):
    assert ExponentFunction.from_preset("const:1.5", box).is_constant
    p = ExponentFunction.from_preset("expr:1 + 0.5*exp(-x**2)", box)
    assert p.p_plus == pytest.approx(1.5, abs=1e-3)


@pytest.mark.parametrize("spec", ["const:-1", "x - 100", "__import__('os')"])
def test_invalid_exponents(box, spec):
    with pytest.raises((InvalidExponentError, ValueError)):
        ExponentFunction.from_preset(spec, box)


def test_log_holder_accepts_presets(box):
    for name in ("example-1", "example-2"):
        assert verify_log_holder(ExponentFunction.from_preset(name, box), budget=1000).passed


def test_log_holder_constant_exponent(box):
    rep = verify_log_holder(ExponentFunction.constant(0.9, box), budget=1000)
    assert rep.passed and rep.c_local == 0 and rep.c_infinity == 0


def test_log_holder_rejects_oscillation_at_infinity(box):
    # |p(x_k) - p_inf| log(e + |x_k|) grows along x_k = pi/2 + 2 pi k
    rep = verify_log_holder(ExponentFunction.from_preset("expr:0.75 + sin(x)/8", box), budget=2000)
    assert not rep.passed
    assert rep.c_infinity > 1.0


def test_sobolev_conjugate_stays_log_holder(box):
    q = sobolev_conjugate(ExponentFunction.from_preset("example-1", box), 0.1, 2.0, 1)
    assert verify_log_holder(q, budget=1000).passed


@given(st.floats(0.55, 1.5), st.floats(0.01, 0.2))
def test_sobolev_conjugate_identity(p0, gamma):
    b = Box.interval(-2, 2, 64)
    p = ExponentFunction.constant(p0, b)
    if 1 / p0 - 2 * gamma <= 0:
        with pytest.raises(ExponentOverflowError):
            sobolev_conjugate(p, gamma, 2.0, 1)
        return
    q = sobolev_conjugate(p, gamma, 2.0, 1)
    assert 1 / q.p_minus == pytest.approx(1 / p0 - 2 * gamma)


def test_lower_index(box):
    assert lower_index_s0(ExponentFunction.constant(1.0, box), 1, 2.0) == 0
    assert lower_index_s0(ExponentFunction.constant(0.2, box), 1, 2.0) == 2
