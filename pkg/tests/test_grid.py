import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vhardy.grid import (Box, Cube, GridFunction, HalfSpaceFunction, ScaleLadder, apply_kernel,
                         const_lp_norm, dyadic_family, heat_kernel, integrate)


def test_box_geometry():
    b = Box.interval(-1.0, 3.0, 8)
    assert b.h == 0.5
    assert np.allclose(b.axis(), [-0.75, -0.25, 0.25, 0.75, 1.25, 1.75, 2.25, 2.75])
    sq = Box.square(0.0, 1.0, 16)
    assert sq.shape == (16, 16) and math.isclose(sq.cell_volume, 1 / 256)


@pytest.mark.parametrize("kwargs", [dict(lower=0, upper=0, n=8), dict(lower=0, upper=1, n=4)])
def test_box_rejects_bad_input(kwargs):
    with pytest.raises(ValueError):
        Box.interval(kwargs["lower"], kwargs["upper"], kwargs["n"])


def test_grid_function_rejects_nonfinite():
    b = Box.interval(0, 1, 8)
    with pytest.raises(ValueError):
        GridFunction(b, np.full(8, np.nan))
    with pytest.raises(ValueError):
        GridFunction(b, np.zeros(9))


def test_grid_function_is_immutable():
    b = Box.interval(0, 1, 8)
    f = GridFunction(b, np.ones(8))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_cube_indicator_volume_exact_on_aligned_cube():
    b = Box.interval(-4, 4, 64)
    q = Cube((0.5,), 1.0)
    assert math.isclose(integrate(q.indicator(b)), 1.0)


@given(st.floats(-3, 3), st.floats(0.2, 2.0))
def test_cube_indicator_volume(c, side):
    b = Box.interval(-4, 4, 512)
    q = Cube((c,), side)
    assert abs(integrate(q.indicator(b)) - side) <= 2 * b.h


def test_dyadic_family_counts():
    b = Box.interval(0.0, 8.0, 64)
    fam = dyadic_family(b, 3)
    assert len(fam) == 1 + 2 + 4 + 8
    assert {c.side for c in fam} == {8.0, 4.0, 2.0, 1.0}


def test_const_lp_norm_matches_closed_form():
    b = Box.interval(-1, 1, 1024)
    one = GridFunction(b, np.ones(b.shape))
    assert math.isclose(const_lp_norm(one, 2), math.sqrt(2))
    assert math.isclose(const_lp_norm(one, 0.5), 4.0)


def test_heat_kernel_mass_and_shape():
    b = Box.interval(-20, 20, 2048)
    x2 = b.mesh()[0] ** 2
    k = heat_kernel(x2, 1.0, 1)
    assert abs(np.sum(k) * b.h - 1) < 1e-10
    assert math.isclose(k[np.argmin(x2)], 1 / math.sqrt(4 * math.pi), rel_tol=1e-4)


def test_apply_kernel_preserves_constants_in_interior():
    b = Box.interval(-16, 16, 512)
    one = GridFunction(b, np.ones(b.shape))
    out = apply_kernel(one, "gaussian", 0.5)
    inner = np.abs(b.mesh()[0]) < 8
    assert np.max(np.abs(out.values[inner] - 1)) < 1e-9


def test_halfspace_arithmetic_and_norm():
    b = Box.interval(-4, 4, 64)
    lad = ScaleLadder.for_box(b, 16)
    v = np.ones(b.shape + (16,))
    F = HalfSpaceFunction(b, lad, v)
    assert math.isclose((F * 2).l2_dtt(), 2 * F.l2_dtt())
    assert (F - F).is_zero()
