import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vhardy.exponent import ExponentFunction
from vhardy.families import random_halfspace, wave_packet
from vhardy.grid import Box, GridFunction, HalfSpaceFunction, ScaleLadder
from vhardy.hardy import molecular_decompose
from vhardy.io import (MAGIC, FormatError, from_bytes, from_csv, read_any, read_decomposition,
                       reconstruct_bundle, to_bytes, to_csv, write_decomposition, write_grid)
from vhardy.tent import tent_atomic_decompose


@given(st.integers(0, 2 ** 32 - 1), st.booleans(), st.sampled_from([1, 2]))
def test_binary_round_trip(seed, cplx, dim):
    rng = np.random.default_rng(seed)
    b = Box(dim, (-1.5,) * dim, (2.5,) * dim, 16)
    v = rng.normal(size=b.shape) + (1j * rng.normal(size=b.shape) if cplx else 0)
    f = GridFunction(b, v)
    g = from_bytes(to_bytes(f))
    assert g.box == b and np.array_equal(g.values, f.values) and g.values.dtype == f.values.dtype


def test_header_layout():
    b = Box.interval(0.0, 1.0, 8)
    data = to_bytes(GridFunction(b, np.arange(8.0)))
    assert data[:4] == MAGIC
    assert len(data) == 4 + 8 + 16 + 8 * 8
    assert np.array_equal(np.frombuffer(data[-64:], "<f8"), np.arange(8.0))


def test_halfspace_round_trip():
    b = Box.interval(-4, 4, 32)
    lad = ScaleLadder.for_box(b, 12)
    F = random_halfspace(np.random.default_rng(0), b, lad)
    G = from_bytes(to_bytes(F))
    assert isinstance(G, HalfSpaceFunction) and G.ladder == lad and np.array_equal(G.values, F.values)


def test_csv_round_trip_exact():
    b = Box.interval(-1, 1, 16)
    f = GridFunction(b, np.random.default_rng(1).normal(size=16))
    assert np.array_equal(from_csv(to_csv(f)).values, f.values)


@pytest.mark.parametrize("payload", [b"XXXX" + bytes(40), MAGIC + bytes(3)])
def test_malformed_binary(tmp_path, payload):
    with pytest.raises(FormatError):
        from_bytes(payload)
    path = tmp_path / "bad.bin"
    path.write_bytes(payload)
    with pytest.raises(FormatError):
        read_any(path)


def test_tent_bundle_round_trip(tmp_path):
    b = Box.interval(-8, 8, 128)
    lad = ScaleLadder.for_box(b, 24)
    F = random_halfspace(np.random.default_rng(2), b, lad)
    p = ExponentFunction.constant(1.0, b)
    d = tent_atomic_decompose(F, p)
    write_decomposition(tmp_path / "d.json", d, "const:1")
    bundle = read_decomposition(tmp_path / "d.json")
    assert bundle["kind"] == "tent" and bundle["exponent"] == "const:1"
    assert np.allclose(reconstruct_bundle(bundle).values, d.reconstruct().values, rtol=0, atol=1e-14)


def test_molecular_bundle_round_trip(tmp_path):
    b = Box.interval(-16, 16, 512)
    f = wave_packet(b, 0.0, 2.0, 3.0)
    d = molecular_decompose(f, ExponentFunction.constant(1.0, b), ladder=ScaleLadder.for_box(b, 48))
    write_decomposition(tmp_path / "m.json", d)
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["kind"] == "molecular" and doc["terms"] == len(d.molecules)
    rec = reconstruct_bundle(read_decomposition(tmp_path / "m.json"))
    assert np.allclose(rec.values, d.reconstruct().values, rtol=0, atol=1e-13)


def test_write_read_grid(tmp_path):
    b = Box.square(0, 1, 8)
    f = GridFunction(b, np.arange(64.0).reshape(8, 8))
    write_grid(tmp_path / "f.bin", f)
    assert np.array_equal(read_any(tmp_path / "f.bin").values, f.values)
