"""File formats: grid functions (binary, CSV) and decomposition bundles (JSON + npz).

Binary grid file, all fields little-endian::

    offset  size        field
    0       4           magic b"VHGF"
    4       2           uint16 format version (1)
    6       1           uint8  dim (1 or 2)
    7       1           uint8  flags: bit 0 complex values, bit 1 ladder present
    8       4           uint32 N, points per axis
    12      8*dim       float64 lower corner
    ..      8*dim       float64 upper corner
    if ladder:
    ..      8           float64 t_min
    ..      8           float64 t_max
    ..      4           uint32  levels
    ..      rest        values, row-major over (axis 0, [axis 1], [level]);
                        float64, or complex128 stored as (re, im) pairs

A file with a ladder holds a half-space function (one value per node and
level); without, a grid function.  Values are written verbatim, so the round
trip is bit-exact.

CSV grid file: ``#``-prefixed header lines ``key=value`` for ``dim``,
``points_per_axis``, ``lower``, ``upper`` (comma-free, space separated) and
optionally ``ladder``; then one row per node in row-major order with the node
coordinates followed by ``re`` (and ``im`` for complex data).  Numbers use
Python's shortest round-trip repr, so reading back reproduces every bit too.
"""
from __future__ import annotations

import io as _io
import json
import struct
from pathlib import Path

import numpy as np

from .grid import Box, Cube, GridFunction, HalfSpaceFunction, ScaleLadder

MAGIC = b"VHGF"
VERSION = 1
FLAG_COMPLEX = 1
FLAG_LADDER = 2


class FormatError(ValueError):
    """Malformed or unsupported grid file."""


# ---------------------------------------------------------------------------
# binary


def to_bytes(obj: GridFunction | HalfSpaceFunction) -> bytes:
    box = obj.box
    ladder = getattr(obj, "ladder", None)
    vals = np.asarray(obj.values)
    cplx = np.iscomplexobj(vals)
    flags = (FLAG_COMPLEX if cplx else 0) | (FLAG_LADDER if ladder is not None else 0)
    head = MAGIC + struct.pack("<HBBI", VERSION, box.dim, flags, box.points_per_axis)
    head += struct.pack(f"<{box.dim}d", *box.lower) + struct.pack(f"<{box.dim}d", *box.upper)
    if ladder is not None:
        head += struct.pack("<ddI", ladder.t_min, ladder.t_max, ladder.levels)
    body = np.ascontiguousarray(vals, dtype="<c16" if cplx else "<f8").tobytes()
    return head + body


def from_bytes(data: bytes) -> GridFunction | HalfSpaceFunction:
    if len(data) < 12 or data[:4] != MAGIC:
        raise FormatError("not a grid file (bad magic)")
    version, dim, flags, n = struct.unpack_from("<HBBI", data, 4)
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    if dim not in (1, 2):
        raise FormatError(f"unsupported dimension {dim}")
    off = 12
    try:
        lower = struct.unpack_from(f"<{dim}d", data, off)
        upper = struct.unpack_from(f"<{dim}d", data, off + 8 * dim)
        off += 16 * dim
        ladder = None
        if flags & FLAG_LADDER:
            t_min, t_max, levels = struct.unpack_from("<ddI", data, off)
            off += 20
            ladder = ScaleLadder(t_min, t_max, levels)
    except struct.error as exc:
        raise FormatError(f"truncated header: {exc}") from None
    box = Box(dim, lower, upper, n)
    shape = box.shape + ((ladder.levels,) if ladder is not None else ())
    dtype = np.dtype("<c16" if flags & FLAG_COMPLEX else "<f8")
    count = int(np.prod(shape))
    if len(data) - off != count * dtype.itemsize:
        raise FormatError(f"expected {count} values, found {(len(data) - off) / dtype.itemsize:g}")
    vals = np.frombuffer(data, dtype=dtype, offset=off).reshape(shape)
    vals = vals.astype(complex if flags & FLAG_COMPLEX else float)
    if ladder is not None:
        return HalfSpaceFunction(box, ladder, vals)
    return GridFunction(box, vals)


def write_grid(path, obj: GridFunction | HalfSpaceFunction):
    Path(path).write_bytes(to_bytes(obj))


def read_grid(path) -> GridFunction | HalfSpaceFunction:
    return from_bytes(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# CSV


def to_csv(f: GridFunction) -> str:
    box = f.box
    out = _io.StringIO()
    out.write(f"# dim={box.dim}\n# points_per_axis={box.points_per_axis}\n")
    out.write("# lower=" + " ".join(repr(float(v)) for v in box.lower) + "\n")
    out.write("# upper=" + " ".join(repr(float(v)) for v in box.upper) + "\n")
    cplx = np.iscomplexobj(f.values)
    axes = ["x", "y"][:box.dim]
    out.write(",".join(axes + (["re", "im"] if cplx else ["re"])) + "\n")
    coords = [c.ravel() for c in box.mesh()]
    vals = f.values.ravel()
    for i in range(vals.size):
        row = [repr(float(c[i])) for c in coords]
        row.append(repr(float(vals[i].real)))
        if cplx:
            row.append(repr(float(vals[i].imag)))
        out.write(",".join(row) + "\n")
    return out.getvalue()


def from_csv(text: str) -> GridFunction:
    meta, rows = {}, []
    header = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
        elif header is None:
            header = line.strip().split(",")
        else:
            rows.append(line.split(","))
    try:
        dim = int(meta["dim"])
        n = int(meta["points_per_axis"])
        lower = tuple(float(v) for v in meta["lower"].split())
        upper = tuple(float(v) for v in meta["upper"].split())
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad CSV header: {exc}") from None
    box = Box(dim, lower, upper, n)
    if header is None or len(rows) != box.size:
        raise FormatError(f"expected {box.size} rows, found {len(rows)}")
    cplx = "im" in header
    re_col = header.index("re")
    vals = np.array([float(r[re_col]) for r in rows])
    if cplx:
        vals = vals + 1j * np.array([float(r[header.index("im")]) for r in rows])
    return GridFunction(box, vals.reshape(box.shape))


def write_csv(path, f: GridFunction):
    Path(path).write_text(to_csv(f))


def read_csv(path) -> GridFunction:
    return from_csv(Path(path).read_text())


def read_any(path) -> GridFunction | HalfSpaceFunction:
    """Binary or CSV by content (binary files start with the magic)."""
    data = Path(path).read_bytes()
    if data[:4] == MAGIC:
        return from_bytes(data)
    try:
        return from_csv(data.decode())
    except UnicodeDecodeError:
        raise FormatError(f"{path}: neither a binary grid file nor CSV") from None


# ---------------------------------------------------------------------------
# decomposition bundles


def _box_dict(box: Box) -> dict:
    return {"dim": box.dim, "lower": list(box.lower), "upper": list(box.upper),
            "points_per_axis": box.points_per_axis}


def _ladder_dict(ladder: ScaleLadder) -> dict:
    return {"t_min": ladder.t_min, "t_max": ladder.t_max, "levels": ladder.levels}


def _cube_dict(c: Cube) -> dict:
    return {"center": [float(v) for v in c.center], "side": float(c.side)}


def _lambdas_json(lams) -> list:
    lams = np.asarray(lams)
    if np.iscomplexobj(lams):
        return [[float(v.real), float(v.imag)] for v in lams]
    return [float(v) for v in lams]


def _lambdas_from(items) -> np.ndarray:
    if items and isinstance(items[0], list):
        return np.array([complex(a, b) for a, b in items])
    return np.asarray(items, dtype=float)


def write_decomposition(path, dec, exponent: str | None = None) -> Path:
    """Write a tent or molecular decomposition as ``path`` (JSON) plus an ``.npz`` sidecar.

    Molecular bundles store each molecule's grid values (``molecule_<j>``);
    tent bundles store each atom's block and its start node (``block_<j>``,
    ``start_<j>``).  The JSON references the sidecar by file name.
    """
    path = Path(path)
    sidecar = path.with_suffix(".npz")
    arrays = {}
    if hasattr(dec, "molecules"):
        kind = "molecular"
        box, ladder = dec.tent.box, dec.tent.ladder
        for j, m in enumerate(dec.molecules):
            arrays[f"molecule_{j}"] = m.values.values
        extra = {"b_value": dec.b_value, "residual": dec.residual,
                 "band_limited": dec.band_limited, "experimental": dec.experimental,
                 "a_value": dec.tent.a_value}
    else:
        kind = "tent"
        box, ladder = dec.box, dec.ladder
        for j, a in enumerate(dec.atoms):
            arrays[f"block_{j}"] = a.block
            arrays[f"start_{j}"] = np.asarray(a.start, dtype=np.int64)
        extra = {"a_value": dec.a_value, "level_window": list(dec.window),
                 "coarse_terms": dec.coarse_count}
    doc = {"format": "vhardy-decomposition", "version": 1, "kind": kind,
           "box": _box_dict(box), "ladder": _ladder_dict(ladder), "exponent": exponent,
           "terms": len(dec.cubes), "lambdas": _lambdas_json(dec.lambdas),
           "cubes": [_cube_dict(c) for c in dec.cubes], "sidecar": sidecar.name, **extra}
    np.savez_compressed(sidecar, **arrays)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True))
    return path


def read_decomposition(path) -> dict:
    """Load a bundle: the JSON fields plus ``box``, ``ladder``, ``cubes``, ``lambdas`` and ``terms``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not JSON ({exc})") from None
    if doc.get("format") != "vhardy-decomposition":
        raise FormatError(f"{path}: not a decomposition bundle")
    box = Box(doc["box"]["dim"], tuple(doc["box"]["lower"]), tuple(doc["box"]["upper"]),
              doc["box"]["points_per_axis"])
    ladder = ScaleLadder(**doc["ladder"])
    cubes = [Cube(tuple(c["center"]), c["side"]) for c in doc["cubes"]]
    lambdas = _lambdas_from(doc["lambdas"])
    with np.load(path.parent / doc["sidecar"]) as npz:
        if doc["kind"] == "molecular":
            terms = [npz[f"molecule_{j}"] for j in range(len(cubes))]
        else:
            terms = [(tuple(int(v) for v in npz[f"start_{j}"]), npz[f"block_{j}"])
                     for j in range(len(cubes))]
    return {**doc, "box": box, "ladder": ladder, "cubes": cubes, "lambdas": lambdas,
            "term_values": terms}


def reconstruct_bundle(bundle: dict) -> GridFunction | HalfSpaceFunction:
    """``sum lambda_j term_j`` for a bundle returned by ``read_decomposition``."""
    box, ladder = bundle["box"], bundle["ladder"]
    lams = bundle["lambdas"]
    cplx = np.iscomplexobj(lams)
    if bundle["kind"] == "molecular":
        acc = np.zeros(box.shape, dtype=complex if cplx else float)
        for lam, v in zip(lams, bundle["term_values"]):
            acc = acc + lam * v
        return GridFunction(box, acc)
    acc = np.zeros(box.shape + (ladder.levels,), dtype=complex)
    for lam, (start, block) in zip(lams, bundle["term_values"]):
        sl = tuple(slice(s, s + w) for s, w in zip(start, block.shape[:-1]))
        acc[sl + (slice(0, block.shape[-1]),)] += lam * block
    if not cplx and not np.any(acc.imag):
        acc = acc.real
    return HalfSpaceFunction(box, ladder, acc)
