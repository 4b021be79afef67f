"""Seeded random input families shared by the suites and the tests."""
from __future__ import annotations

import numpy as np

from .grid import Box, Cube, GridFunction, HalfSpaceFunction, ScaleLadder


def random_grid_function(rng: np.random.Generator, box: Box, kind: str = "mixed") -> GridFunction:
    """Nontrivial random samples: white noise, a smooth bump or a random step profile."""
    if kind == "mixed":
        kind = rng.choice(["noise", "bump", "steps"])
    if kind == "noise":
        vals = rng.normal(size=box.shape) * rng.uniform(0.1, 10)
    elif kind == "bump":
        c = rng.uniform(-box.length / 4, box.length / 4, box.dim)
        w = rng.uniform(0.05, 0.3) * box.length
        r2 = sum((x - ci) ** 2 for x, ci in zip(box.mesh(), c))
        vals = rng.uniform(0.1, 10) * np.exp(-r2 / (2 * w * w))
    else:
        cuts = np.sort(rng.integers(0, box.points_per_axis, size=6))
        prof = np.zeros(box.points_per_axis)
        for a, b in zip(cuts[::2], cuts[1::2]):
            prof[a:b + 1] = rng.uniform(-5, 5)
        if not np.any(prof):
            prof[box.points_per_axis // 2] = 1.0
        vals = prof if box.dim == 1 else np.outer(prof, np.roll(prof, 3))
        if not np.any(vals):
            vals = np.outer(prof, np.ones(box.points_per_axis))
    return GridFunction(box, vals)


def wave_packet(box: Box, center, width: float, freq: float, phase: float = 0.0,
                amp: float = 1.0) -> GridFunction:
    """``amp exp(-|x-c|^2/(2 w^2)) cos(freq x_1 + phase)``."""
    center = np.broadcast_to(np.asarray(center, dtype=float), (box.dim,))
    r2 = sum((x - c) ** 2 for x, c in zip(box.mesh(), center))
    return GridFunction(box, amp * np.exp(-r2 / (2 * width ** 2))
                        * np.cos(freq * box.mesh()[0] + phase))


def random_packet(rng: np.random.Generator, box: Box, freq_band=(2.5, 4.0),
                  width_band=(2.0, 2.5)) -> GridFunction:
    """Band-limited, essentially mean-free packet near the middle of the box.

    With the default bands the spectrum ``exp(-w^2 (xi - freq)^2 / 2)`` is below
    ``e^-8`` under ``xi = 0.5`` and above ``xi = 6``, the band resolved by the
    default 64-level ladder on a 32-unit box; the mean is below ``e^-12``.
    """
    return wave_packet(box, **packet_params(rng, box, freq_band, width_band))


def packet_params(rng: np.random.Generator, box: Box, freq_band=(2.5, 4.0),
                  width_band=(2.0, 2.5)) -> dict:
    """Keyword arguments of ``wave_packet`` for one random packet (grid independent)."""
    return {"center": rng.uniform(-box.length / 8, box.length / 8, box.dim),
            "width": rng.uniform(*width_band), "freq": rng.uniform(*freq_band),
            "phase": rng.uniform(0, 2 * np.pi), "amp": rng.uniform(0.5, 2)}


def random_halfspace(rng: np.random.Generator, box: Box, ladder: ScaleLadder,
                     bumps: int = 4) -> HalfSpaceFunction:
    """Sum of space-scale Gaussian bumps (Gaussian in ``y`` and in ``log t``)."""
    pts = box.mesh()
    logt = np.log(ladder.t)
    vals = np.zeros(box.shape + (ladder.levels,))
    hi = min(np.log(1.0), logt[-1])
    for _ in range(bumps):
        c = rng.uniform(-box.length / 4, box.length / 4, box.dim)
        s = rng.uniform(0.3, 1.5)
        lt = rng.uniform(np.log(4 * box.h), hi)
        r2 = sum((x - ci) ** 2 for x, ci in zip(pts, c))
        vals += rng.normal() * np.exp(-r2 / (2 * s * s))[..., None] * np.exp(-(logt - lt) ** 2 / 0.5)
    return HalfSpaceFunction(box, ladder, vals)


def random_cubes(rng: np.random.Generator, box: Box, count: int, side_range=(0.25, 4.0)) -> list:
    """Cubes with log-uniform sides and centres such that the cube lies in the inner half."""
    out = []
    lo, hi = np.log2(side_range[0]), np.log2(min(side_range[1], box.length / 4))
    for _ in range(count):
        side = 2.0 ** rng.uniform(lo, hi)
        c = rng.uniform(np.array(box.lower) + box.length / 4 + side / 2,
                        np.array(box.upper) - box.length / 4 - side / 2)
        out.append(Cube(tuple(float(v) for v in c), float(side)))
    return out
