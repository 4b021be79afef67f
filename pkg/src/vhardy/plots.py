"""Optional figures for suite runs (never part of pass/fail)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .families import wave_packet
from .hardy import lusin_area, molecular_decompose
from .semigroup import GAUSSIAN


def write_plots(ctx, outdir: Path) -> list:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    box = ctx.box
    f = wave_packet(box, 0.0, 2.0, 2.5)
    s = lusin_area(f, GAUSSIAN, ctx.ladder)
    written = []

    fig, ax = plt.subplots(figsize=(6, 3.5))
    if box.dim == 1:
        x = box.axis()
        ax.plot(x, f.values, lw=0.8, label="f")
        ax.plot(x, s.values, lw=1.2, label="area function")
        ax.legend()
        ax.set_xlabel("x")
    else:
        im = ax.imshow(s.values.T, origin="lower", extent=[box.lower[0], box.upper[0],
                                                          box.lower[1], box.upper[1]])
        fig.colorbar(im, ax=ax)
    path = outdir / "area_function.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    dec = molecular_decompose(f, ctx.p, GAUSSIAN, ladder=ctx.ladder)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    lam = np.abs(dec.lambdas)
    ax.hist(np.log10(lam[lam > 0]), bins=30)
    ax.set_xlabel("log10 |lambda_j|")
    ax.set_ylabel("count")
    path = outdir / "coefficients.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
