#!/usr/bin/env python3
"""Render the simulation toolkit's CSV outputs into figures.

Standalone: consumes only the documented CSV schemas produced by the
``mmopp`` command line (trajectory, histogram, return-map, fold-sweep
files) and writes one raster image per invocation.

    python render.py timeseries --input traj.csv --out fig.png
    python render.py histogram  --input hist.csv --out fig.png
    python render.py returnmap  --input map.csv  --out fig.png
    python render.py manifold3d --input traj.csv --out fig.png
    python render.py chi        --input sweep.csv --out fig.png
    python render.py prefactors --input sweep.csv --out fig.png

Exit codes: 0 success, 1 runtime failure, 2 schema/usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

sys.path.insert(0, str(Path(__file__).resolve().parent))
from figspec import KINDS, FigureSpec, SchemaError, read_csv_columns  # noqa: E402


@dataclass(frozen=True)
class RenderResult:
    path: Path
    n_points: int


def _finish(fig, ax, spec: FigureSpec, n_points: int) -> RenderResult:
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    fig.savefig(spec.output, dpi=130)
    plt.close(fig)
    return RenderResult(path=Path(spec.output), n_points=n_points)


def render_timeseries(spec: FigureSpec) -> RenderResult:
    cols = read_csv_columns(spec.inputs[0], ("t", "x", "y", "z"))
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(cols["t"], cols["x"], lw=0.6, color="tab:blue")
    ax.set_xlabel("slow time s")
    ax.set_ylabel("prey density x")
    return _finish(fig, ax, spec, len(cols["t"]))


def render_histogram(spec: FigureSpec) -> RenderResult:
    cols = read_csv_columns(spec.inputs[0], ("N", "count"))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(cols["N"], cols["count"], width=0.85, color="tab:gray", edgecolor="black")
    ax.set_xlabel("SAOs between spikes N")
    ax.set_ylabel("frequency")
    return _finish(fig, ax, spec, len(cols["N"]))


def render_returnmap(spec: FigureSpec) -> RenderResult:
    cols = read_csv_columns(spec.inputs[0], ("z0", "y1", "z1", "return_time", "status"))
    ok = [i for i, s in enumerate(cols["status"]) if s == "ok"]
    z0 = np.array([cols["z0"][i] for i in ok], dtype=float)
    z1 = np.array([cols["z1"][i] for i in ok], dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 4))
    ax.plot(z0, z1, ".", ms=2.5, color="tab:blue")
    lo = min(z0.min(), z1.min()) if len(z0) else 0.0
    hi = max(z0.max(), z1.max()) if len(z0) else 1.0
    ax.plot([lo, hi], [lo, hi], lw=0.7, color="gray", ls="--")
    ax.set_xlabel("initial z")
    ax.set_ylabel("first-return z")
    return _finish(fig, ax, spec, len(z0))


def render_manifold3d(spec: FigureSpec) -> RenderResult:
    """Sample path against the critical-manifold sheet y = (b1+x)(1-x-z/(b2+x))."""
    cols = read_csv_columns(spec.inputs[0], ("t", "x", "y", "z"))
    b1 = float(spec.options.get("beta1", 0.5))
    b2 = float(spec.options.get("beta2", 0.25))
    x = np.linspace(1e-3, 0.95, 60)
    z = np.linspace(0.0, max(cols["z"]) * 1.2 + 1e-3, 60)
    X, Z = np.meshgrid(x, z)
    Y = (b1 + X) * (1.0 - X - Z / (b2 + X))
    Y = np.where(Y >= 0.0, Y, np.nan)
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(X, Z, Y, alpha=0.35, color="tab:green", linewidth=0)
    ax.plot(cols["x"], cols["z"], cols["y"], lw=0.5, color="tab:blue")
    ax.set_xlabel("x")
    ax.set_ylabel("z")
    ax.set_zlabel("y")
    fig.savefig(spec.output, dpi=130)
    plt.close(fig)
    return RenderResult(path=Path(spec.output), n_points=len(cols["t"]))


def render_chi(spec: FigureSpec) -> RenderResult:
    cols = read_csv_columns(spec.inputs[0], ("h", "mu", "chi0"))
    ks = sorted(int(c[3:]) for c in cols if c.startswith("chi"))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for k in ks:
        ax.plot(cols["h"], cols[f"chi{k}"], label=f"k = {k}")
    ax.set_xlabel("h")
    ax.set_ylabel("critical noise level")
    ax.legend(fontsize=8)
    return _finish(fig, ax, spec, len(cols["h"]) * len(ks))


def render_prefactors(spec: FigureSpec) -> RenderResult:
    cols = read_csv_columns(spec.inputs[0], ("h", "sF1", "sF2", "sF3"))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for i, color in zip((1, 2, 3), ("tab:blue", "tab:orange", "tab:green")):
        ax.semilogy(cols["h"], cols[f"sF{i}"], color=color, label=f"species {i}")
    ax.set_xlabel("h")
    ax.set_ylabel("noise prefactor at the folded node")
    ax.legend(fontsize=8)
    return _finish(fig, ax, spec, 3 * len(cols["h"]))


_RENDERERS = {
    "timeseries": render_timeseries,
    "histogram": render_histogram,
    "returnmap": render_returnmap,
    "manifold3d": render_manifold3d,
    "chi": render_chi,
    "prefactors": render_prefactors,
}


def render(spec: FigureSpec) -> RenderResult:
    return _RENDERERS[spec.kind](spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--input", required=True, action="append",
                        help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--title", default="")
    parser.add_argument("--beta1", type=float, default=0.5,
                        help="manifold3d: semi-saturation of predator y")
    parser.add_argument("--beta2", type=float, default=0.25,
                        help="manifold3d: semi-saturation of predator z")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(kind=args.kind, inputs=tuple(args.input), output=args.out,
                          title=args.title,
                          options={"beta1": args.beta1, "beta2": args.beta2})
        result = render(spec)
    except SchemaError as exc:
        print(f"render {args.kind}: schema error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"render {args.kind}: error: {exc}", file=sys.stderr)
        return 1
    print(f"{result.path} ({result.n_points} points)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
