#!/usr/bin/env python3
"""Slow-fast geometry: fold curve, folded node, and bifurcation values.

Walks the fold curve, locates the folded node and its eigenvalue ratio,
counts the implied secondary canards, and pins the two organizing values
of the bifurcation diagram in h.
"""

import numpy as np

from mmopp import slowfast
from mmopp.model import baseline_params

p = baseline_params(h=2.3)
fc = slowfast.fold_curve(p)
print(f"fold curve domain: s in [{fc.a}, {fc.b}]")
for s in np.linspace(fc.a, fc.b, 6):
    pt = slowfast.fold_curve_point(fc, s)
    u, ux = slowfast.manifold_residual(p, pt)
    print(f"  s = {s:.3f}: point ({pt[0]:.4f}, {pt[1]:.4f}, {pt[2]:.4f}), "
          f"|u| = {abs(u):.1e}, |u_x| = {abs(ux):.1e}")

fs = slowfast.find_folded_singularity(p, 0.5 * (fc.a + fc.b))
k = slowfast.secondary_canard_count(fs.mu)
print(f"\nfolded {fs.kind} at ({fs.point[0]:.6f}, {fs.point[1]:.6f}, {fs.point[2]:.6f})")
print(f"eigenvalues: strong {np.real(fs.lambda_s):.6f}, weak {np.real(fs.lambda_w):.6f}")
print(f"mu = {fs.mu:.6f}  ->  {k} secondary canards")

h_hopf = slowfast.scan_hopf(p, 2.5, 2.8)
h_fsn = slowfast.scan_fsn2(p, 2.6, 2.8, step=1e-2)
print(f"\nHopf of the full system: h = {h_hopf:.5f}")
print(f"FSN II of the reduced system: h = {h_fsn:.5f}")
