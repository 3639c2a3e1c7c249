"""Slow-fast geometry: critical manifold, fold curve, folded singularities.

The critical manifold sheet S is {u = 0} with u the prey nullcline value;
the fold curve F+ is {u = 0, u_x = 0} and carries an exact rational
parametrization s -> (s, phi(s), psi(s)).  Folded singularities are the
equilibria of the desingularized slow flow restricted to S.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConvergenceError
from .model import ModelParams, coexistence_equilibrium, jacobian, validate_state

SingularityKind = Literal["node", "focus", "saddle", "degenerate"]

# classification tolerances: eigenvalues count as real when
# |Im| < REAL_TOL * |lambda|, degenerate when |lambda_w| < DEGENERATE_TOL
REAL_TOL = 1e-10
DEGENERATE_TOL = 1e-8


def manifold_residual(p: ModelParams, state) -> tuple[float, float]:
    """(u, u_x) at the given state; both vanish exactly on the fold curve."""
    x, y, z = validate_state(state)
    p1, p2 = p.beta1 + x, p.beta2 + x
    u = 1.0 - x - y / p1 - z / p2
    ux = -1.0 + y / p1**2 + z / p2**2
    return u, ux


def graph_y(p: ModelParams, x: float, z: float) -> float:
    """y on the sheet S solved from u = 0: y = (b1+x)(1 - x - z/(b2+x))."""
    return (p.beta1 + x) * (1.0 - x - z / (p.beta2 + x))


@dataclass(frozen=True)
class FoldCurve:
    """Parametrized fold curve s -> (s, phi(s), psi(s)) on [a, b]."""

    params: ModelParams
    a: float
    b: float

    def phi(self, s):
        p = self.params
        return (p.beta1 + s) ** 2 * (1.0 - p.beta2 - 2.0 * s) / (p.beta1 - p.beta2)

    def psi(self, s):
        p = self.params
        return (p.beta2 + s) ** 2 * (2.0 * s + p.beta1 - 1.0) / (p.beta1 - p.beta2)


def fold_curve(p: ModelParams) -> FoldCurve:
    a = (1.0 - max(p.beta1, p.beta2)) / 2.0
    b = (1.0 - min(p.beta1, p.beta2)) / 2.0
    return FoldCurve(params=p, a=a, b=b)


def fold_curve_point(fc: FoldCurve, s: float) -> np.ndarray:
    """State (s, phi(s), psi(s)) on F+; s must lie in [a, b]."""
    if not fc.a <= s <= fc.b:
        raise ValueError(f"s = {s} outside fold-curve domain [{fc.a}, {fc.b}]")
    return np.array([s, fc.phi(s), fc.psi(s)])


def desingularized_rhs(p: ModelParams, xz) -> np.ndarray:
    """Right-hand side (u_y y v + u_z z w, -u_x z w) on the graph y(x, z)."""
    x, z = float(xz[0]), float(xz[1])
    y = graph_y(p, x, z)
    if y < 0.0:
        raise ValueError(f"(x, z) = ({x}, {z}) lies off the sheet: graph y = {y} < 0")
    p1, p2 = p.beta1 + x, p.beta2 + x
    v = x / p1 - p.c
    w = x / p2 - p.d - p.h * z
    ux = -1.0 + y / p1**2 + z / p2**2
    return np.array([-(y * v / p1 + z * w / p2), -ux * z * w])


def desingularized_jacobian(p: ModelParams, xz) -> np.ndarray:
    """Analytic 2x2 Jacobian of the desingularized flow at (x, z)."""
    x, z = float(xz[0]), float(xz[1])
    b1, b2, c, d, h = p.beta1, p.beta2, p.c, p.d, p.h
    pq, q = b1 + x, b2 + x
    y = pq * (1.0 - x - z / q)
    yx = y / pq - pq + pq * z / q**2
    yz = -pq / q
    v = x / pq - c
    w = x / q - d - h * z
    vx = b1 / pq**2
    wx = b2 / q**2
    ux = -1.0 + y / pq**2 + z / q**2
    uxx = yx / pq**2 - 2.0 * y / pq**3 - 2.0 * z / q**3
    uxz = yz / pq**2 + 1.0 / q**2
    ax = -((yx * v + y * vx) / pq - y * v / pq**2 + z * wx / q - z * w / q**2)
    az = (v - w + h * z) / q
    bx = -z * (uxx * w + ux * wx)
    bz = -(ux * (w - h * z) + z * w * uxz)
    return np.array([[ax, az], [bx, bz]])


@dataclass(frozen=True)
class FoldedSingularity:
    """Equilibrium of the desingularized flow lying on the fold curve.

    lambda_s is the strong (larger magnitude) eigenvalue, lambda_w the weak
    one; mu = lambda_w/lambda_s is meaningful for real pairs and NaN for a
    focus.  Eigenvalues are stored as complex to cover the focus case.
    """

    point: np.ndarray
    lambda_s: complex
    lambda_w: complex
    mu: float
    kind: SingularityKind


def _classify(lam: np.ndarray) -> tuple[complex, complex, float, SingularityKind]:
    scale = max(abs(lam[0]), abs(lam[1]))
    if max(abs(lam[0].imag), abs(lam[1].imag)) >= REAL_TOL * scale:
        ls = lam[np.argmax(np.abs(lam))]
        lw = lam[np.argmin(np.abs(lam))]
        return ls, lw, float("nan"), "focus"
    ls = float(lam.real[np.argmax(np.abs(lam.real))])
    lw = float(lam.real[np.argmin(np.abs(lam.real))])
    mu = lw / ls
    if abs(lw) < DEGENERATE_TOL:
        return ls, lw, mu, "degenerate"
    if ls * lw > 0.0:
        return ls, lw, mu, "node"
    return ls, lw, mu, "saddle"


def _fold_residual(fc: FoldCurve, s: float, p: ModelParams) -> float:
    y, z = fc.phi(s), fc.psi(s)
    p1, p2 = p.beta1 + s, p.beta2 + s
    v = s / p1 - p.c
    w = s / p2 - p.d - p.h * z
    return -(y * v / p1 + z * w / p2)


def find_folded_singularity(p: ModelParams, s_init: float, *,
                            enforce_side_conditions: bool = True,
                            max_iter: int = 100,
                            tol: float = 1e-12) -> FoldedSingularity:
    """Locate a folded singularity by Newton iteration on the fold parameter.

    The fold parametrization reduces the three defining equations to the
    scalar residual u_y y v + u_z z w = 0 along F+.  The kind is assigned
    from the eigenvalues of the desingularized Jacobian.  Side conditions
    (x* above the equilibrium prey density, y*, z* > 0) can be relaxed for
    parameter tracking across the FSN.
    """
    fc = fold_curve(p)
    if not fc.a < s_init < fc.b:
        raise ValueError(f"s_init = {s_init} outside ({fc.a}, {fc.b})")
    s = float(s_init)
    step = 1e-7 * (fc.b - fc.a)
    converged = False
    for _ in range(max_iter):
        r = _fold_residual(fc, s, p)
        if abs(r) < tol:
            converged = True
            break
        dr = (_fold_residual(fc, s + step, p) - _fold_residual(fc, s - step, p)) / (2.0 * step)
        if dr == 0.0:
            raise ConvergenceError(f"flat fold residual at s = {s}")
        s -= r / dr
        if not fc.a < s < fc.b:
            raise ConvergenceError(f"Newton iterate left the fold domain: s = {s}")
    if not converged:
        raise ConvergenceError(f"no folded singularity near s_init = {s_init} "
                               f"after {max_iter} iterations (residual {r:.3e})")
    point = fold_curve_point(fc, s)
    if enforce_side_conditions:
        x_eq = p.c * p.beta1 / (1.0 - p.c)
        if not (s > x_eq and point[1] > 0.0 and point[2] > 0.0):
            raise ConvergenceError(
                f"side conditions violated at s = {s}: need x* > {x_eq}, y*, z* > 0")
    lam = np.linalg.eigvals(desingularized_jacobian(p, (s, point[2])))
    ls, lw, mu, kind = _classify(lam)
    return FoldedSingularity(point=point, lambda_s=ls, lambda_w=lw, mu=mu, kind=kind)


def secondary_canard_count(mu: float) -> int | None:
    """Number k of secondary canards from 2k-1 < 1/mu < 2k+1.

    Returns None within 1e-9 of an integer resonance of 1/mu.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError(f"mu must be in (0, 1), got {mu}")
    inv = 1.0 / mu
    if abs(inv - round(inv)) < 1e-9:
        return None
    return int(np.floor((inv + 1.0) / 2.0))


def chi_k(mu: float, k: int) -> float:
    """Critical noise level mu^(1/4) exp(-(2k+1)^2 mu) for the k-th canard."""
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    return mu**0.25 * np.exp(-((2 * k + 1) ** 2) * mu)


def _bisect(f, lo: float, hi: float, flo: float, tol: float, max_iter: int = 200) -> float:
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            return mid
        fm = f(mid)
        if (flo < 0.0) == (fm < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_hopf(p: ModelParams, h_lo: float, h_hi: float, step: float = 1e-3,
              tol: float = 1e-5) -> float:
    """h at which the coexistence equilibrium's complex pair crosses Re = 0."""
    if not h_hi > h_lo:
        raise ValueError(f"empty scan range [{h_lo}, {h_hi}]")

    def pair_re(h: float) -> float | None:
        q = p.with_h(h)
        ev = np.linalg.eigvals(jacobian(q, coexistence_equilibrium(q)))
        cplx = ev[np.abs(ev.imag) > 1e-12]
        if len(cplx) != 2:
            return None
        return float(cplx[0].real)

    hs = np.arange(h_lo, h_hi + 0.5 * step, step)
    vals = [pair_re(h) for h in hs]
    if all(v is None for v in vals):
        raise ConvergenceError("eigenvalue pair never complex on the scan range")
    bracket = None
    for (h0, v0), (h1, v1) in zip(zip(hs, vals), zip(hs[1:], vals[1:])):
        if v0 is not None and v1 is not None and (v0 < 0.0) != (v1 < 0.0):
            bracket = (h0, h1, v0)
            break
    if bracket is None:
        raise ConvergenceError(f"no real-part sign change on [{h_lo}, {h_hi}]")

    def pair_re_strict(h: float) -> float:
        v = pair_re(h)
        if v is None:
            raise ConvergenceError(f"eigenvalue pair became real at h = {h} during bisection")
        return v

    return _bisect(pair_re_strict, bracket[0], bracket[1], bracket[2], tol)


def scan_fsn2(p: ModelParams, h_lo: float, h_hi: float, step: float = 1e-3,
              tol: float = 1e-4) -> float:
    """h at which the weak eigenvalue of the folded singularity crosses 0."""
    if not h_hi > h_lo:
        raise ValueError(f"empty scan range [{h_lo}, {h_hi}]")
    fc = fold_curve(p)
    s_guess = 0.5 * (fc.a + fc.b)

    def lam_w(h: float) -> float:
        nonlocal s_guess
        fs = find_folded_singularity(p.with_h(h), s_guess, enforce_side_conditions=False)
        s_guess = float(fs.point[0])
        return float(np.real(fs.lambda_w))

    hs = np.arange(h_lo, h_hi + 0.5 * step, step)
    vals = [lam_w(h) for h in hs]
    bracket = None
    for (h0, v0), (h1, v1) in zip(zip(hs, vals), zip(hs[1:], vals[1:])):
        if (v0 < 0.0) != (v1 < 0.0):
            bracket = (h0, h1, v0)
            break
    if bracket is None:
        raise ConvergenceError(f"weak eigenvalue does not cross 0 on [{h_lo}, {h_hi}]")
    return _bisect(lam_w, bracket[0], bracket[1], bracket[2], tol)


def fold_track(p: ModelParams, h_values, s_init: float | None = None) -> list[dict]:
    """Folded-singularity data per h, as CSV-ready rows.

    Row keys: h, x, y, z, lambda_s, lambda_w, mu, kind.  Tracking warm-starts
    each solve from the previous fold point.
    """
    fc = fold_curve(p)
    s = s_init if s_init is not None else 0.5 * (fc.a + fc.b)
    rows = []
    for h in h_values:
        fs = find_folded_singularity(p.with_h(float(h)), s, enforce_side_conditions=False)
        s = float(fs.point[0])
        rows.append({
            "h": float(h),
            "x": fs.point[0], "y": fs.point[1], "z": fs.point[2],
            "lambda_s": float(np.real(fs.lambda_s)),
            "lambda_w": float(np.real(fs.lambda_w)),
            "mu": fs.mu, "kind": fs.kind,
        })
    return rows
