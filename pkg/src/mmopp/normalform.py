"""Normal-form constants and transformation near the folded node.

The coordinate change is a composition of four maps: translation of the
fold point to the origin, a shear that rectifies the fold curve onto the
Z axis, a stretch/translation of (X, Y), and a final Z-dependent rescale
of Y.  In the resulting coordinates the fast drift component reads
Y + X^2 + C X Y up to higher-order and O(zeta) terms; the verification
below certifies this numerically by pushing the original drift through
the differential of the transformation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConvergenceError
from .model import ModelParams, NoiseParams, diffusion_F, diffusion_approx_G, drift
from .slowfast import FoldedSingularity, manifold_residual

FOLD_TOL = 1e-8


@dataclass(frozen=True)
class NormalFormConstants:
    """Constant set of the fold-local normal form, plus transform factors.

    y_scale and y_shift are the affine factors of the third map; alpha is
    the Z-coefficient of the final rescale.  M is the Z-coefficient of the
    rectified second drift component before the stretch.
    """

    xstar: float
    ystar: float
    zstar: float
    zeta: float
    kappa: float
    c11: float
    c22: float
    A1: float
    A2: float
    A3: float
    A4: float
    B0: float
    B1: float
    B2: float
    C: float
    C0: float
    C1: float
    D0: float
    D1: float
    D2: float
    D3: float
    D4: float
    E0: float
    M: float
    alpha: float
    y_scale: float
    y_shift: float

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(asdict(self), indent=indent)


def compute_constants(p: ModelParams, fs: FoldedSingularity,
                      n: NoiseParams) -> NormalFormConstants:
    """Evaluate the constant set at a folded node.

    Requires a genuine folded node lying on the fold curve; sigma3 and
    zeta enter only through A4.
    """
    if fs.kind != "node":
        raise ValueError(f"normal form requires a folded node, got {fs.kind}")
    u, ux = manifold_residual(p, fs.point)
    if max(abs(u), abs(ux)) > FOLD_TOL:
        raise ValueError(f"point is not on the fold curve: u = {u}, u_x = {ux}")
    xs, ys, zs = fs.point
    b1, b2, c, d, h, zeta = p.beta1, p.beta2, p.c, p.d, p.h, p.zeta
    p1, p2 = b1 + xs, b2 + xs
    c11 = (b1 - b2) / (2.0 * p2 * (3.0 * xs + b1 + b2 - 1.0))
    c22 = -p1 / p2
    kappa = -xs * (ys / p1**3 + zs / p2**3)
    C0 = c11 * zs * (xs / p1 - d - h * zs)
    C1 = xs / p1 - c
    A1 = -xs * (b1 * ys / p1**3 + b2 * zs / p2**3)
    A2 = b1 * C0 / (xs * p1) + C1
    A3 = xs * kappa * ((d + 2.0 * h * zs - c - (b1 - b2) * xs / (p1 * p2)) / p2
                       - c11 * (b1 * ys / p1**3 + b2 * zs / p2**3))
    A4 = c11 * c22 * kappa * b1 * n.sigma3**2 * zeta / p1**2
    B0 = zs * (xs / p2 - d - h * zs)
    B1 = b2 * zs / p2**2
    B2 = xs / p2 - d - 2.0 * h * zs + c11 * b2 * zs / p2**2
    C = b1 / (kappa * xs * p1)
    D0 = ys * (xs / p1 + c)
    D1 = b1 * ys / (kappa * p1**2)
    D2 = -(c * b1 + (1.0 + c) * xs) / xs
    D3 = c11 * b1 * ys / p1**2
    D4 = (c11 * B0 / xs) * (c * b1 + (1.0 + c) * xs)
    E0 = zs * (xs / p2 + d + h * zs)
    M = -A3 * p1 / (xs * kappa)
    alpha = c11 * b1 / (xs * p1)
    return NormalFormConstants(
        xstar=xs, ystar=ys, zstar=zs, zeta=zeta, kappa=kappa, c11=c11, c22=c22,
        A1=A1, A2=A2, A3=A3, A4=A4, B0=B0, B1=B1, B2=B2, C=C, C0=C0, C1=C1,
        D0=D0, D1=D1, D2=D2, D3=D3, D4=D4, E0=E0, M=M, alpha=alpha,
        y_scale=-xs * kappa / p1, y_shift=-zeta * c11 * kappa * E0)


def transform_state(nfc: NormalFormConstants, state, direction: str = "forward",
                    stage: int = 4) -> np.ndarray:
    """Apply the first ``stage`` maps (or their exact inverse).

    Forward input is an original-coordinates state; inverse input is a
    stage-``stage`` coordinate triple.  The final map is singular where
    1 + alpha Z = 0.
    """
    v = np.asarray(state, dtype=float).copy()
    if not 1 <= stage <= 4:
        raise ValueError(f"stage must be 1..4, got {stage}")
    star = np.array([nfc.xstar, nfc.ystar, nfc.zstar])
    if direction == "forward":
        v = v - star
        if stage >= 2:
            v = np.array([v[0] - nfc.c11 * v[2], v[1] - nfc.c22 * v[2], v[2]])
        if stage >= 3:
            v = np.array([nfc.kappa * v[0], nfc.y_scale * v[1] + nfc.y_shift, v[2]])
        if stage >= 4:
            v = np.array([v[0], (1.0 + nfc.alpha * v[2]) * v[1], v[2]])
        return v
    if direction == "inverse":
        if stage >= 4:
            fac = 1.0 + nfc.alpha * v[2]
            if abs(fac) < 1e-12:
                raise ZeroDivisionError("final map singular: 1 + alpha Z = 0")
            v = np.array([v[0], v[1] / fac, v[2]])
        if stage >= 3:
            v = np.array([v[0] / nfc.kappa, (v[1] - nfc.y_shift) / nfc.y_scale, v[2]])
        if stage >= 2:
            v = np.array([v[0] + nfc.c11 * v[2], v[1] + nfc.c22 * v[2], v[2]])
        return v + star
    raise ValueError(f"direction must be forward or inverse, got {direction!r}")


def transform_jacobian(nfc: NormalFormConstants, state) -> np.ndarray:
    """Differential of the full forward map at an original-coordinates state."""
    J2 = np.array([[1.0, 0.0, -nfc.c11], [0.0, 1.0, -nfc.c22], [0.0, 0.0, 1.0]])
    J3 = np.diag([nfc.kappa, nfc.y_scale, 1.0])
    hat = transform_state(nfc, state, "forward", stage=3)
    J4 = np.array([[1.0, 0.0, 0.0],
                   [0.0, 1.0 + nfc.alpha * hat[2], nfc.alpha * hat[1]],
                   [0.0, 0.0, 1.0]])
    return J4 @ J3 @ J2


def drift_pushforward(nfc: NormalFormConstants, p: ModelParams, q) -> np.ndarray:
    """Fast-scale drift expressed in the transformed coordinates at q."""
    s = transform_state(nfc, q, "inverse")
    return transform_jacobian(nfc, s) @ drift(p, s, "fast")


@dataclass(frozen=True)
class VerificationReport:
    """Numerically extracted normal-form content and its target deviations."""

    delta: float
    coef_y: float
    coef_xx: float
    coef_xy: float
    dev_y: float
    dev_xx: float
    dev_xy: float
    lin2: tuple
    dev_lin2: tuple
    g1sq_const: float
    dev_g1sq: float
    g2sq_const: float
    dev_g2sq: float
    g3sq_const: float
    dev_g3sq: float
    roundtrip_error: float
    cubic_slope: float

    def to_json(self, indent: int | None = 2) -> str:
        d = asdict(self)
        d["lin2"] = list(self.lin2)
        d["dev_lin2"] = list(self.dev_lin2)
        return json.dumps(d, indent=indent)


def _f1bar(nfc, p):
    def f(q):
        return drift_pushforward(nfc, p, q)[0]
    return f


def verify_normal_form(nfc: NormalFormConstants, p: ModelParams,
                       fs: FoldedSingularity, delta: float = 1e-3,
                       seed: int = 0) -> VerificationReport:
    """Certify the normal form by finite-difference coefficient extraction.

    Extracts the Y, X^2 and XY coefficients of the first transformed drift
    component at the transformed origin (targets 1, 1, C), the linear part
    of the second component (targets A1, A2, A3), and checks the constant
    terms of the squared noise amplitudes against 2x*, D0, E0.  The cubic
    slope is measured from third central differences, which annihilate all
    content up to quadratic order (the O(zeta) affine floor included); it
    should sit near 3.
    """
    if not 0.0 < delta <= 0.05:
        raise ValueError(f"delta must be in (0, 0.05], got {delta}")
    F1 = _f1bar(nfc, p)
    e1 = np.array([delta, 0.0, 0.0])
    e2 = np.array([0.0, delta, 0.0])
    zero = np.zeros(3)
    coef_y = (F1(e2) - F1(-e2)) / (2.0 * delta)
    coef_xx = (F1(e1) - 2.0 * F1(zero) + F1(-e1)) / delta**2 / 2.0
    coef_xy = (F1(e1 + e2) - F1(e1 - e2) - F1(-e1 + e2) + F1(-e1 - e2)) / (4.0 * delta**2)

    def F2(q):
        return drift_pushforward(nfc, p, q)[1] / p.zeta

    lin2 = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = delta
        lin2.append((F2(e) - F2(-e)) / (2.0 * delta))
    dev_lin2 = (abs(lin2[0] - nfc.A1), abs(lin2[1] - nfc.A2), abs(lin2[2] - nfc.A3))

    G = diffusion_approx_G(p, fs.point)
    g1sq, g2sq, g3sq = G[0] ** 2, G[1] ** 2, G[2] ** 2

    rng = np.random.default_rng(seed)
    rt = 0.0
    for _ in range(1000):
        s = fs.point + rng.uniform(-0.05, 0.05, 3)
        q = transform_state(nfc, s, "forward")
        rt = max(rt, float(np.max(np.abs(transform_state(nfc, q, "inverse") - s))))

    dirs = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0],
                     [1.0, 1.0, 1.0] / np.sqrt(3.0)])
    levels = np.array([delta, delta / 2.0, delta / 4.0])
    resid = []
    for lv in levels:
        r = 0.0
        for e in dirs:
            d3 = F1(2 * lv * e) - 2.0 * F1(lv * e) + 2.0 * F1(-lv * e) - F1(-2 * lv * e)
            r = max(r, abs(d3))
        resid.append(r)
    slope = float(np.polyfit(np.log(levels), np.log(resid), 1)[0])

    return VerificationReport(
        delta=delta,
        coef_y=float(coef_y), coef_xx=float(coef_xx), coef_xy=float(coef_xy),
        dev_y=float(abs(coef_y - 1.0)), dev_xx=float(abs(coef_xx - 1.0)),
        dev_xy=float(abs(coef_xy - nfc.C)),
        lin2=tuple(float(v) for v in lin2), dev_lin2=tuple(float(v) for v in dev_lin2),
        g1sq_const=float(g1sq), dev_g1sq=float(abs(g1sq - 2.0 * nfc.xstar)),
        g2sq_const=float(g2sq), dev_g2sq=float(abs(g2sq - nfc.D0)),
        g3sq_const=float(g3sq), dev_g3sq=float(abs(g3sq - nfc.E0)),
        roundtrip_error=rt, cubic_slope=slope)


def noise_prefactors(p: ModelParams, n: NoiseParams, fs: FoldedSingularity):
    """sigma_i F_i and sigma_i G_i evaluated at the folded singularity."""
    sig = n.sigmas
    return sig * diffusion_F(p, fs.point), sig * diffusion_approx_G(p, fs.point)


def chi_vs_h(p: ModelParams, h_lo: float, h_hi: float, num: int = 50,
             k_max: int = 4, s_init: float | None = None) -> list[dict]:
    """(h, mu(h), chi_0..chi_k_max) along the folded-node track.

    Rows stop where the tracked singularity is no longer a node with
    mu > 0 (at or beyond the FSN).
    """
    from .slowfast import chi_k, fold_track

    if num < 2:
        raise ValueError("num must be >= 2")
    hs = np.linspace(h_lo, h_hi, num)
    try:
        track = fold_track(p, hs, s_init=s_init)
    except ConvergenceError as exc:
        raise ConvergenceError(f"fold tracking failed on [{h_lo}, {h_hi}]: {exc}") from exc
    rows = []
    for rec in track:
        if rec["kind"] != "node" or not rec["mu"] > 0.0:
            break
        row = {"h": rec["h"], "mu": rec["mu"]}
        for k in range(k_max + 1):
            row[f"chi{k}"] = chi_k(rec["mu"], k)
        rows.append(row)
    return rows


def chi_table_to_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("empty chi table")
    cols = list(rows[0].keys())
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(f"{row[c]:.17g}" for c in cols) + "\n")


def fold_sweep(p: ModelParams, n: NoiseParams, h_lo: float, h_hi: float,
               num: int = 41, k_max: int = 4) -> list[dict]:
    """chi_vs_h rows extended with the noise prefactors sigma_i F_i and
    sigma_i G_i along the folded-node track."""
    from .slowfast import chi_k, find_folded_singularity, fold_curve

    if num < 2:
        raise ValueError("num must be >= 2")
    fc = fold_curve(p)
    s = 0.5 * (fc.a + fc.b)
    rows = []
    for h in np.linspace(h_lo, h_hi, num):
        fs = find_folded_singularity(p.with_h(float(h)), s,
                                     enforce_side_conditions=False)
        s = float(fs.point[0])
        if fs.kind != "node" or not fs.mu > 0.0:
            break
        row = {"h": float(h), "mu": fs.mu}
        for k in range(k_max + 1):
            row[f"chi{k}"] = chi_k(fs.mu, k)
        pf, pg = noise_prefactors(p.with_h(float(h)), n, fs)
        for i in range(3):
            row[f"sF{i + 1}"] = float(pf[i])
            row[f"sG{i + 1}"] = float(pg[i])
        rows.append(row)
    return rows
