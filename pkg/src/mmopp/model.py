"""Model parameters, vector field, and demographic-noise coefficients.

States are plain length-3 numpy arrays ``[x, y, z]`` of non-negative
population densities; x is the fast prey, y and z the two slow predators.
All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from . import _kernels

Timescale = Literal["slow", "fast"]


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters of the three-species fast-slow model.

    zeta is the predator/prey growth-rate ratio (the timescale separation),
    beta1 and beta2 the semi-saturation constants of the two predators,
    c and d their growth/death rate ratios, and h the intraspecific
    competition coefficient of the z predator.
    """

    zeta: float
    beta1: float
    beta2: float
    c: float
    d: float
    h: float

    def __post_init__(self):
        if not 0.0 < self.zeta < 1.0:
            raise ValueError(f"zeta must be in (0, 1), got {self.zeta}")
        for name in ("beta1", "beta2", "c", "d"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if self.beta1 == self.beta2:
            raise ValueError("beta1 and beta2 must differ")
        if self.h <= 0.0:
            raise ValueError(f"h must be positive, got {self.h}")

    def with_h(self, h: float) -> "ModelParams":
        return replace(self, h=h)


def baseline_params(h: float = 2.4, zeta: float = 0.01) -> ModelParams:
    """The parameter set used throughout the studies; h is the knob."""
    return ModelParams(zeta=zeta, beta1=0.5, beta2=0.25, c=0.38, d=0.17, h=h)


@dataclass(frozen=True)
class NoiseParams:
    """Noise intensities sigma_i = 1/sqrt(omega_i) for the three species."""

    sigma1: float
    sigma2: float
    sigma3: float

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "sigma3"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([self.sigma1, self.sigma2, self.sigma3])

    @property
    def omegas(self) -> np.ndarray:
        """Implied population scales 1/sigma_i^2 (inf where sigma_i = 0)."""
        with np.errstate(divide="ignore"):
            return 1.0 / self.sigmas**2

    @classmethod
    def from_omegas(cls, omega1: float, omega2: float, omega3: float) -> "NoiseParams":
        return cls(*(1.0 / np.sqrt([omega1, omega2, omega3])))


def validate_state(state) -> np.ndarray:
    s = np.asarray(state, dtype=float)
    if s.shape != (3,):
        raise ValueError(f"state must have shape (3,), got {s.shape}")
    if np.any(s < 0.0):
        raise ValueError(f"state has negative components: {s}")
    return s


def nullcline_values(p: ModelParams, state) -> np.ndarray:
    """(u, v, w): the nontrivial x, y, z nullcline expressions."""
    x, y, z = validate_state(state)
    p1, p2 = p.beta1 + x, p.beta2 + x
    return np.array([
        1.0 - x - y / p1 - z / p2,
        x / p1 - p.c,
        x / p2 - p.d - p.h * z,
    ])


def drift(p: ModelParams, state, timescale: Timescale = "slow") -> np.ndarray:
    """Deterministic rates: (f1/zeta, f2, f3) slow, (f1, zeta f2, zeta f3) fast."""
    x, y, z = validate_state(state)
    f1, f2, f3 = _kernels.rates(x, y, z, p.beta1, p.beta2, p.c, p.d, p.h)
    if timescale == "slow":
        return np.array([(1.0 / p.zeta) * f1, f2, f3])
    if timescale == "fast":
        return np.array([f1, p.zeta * f2, p.zeta * f3])
    raise ValueError(f"unknown timescale {timescale!r}")


def diffusion_F(p: ModelParams, state) -> np.ndarray:
    """Raw noise amplitudes (F1, F2, F3), the positive square roots."""
    x, y, z = validate_state(state)
    f1s, f2s, f3s = _kernels.noise_sq(x, y, z, p.beta1, p.beta2, p.c, p.d, p.h)
    return np.sqrt([f1s, f2s, f3s])


def diffusion(p: ModelParams, n: NoiseParams, state, timescale: Timescale = "slow") -> np.ndarray:
    """Noise amplitudes with sigma and timescale prefactors applied.

    Slow scale: (sigma1 F1/sqrt(zeta), sigma2 F2, sigma3 F3); fast scale:
    (sigma1 F1, sqrt(zeta) sigma2 F2, sqrt(zeta) sigma3 F3).
    """
    F = diffusion_F(p, state)
    rz = np.sqrt(p.zeta)
    if timescale == "slow":
        pref = np.array([n.sigma1 / rz, n.sigma2, n.sigma3])
    elif timescale == "fast":
        pref = np.array([n.sigma1, rz * n.sigma2, rz * n.sigma3])
    else:
        raise ValueError(f"unknown timescale {timescale!r}")
    return pref * F


def diffusion_approx_G(p: ModelParams, state) -> np.ndarray:
    """Fold-local amplitudes (G1, G2, G3) with G_i^2 the leading radicands.

    G1^2 = x + x^2 + xy/(b1+x) + xz/(b2+x); G2^2 = xy/(b1+x) + cy;
    G3^2 = xz/(b2+x) + dz + hz^2.  Intended for states near the fold.
    """
    x, y, z = validate_state(state)
    p1, p2 = p.beta1 + x, p.beta2 + x
    rad = np.array([
        x + x * x + x * y / p1 + x * z / p2,
        x * y / p1 + p.c * y,
        x * z / p2 + p.d * z + p.h * z * z,
    ])
    if np.any(rad < 0.0):
        raise ValueError(f"negative radicand in G at state {state}: {rad}")
    return np.sqrt(rad)


def coexistence_equilibrium(p: ModelParams) -> np.ndarray:
    """Interior equilibrium (u = v = w = 0), in closed form.

    x_e = c beta1/(1-c) from v = 0, z_e from w = 0, y_e from u = 0.
    Raises if the equilibrium is not interior.
    """
    xe = p.c * p.beta1 / (1.0 - p.c)
    if not 0.0 < xe < 1.0:
        raise ValueError(f"c beta1/(1-c) = {xe} outside (0, 1): no interior equilibrium")
    ze = (xe / (p.beta2 + xe) - p.d) / p.h
    ye = (p.beta1 + xe) * (1.0 - xe - ze / (p.beta2 + xe))
    if ze < 0.0 or ye < 0.0:
        raise ValueError(f"no interior coexistence: y_e = {ye}, z_e = {ze}")
    return np.array([xe, ye, ze])


def jacobian(p: ModelParams, state) -> np.ndarray:
    """Analytic Jacobian of the fast-scale drift (f1, zeta f2, zeta f3)."""
    x, y, z = validate_state(state)
    b1, b2, c, d, h, zeta = p.beta1, p.beta2, p.c, p.d, p.h, p.zeta
    p1, p2 = b1 + x, b2 + x
    return np.array([
        [1.0 - 2.0 * x - b1 * y / p1**2 - b2 * z / p2**2, -x / p1, -x / p2],
        [zeta * b1 * y / p1**2, zeta * (x / p1 - c), 0.0],
        [zeta * b2 * z / p2**2, 0.0, zeta * (x / p2 - d - 2.0 * h * z)],
    ])
