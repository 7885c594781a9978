"""Boundary-controlled heat segment on [0, pi] in cosine-mode coordinates.

The Neumann Laplacian diagonalizes over e_n(s) = sqrt(eps_n/pi) cos(n s)
(eps_0 = 1, eps_n = 2), which turns the two boundary inputs and the midpoint
temperature reading into explicit row/column sequences. Everything here is
spectral; physical profiles exist only for display via
reconstruct_temperature.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SpectrumError
from .spectral import DiagonalGenerator
from .system import HeatTail, SpectralSystem

_SPECTRUM_TOL = 1e-12


@dataclass(frozen=True)
class HeatConfig:
    """Truncation order, spectral shift, and certificate scan parameters."""

    n_modes: int = 64
    lambda0: float = 1.0
    gamma_max: float = 100.0
    steps: int = 4001
    t0: float = 1.0

    def __post_init__(self):
        if self.n_modes < 1:
            raise DomainError(f"n_modes must be >= 1, got {self.n_modes}")
        if not self.lambda0 > 0:
            raise DomainError(f"lambda0 must be > 0, got {self.lambda0}")
        if not self.gamma_max > 0:
            raise DomainError(f"gamma_max must be > 0, got {self.gamma_max}")
        if self.steps < 2:
            raise DomainError(f"steps must be >= 2, got {self.steps}")
        if not self.t0 > 0:
            raise DomainError(f"t0 must be > 0, got {self.t0}")


def mode_weights(n_modes: int) -> np.ndarray:
    """sqrt(eps_n / pi) for n = 0..N-1."""
    eps = np.full(n_modes, 2.0)
    eps[0] = 1.0
    return np.sqrt(eps / math.pi)


def build_heat_system(cfg: HeatConfig) -> SpectralSystem:
    """Shifted heat system: alpha_n = -lambda0 - n^2, two boundary inputs,
    one midpoint output, zero feedthrough."""
    n = np.arange(cfg.n_modes)
    w = mode_weights(cfg.n_modes)
    alpha = -(cfg.lambda0 + n.astype(float) ** 2) + 0j
    control = np.stack([-w, ((-1.0) ** n) * w], axis=1)
    observation = np.where(n % 2 == 0, ((-1.0) ** (n // 2)) * w, 0.0)[None, :]
    feedthrough = np.zeros((1, 2))
    gen = DiagonalGenerator(alpha, shift=cfg.lambda0, k=1.0, omega=-cfg.lambda0)
    return SpectralSystem(gen, control, observation, feedthrough,
                          tail=HeatTail(cfg.lambda0, channels=2),
                          exact=False, builtin="heat")


def dirichlet_eval(lam: complex, s: float) -> tuple[complex, complex]:
    """Kernels of the Dirichlet operator at lambda: the harmonic lifts q0, q1
    with q0'(0) = 1, q0'(pi) = 0 and q1'(0) = 0, q1'(pi) = 1.

    q0(s) = -cosh(z (pi - s)) / (z sinh(z pi)), q1(s) = cosh(z s) / (z sinh(z pi)),
    z = sqrt(lambda). Both are even in z, so the principal branch is used.
    Rewritten over e^(-z .) so nothing overflows for large |lambda|.
    """
    lam = complex(lam)
    if not 0.0 <= s <= math.pi:
        raise DomainError(f"s must lie in [0, pi], got {s}")
    near = round(math.sqrt(max(0.0, -lam.real)))
    if abs(lam + near * near) <= _SPECTRUM_TOL * max(1.0, abs(lam)):
        raise SpectrumError(f"lambda = {lam} lies on the unshifted spectrum -n^2")
    z = cmath.sqrt(lam)
    den = 1.0 - cmath.exp(-2.0 * z * math.pi)
    q0 = -(cmath.exp(-z * s) + cmath.exp(-z * (2.0 * math.pi - s))) / (z * den)
    q1 = (cmath.exp(-z * (math.pi - s)) + cmath.exp(-z * (math.pi + s))) / (z * den)
    return q0, q1


def reconstruct_temperature(x, s_grid) -> np.ndarray:
    """Temperature profile sum_n x_n e_n(s) on the sample points s_grid."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1:
        raise DomainError(f"mode vector must be 1-d, got shape {x.shape}")
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    n = np.arange(x.shape[0])
    basis = mode_weights(x.shape[0])[None, :] * np.cos(np.outer(s, n))
    return basis @ x


def heat_certificate(cfg: HeatConfig) -> dict:
    """End-to-end certificate for the heat system at cfg's scan parameters."""
    from .certificate import certify_system

    return certify_system(build_heat_system(cfg), p=2.0, t0=cfg.t0,
                          gamma_max=cfg.gamma_max, gamma_steps=cfg.steps)
