"""Single-tone jammer and the jammer-frequency estimation error model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Smallest design frequency a clamped estimate may take (1 MHz).
F_MIN = 1e6


@dataclass(frozen=True)
class JammerSpec:
    """Tone ``sqrt(2 P_J) cos(2 pi f_J t + theta_J)``."""

    f_J: float
    theta_J: float = 0.0
    P_J: float = 1.0
    enabled: bool = True

    def __post_init__(self):
        if self.P_J < 0:
            raise ValueError("jammer power must be non-negative")
        if self.enabled and not self.f_J >= 0:
            raise ValueError("jammer frequency must be non-negative")

    @property
    def amplitude(self) -> float:
        return math.sqrt(2.0 * self.P_J)

    @property
    def period(self) -> float:
        return 1.0 / self.f_J


@dataclass(frozen=True)
class FreqEstimatorModel:
    """Gaussian estimation error ``fhat - f_J ~ N(mu_eps, sigma_eps**2)`` in Hz."""

    mu_eps: float = 0.0
    sigma_eps: float = 0.0

    def __post_init__(self):
        if self.sigma_eps < 0:
            raise ValueError("sigma_eps must be non-negative")

    @property
    def is_deterministic(self) -> bool:
        return self.sigma_eps == 0.0


def stj_samples(spec: JammerSpec, t0: float, n: int, dt: float) -> np.ndarray:
    """Tone samples at ``t0 + k*dt`` for ``k = 0..n-1`` (zeros when disabled)."""
    if n < 1:
        raise ValueError("need at least one sample")
    if not spec.enabled or spec.P_J == 0.0:
        return np.zeros(n)
    t = t0 + np.arange(n) * dt
    return spec.amplitude * np.cos(2 * math.pi * spec.f_J * t + spec.theta_J)


def clamp_fhat(fhat, band_edge: float, f_min: float = F_MIN):
    """Clamp estimates into ``[f_min, band_edge - f_min]``.

    Returns ``(clamped, n_clamped)``.
    """
    fhat = np.asarray(fhat, dtype=np.float64)
    out = np.clip(fhat, f_min, band_edge - f_min)
    n = int(np.count_nonzero(out != fhat))
    return (float(out), n) if out.ndim == 0 else (out, n)


def sample_fhat(model: FreqEstimatorModel, f_J: float, rng, size=None):
    """Draw ``f_J + eps`` with ``eps ~ N(mu, sigma**2)``; unclamped.

    A zero ``sigma`` consumes no random numbers.
    """
    if model.sigma_eps == 0.0:
        val = f_J + model.mu_eps
        return val if size is None else np.full(size, val)
    return f_J + rng.normal(model.mu_eps, model.sigma_eps, size)
