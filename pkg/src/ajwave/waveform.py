"""Monocycle waveforms and their PPM correlator templates.

Samples use a cell convention: sample ``k`` holds the value on
``[k*dt, (k+1)*dt)``. Analytic shapes are evaluated at cell centres, and
piecewise-constant shapes are represented exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

#: Default sampling interval (0.02 ns).
DEFAULT_DT = 0.02e-9


class SamplingGridError(ValueError):
    """A duration is not an integer number of sampling intervals."""


def grid_count(duration: float, dt: float, what: str = "duration") -> int:
    """Return ``duration / dt`` as an int, or raise if it is not integral."""
    if dt <= 0:
        raise SamplingGridError(f"sampling interval must be positive, got {dt!r}")
    ratio = duration / dt
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
        raise SamplingGridError(
            f"{what}={duration!r} s is not a multiple of dt={dt!r} s"
        )
    return n


class WaveformKind(enum.Enum):
    RECT_COMPOSITE = "rect_composite"
    GAUSSIAN_DOUBLET = "gaussian_doublet"


@dataclass(frozen=True, eq=False)
class Waveform:
    """A sampled monocycle plus its analytic descriptor.

    ``coeffs`` is set for rect composites and ``amplitude``/``T_m`` for
    Gaussian doublets. ``samples`` spans ``[0, T_p)``.
    """

    kind: WaveformKind
    samples: np.ndarray
    dt: float
    T_p: float
    T_c: float
    coeffs: Optional[np.ndarray] = None
    amplitude: Optional[float] = None
    T_m: Optional[float] = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.coeffs is not None:
            c = np.asarray(self.coeffs, dtype=np.float64)
            c.setflags(write=False)
            object.__setattr__(self, "coeffs", c)

    @property
    def energy(self) -> float:
        return float(self.dt * np.sum(self.samples**2))

    @property
    def times(self) -> np.ndarray:
        """Cell-centre times of the samples."""
        return (np.arange(self.samples.size) + 0.5) * self.dt

    def scaled(self, c: float) -> "Waveform":
        return replace(
            self,
            samples=c * self.samples,
            amplitude=None if self.amplitude is None else c * self.amplitude,
        )


@dataclass(frozen=True, eq=False)
class Template:
    """Correlator template ``w(t) - w(t - delta)`` over one chip."""

    samples: np.ndarray
    dt: float
    delta: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def energy(self) -> float:
        return float(self.dt * np.sum(self.samples**2))


def make_rect_composite(coeffs, T_c: float, dt: float = DEFAULT_DT) -> Waveform:
    """Weighted sum of ``N`` adjacent rectangles covering ``[0, T_c/2)``.

    Segment ``i`` spans ``[i*T_c/(2N), (i+1)*T_c/(2N))`` and holds ``coeffs[i]``
    unscaled; call :func:`normalize` for a unit-energy pulse.
    """
    a = np.asarray(coeffs, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError("a rect composite needs at least one coefficient")
    if not np.all(np.isfinite(a)):
        raise ValueError("coefficients must be finite")
    if T_c <= 0:
        raise ValueError("chip duration must be positive")
    n_seg = grid_count(T_c / (2 * a.size), dt, "segment width T_c/(2N)")
    if n_seg < 1:
        raise SamplingGridError("sampling interval is wider than one segment")
    return Waveform(
        kind=WaveformKind.RECT_COMPOSITE,
        samples=np.repeat(a, n_seg),
        dt=dt,
        T_p=T_c / 2,
        T_c=T_c,
        coeffs=a,
    )


def doublet_value(t, A: float, T_p: float, T_m: float):
    """Gaussian doublet ``A(1 - 4 pi x^2) exp(-2 pi x^2)`` with ``x = 2(t - T_m)/T_p``."""
    x2 = (2.0 * (np.asarray(t, dtype=np.float64) - T_m) / T_p) ** 2
    return A * (1.0 - 4.0 * math.pi * x2) * np.exp(-2.0 * math.pi * x2)


def gaussian_doublet(
    A: float = 1.0,
    T_p: float = 0.5e-9,
    T_m: float = 0.25e-9,
    dt: float = DEFAULT_DT,
    T_c: Optional[float] = None,
) -> Waveform:
    """Gaussian doublet sampled over ``[0, T_p)``, truncated to that window.

    ``T_c`` defaults to ``2*T_p``.
    """
    if T_p <= 0:
        raise ValueError("pulse duration must be positive")
    if not np.isfinite(A):
        raise ValueError("amplitude must be finite")
    n = grid_count(T_p, dt, "pulse duration T_p")
    t = (np.arange(n) + 0.5) * dt
    return Waveform(
        kind=WaveformKind.GAUSSIAN_DOUBLET,
        samples=doublet_value(t, A, T_p, T_m),
        dt=dt,
        T_p=T_p,
        T_c=2 * T_p if T_c is None else T_c,
        amplitude=float(A),
        T_m=T_m,
    )


def normalize(w: Waveform) -> Waveform:
    """Rescale to unit discrete energy ``dt * sum(samples**2) == 1``."""
    e = w.energy
    if not e > 0:
        raise ValueError("cannot normalize a waveform with zero energy")
    return w.scaled(1.0 / math.sqrt(e))


def make_template(w: Waveform, delta: float, T_c: Optional[float] = None) -> Template:
    """Build ``v(t) = w(t) - w(t - delta)`` on ``[0, T_c)``.

    ``delta`` must land on the sampling grid and ``delta + T_p <= T_c``.
    """
    T_c = w.T_c if T_c is None else T_c
    if delta < 0:
        raise ValueError("PPM shift must be non-negative")
    n_chip = grid_count(T_c, w.dt, "chip duration T_c")
    n_shift = grid_count(delta, w.dt, "PPM shift delta")
    n_p = w.samples.size
    if n_shift + n_p > n_chip:
        raise ValueError(
            f"template needs delta + T_p = {delta + w.T_p!r} s but the chip is {T_c!r} s"
        )
    v = np.zeros(n_chip)
    v[:n_p] += w.samples
    v[n_shift : n_shift + n_p] -= w.samples
    return Template(samples=v, dt=w.dt, delta=delta)
