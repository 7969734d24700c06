"""TH-PPM transmitter, AWGN + tone channel, correlator receiver and clipper.

Every time quantity must land on the sampling grid. Pulses are placed at
``m*T_f + c_m*T_c + delta*d``, with TH code entries ``c_m`` in ``0..N_c-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .jamming import JammerSpec, stj_samples
from .spectral import next_pow2, periodogram_scale
from .waveform import DEFAULT_DT, Template, Waveform, grid_count


@dataclass(frozen=True)
class ThConfig:
    """Timing of the TH-PPM link (SI units). Defaults: 1 ns chips, 4 chips, 3 frames."""

    T_c: float = 1e-9
    T_f: float = 4e-9
    N_f: int = 3
    N_c: int = 4
    delta: float = 0.5e-9
    T_p: float = 0.5e-9
    dt: float = DEFAULT_DT
    alpha: float = 1.0

    def __post_init__(self):
        if self.N_f < 1 or self.N_c < 1:
            raise ValueError("N_f and N_c must be at least 1")
        if abs(self.T_f - self.N_c * self.T_c) > 1e-9 * self.T_f:
            raise ValueError(f"T_f={self.T_f!r} must equal N_c*T_c={self.N_c * self.T_c!r}")
        if self.T_p > self.T_c * (1 + 1e-12):
            raise ValueError("pulse longer than a chip")
        if self.delta < 0 or self.delta + self.T_p > self.T_c * (1 + 1e-12):
            raise ValueError("delta + T_p must fit inside one chip")
        for name in ("T_c", "T_f", "delta", "T_p"):
            grid_count(getattr(self, name), self.dt, name)

    @property
    def T_b(self) -> float:
        return self.N_f * self.T_f

    @property
    def chip_samples(self) -> int:
        return grid_count(self.T_c, self.dt)

    @property
    def frame_samples(self) -> int:
        return grid_count(self.T_f, self.dt)

    @property
    def bit_samples(self) -> int:
        return self.N_f * self.frame_samples

    @property
    def delta_samples(self) -> int:
        return grid_count(self.delta, self.dt)


@dataclass(frozen=True, eq=False)
class ThCode:
    codes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.codes, dtype=np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "codes", c)

    def __len__(self):
        return self.codes.size


@dataclass(frozen=True)
class CorrelatorOutput:
    R_k: float
    S_k: Optional[float] = None
    J_k: Optional[float] = None
    N_k: Optional[float] = None


class ChannelOutput(NamedTuple):
    """Received samples and, separately, the three components that sum to them."""

    rx: np.ndarray
    signal: np.ndarray
    jam: np.ndarray
    noise: np.ndarray


def gen_th_code(n_frames: int, N_c: int, rng) -> ThCode:
    if N_c < 1:
        raise ValueError("N_c must be at least 1")
    return ThCode(rng.integers(0, N_c, n_frames))


def pulse_starts(bits, codes, cfg: ThConfig, with_data: bool = True) -> np.ndarray:
    """Sample index of every pulse, shape ``(n_bits, N_f)``, relative to its bit start."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    codes = np.asarray(codes, dtype=np.int64).reshape(bits.size, cfg.N_f)
    starts = np.arange(cfg.N_f) * cfg.frame_samples + codes * cfg.chip_samples
    if with_data:
        starts = starts + bits[:, None] * cfg.delta_samples
    return np.ascontiguousarray(starts, dtype=np.int64)


def modulate(bits, code: ThCode, w: Waveform, cfg: ThConfig) -> np.ndarray:
    """Sampled TH-PPM stream for ``bits``."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    if len(code) != bits.size * cfg.N_f:
        raise ValueError(f"code has {len(code)} entries, need {bits.size * cfg.N_f}")
    if np.any(code.codes < 0) or np.any(code.codes >= cfg.N_c):
        raise ValueError("TH code entry outside 0..N_c-1")
    if w.dt != cfg.dt:
        raise ValueError("waveform and link use different sampling intervals")
    if cfg.delta_samples + w.samples.size > cfg.chip_samples:
        raise ValueError("pulse plus PPM shift overflows the chip")
    L = cfg.bit_samples
    out = np.zeros((bits.size, L))
    pulses = np.ascontiguousarray(w.samples[None, :])
    kernels.ppm_synthesize(out, pulses, pulse_starts(bits, code.codes, cfg), 1.0)
    return out.ravel()


def apply_channel(
    tx,
    cfg: ThConfig,
    tau: float,
    jammer: JammerSpec,
    noise_sigma: float,
    rng,
    return_parts: bool = False,
):
    """``alpha * tx(t - tau) + tone(t) + noise``; output has ``tau/dt`` leading samples."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    n_tau = grid_count(tau, cfg.dt, "tau")
    tx = np.asarray(tx, dtype=np.float64).ravel()
    n = n_tau + tx.size
    signal = np.zeros(n)
    signal[n_tau:] = cfg.alpha * tx
    jam = stj_samples(jammer, 0.0, n, cfg.dt) if jammer.enabled else np.zeros(n)
    noise = noise_sigma * rng.standard_normal(n) if noise_sigma > 0 else np.zeros(n)
    rx = signal + jam + noise
    if return_parts:
        return ChannelOutput(rx, signal, jam, noise)
    return rx


def correlate(
    rx,
    tmpl: Template,
    code: ThCode,
    cfg: ThConfig,
    tau: float,
    k: int,
    parts: Optional[ChannelOutput] = None,
) -> CorrelatorOutput:
    """Correlator output for bit ``k``; pass ``parts`` for the S/J/N breakdown."""
    if isinstance(rx, ChannelOutput):
        parts, rx = rx, rx.rx
    rx = np.asarray(rx, dtype=np.float64).ravel()
    n_tau = grid_count(tau, cfg.dt, "tau")
    codes = code.codes[k * cfg.N_f : (k + 1) * cfg.N_f]
    if codes.size != cfg.N_f:
        raise ValueError(f"code too short for bit {k}")
    starts = n_tau + k * cfg.bit_samples + pulse_starts([0], codes, cfg, with_data=False)
    if n_tau + (k + 1) * cfg.bit_samples > rx.size:
        raise ValueError(f"received signal too short for bit {k}")
    T = np.ascontiguousarray(tmpl.samples[None, :])

    def corr(x):
        return float(kernels.ppm_correlate(np.ascontiguousarray(x[None, :]), T, starts, cfg.dt)[0])

    if parts is None:
        return CorrelatorOutput(corr(rx))
    return CorrelatorOutput(
        R_k=corr(rx), S_k=corr(parts.signal), J_k=corr(parts.jam), N_k=corr(parts.noise)
    )


def decide(out) -> int:
    """Bit 0 when ``R_k >= 0``, else bit 1."""
    r = out.R_k if isinstance(out, CorrelatorOutput) else out
    return 0 if r >= 0 else 1


def decide_many(R) -> np.ndarray:
    return (np.asarray(R) < 0).astype(np.int64)


def clipped_spectrum(rx_blocks, clean_blocks, K: float, dt: float):
    """Clipper rule in the frequency domain, row by row.

    Each row is zero-padded to a power of two. Bins whose periodogram exceeds
    ``lambda_C = K * max`` of the clean row's periodogram are scaled down to
    exactly ``lambda_C``, keeping their phase. Returns the clipped rfft rows,
    the per-row thresholds and the transform length.
    """
    if K <= 0:
        raise ValueError("K must be positive")
    rx_blocks = np.atleast_2d(np.asarray(rx_blocks, dtype=np.float64))
    clean_blocks = np.atleast_2d(np.asarray(clean_blocks, dtype=np.float64))
    if rx_blocks.shape != clean_blocks.shape:
        raise ValueError(
            f"block shapes differ: {rx_blocks.shape} vs {clean_blocks.shape}"
        )
    L = rx_blocks.shape[1]
    nfft = next_pow2(L)
    scale = periodogram_scale(L, dt)
    X = np.fft.rfft(rx_blocks, nfft, axis=1)
    P_rx = np.abs(X) ** 2 * scale
    P_th = np.abs(np.fft.rfft(clean_blocks, nfft, axis=1)) ** 2 * scale
    lam = K * np.max(P_th, axis=1, keepdims=True)
    over = P_rx > lam
    gain = np.ones_like(P_rx)
    gain[over] = np.sqrt(np.broadcast_to(lam, P_rx.shape)[over] / P_rx[over])
    return X * gain, lam[:, 0], nfft


def clip_blocks(rx_blocks, clean_blocks, K: float, dt: float) -> np.ndarray:
    """Frequency-domain clipper: apply :func:`clipped_spectrum` and return to time.

    The inverse transform is truncated to the original block length.
    """
    Xc, _, nfft = clipped_spectrum(rx_blocks, clean_blocks, K, dt)
    L = np.atleast_2d(rx_blocks).shape[1]
    return np.fft.irfft(Xc, nfft, axis=1)[:, :L]


def clip(rx, clean_tx_block, K: float, cfg: ThConfig) -> np.ndarray:
    """Clip bit-aligned blocks of ``rx`` against the clean transmitted blocks."""
    rx = np.asarray(rx, dtype=np.float64).ravel()
    clean = np.asarray(clean_tx_block, dtype=np.float64).ravel()
    L = cfg.bit_samples
    if rx.size != clean.size:
        raise ValueError(f"rx has {rx.size} samples but the clean block has {clean.size}")
    if rx.size % L:
        raise ValueError(f"signal length {rx.size} is not a whole number of bits ({L} samples)")
    out = clip_blocks(rx.reshape(-1, L), clean.reshape(-1, L), K, cfg.dt)
    return out.ravel()
