"""Periodogram PSD estimates and the PSD CSV format."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided PSD; ``sum(psd) * df`` equals the record's mean power."""

    freqs: np.ndarray
    psd: np.ndarray
    df: float

    def at(self, f: float) -> float:
        """PSD of the bin containing ``f``."""
        k = int(round(f / self.df))
        if not 0 <= k < self.freqs.size:
            raise ValueError(f"frequency {f!r} Hz is outside the spectrum")
        return float(self.psd[k])


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def periodogram_scale(length: int, dt: float) -> float:
    """Two-sided scale turning ``|rfft|**2`` into power per hertz."""
    return dt / length


def psd(x, dt: float, nfft: int | None = None) -> Spectrum:
    """Rectangular-window one-sided periodogram.

    The record of length ``L`` is zero-padded to ``nfft`` (a power of two,
    default the next one). The mean power ``sum(x**2)/L`` is split across
    bins so that ``sum(psd) * df`` reproduces it exactly.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("empty signal")
    if nfft is None:
        nfft = next_pow2(x.size)
    if not _is_pow2(nfft) or nfft < x.size:
        raise ValueError(f"nfft must be a power of two >= {x.size}, got {nfft}")
    X = np.fft.rfft(x, nfft)
    p = np.abs(X) ** 2 * periodogram_scale(x.size, dt)
    # fold negative frequencies; DC and Nyquist have no mirror
    p[1 : nfft // 2] *= 2.0
    df = 1.0 / (nfft * dt)
    return Spectrum(freqs=np.arange(p.size) * df, psd=p, df=df)


def welch_psd(x, dt: float, block: int, nfft: int | None = None) -> Spectrum:
    """Average of per-block periodograms over consecutive, non-overlapping blocks."""
    x = np.asarray(x, dtype=np.float64).ravel()
    n_blocks = x.size // block
    if n_blocks < 1:
        raise ValueError("signal shorter than one block")
    spectra = [psd(x[i * block : (i + 1) * block], dt, nfft) for i in range(n_blocks)]
    mean = np.mean([s.psd for s in spectra], axis=0)
    return Spectrum(freqs=spectra[0].freqs, psd=mean, df=spectra[0].df)


def write_psd_csv(path, spec: Spectrum) -> None:
    lines = ["freq_hz,psd"]
    lines += [f"{f:.12e},{p:.12e}" for f, p in zip(spec.freqs, spec.psd)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_psd_csv(path) -> Spectrum:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    freqs, p = data[:, 0], data[:, 1]
    df = float(freqs[1] - freqs[0]) if freqs.size > 1 else 0.0
    return Spectrum(freqs=freqs, psd=p, df=df)
