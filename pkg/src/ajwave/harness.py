"""Seeded Monte Carlo BER engine and parameter sweeps.

A trial is one bit. It gets its own data bit, TH code, timing offset ``tau``
(uniform over one frame, on the grid), noise, and optionally jammer phase
and frequency estimate. Trials are generated in fixed-size chunks. Each
chunk draws from ``SeedSequence(seed, spawn_key=(chunk,))``, so results do
not depend on how chunks are spread over worker processes.
"""

from __future__ import annotations

import enum
import functools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .designer import DesignProblem, Method, design, waveform_for
from .jamming import FreqEstimatorModel, clamp_fhat, sample_fhat
from .txrx import ThConfig, clip_blocks, decide_many, pulse_starts
from .waveform import gaussian_doublet, normalize

log = logging.getLogger(__name__)

#: Trials per rng stream. Part of the reproducibility contract: changing it
#: changes every result.
CHUNK_BITS = 1000

_Z95 = 1.959963984540054


class WaveformMode(enum.Enum):
    OPTIMIZED = "optimized"
    DOUBLET = "doublet"


class Axis(enum.Enum):
    F_J = "f_J"
    SJR = "SJR"
    EBN0 = "EbN0"
    MU_EPS = "mu_eps"
    SIGMA_EPS = "sigma_eps"
    GRID_2D = "fhat_vs_fJ_grid"


@dataclass(frozen=True)
class SimConfig:
    """One BER operating point.

    In optimized mode the design frequency is ``fixed_fhat`` when given,
    otherwise ``f_J`` plus the estimator error.
    """

    th: ThConfig = field(default_factory=ThConfig)
    f_J: float = 1.5e9
    theta_J: float = 0.0
    sjr_db: float = -10.0
    ebn0_db: float = 15.0
    waveform_mode: WaveformMode = WaveformMode.OPTIMIZED
    n_segments: int = 5
    fixed_fhat: Optional[float] = None
    clipper: bool = True
    K: float = 1.2
    estimator: FreqEstimatorModel = field(default_factory=FreqEstimatorModel)
    n_bits: int = 200_000
    seed: int = 0
    random_theta: bool = False
    design_method: Method = Method.EIGEN

    def __post_init__(self):
        if self.n_bits < 1:
            raise ValueError("n_bits must be at least 1")
        if self.K <= 0:
            raise ValueError("clipper constant K must be positive")
        object.__setattr__(self, "waveform_mode", WaveformMode(self.waveform_mode))
        object.__setattr__(self, "design_method", Method(self.design_method))
        if self.waveform_mode is WaveformMode.OPTIMIZED:
            if abs(self.th.T_p - self.th.T_c / 2) > 1e-12 * self.th.T_c:
                raise ValueError("optimized waveforms need T_p = T_c/2")


@dataclass(frozen=True)
class Powers:
    E_b: float
    P_S: float
    P_J: float
    N_0: float
    noise_sigma: float


@dataclass(frozen=True)
class BerPoint:
    swept_value: float
    n_bits: int
    n_errors: int
    ber: float
    ci95_low: float
    ci95_high: float
    seed: int
    clamp_count: int = 0
    n_aborted: int = 0
    fhat_hz: Optional[float] = None
    fj_hz: Optional[float] = None
    mean_abs_S: Optional[float] = None
    mean_abs_J: Optional[float] = None
    mean_abs_N: Optional[float] = None


def wilson_interval(k: int, n: int) -> tuple[float, float]:
    """95% Wilson score interval; zero errors gives the rule-of-three bound ``[0, 3/n]``."""
    if n <= 0:
        raise ValueError("n must be positive")
    if k == 0:
        return 0.0, min(1.0, 3.0 / n)
    p = k / n
    z2 = _Z95 * _Z95
    denom = 1 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = _Z95 * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    # at k == n the upper bound is 1 exactly; rounding would leave it just below
    return max(0.0, centre - half), 1.0 if k == n else min(1.0, centre + half)


def calibrate_powers(cfg: SimConfig) -> Powers:
    """Jammer power and per-sample noise deviation for a unit-energy pulse."""
    th = cfg.th
    E_b = th.alpha**2 * th.N_f
    P_S = E_b / th.T_b
    # +inf dB gives exactly zero power
    P_J = P_S * 10 ** (-cfg.sjr_db / 10)
    N_0 = E_b * 10 ** (-cfg.ebn0_db / 10)
    return Powers(E_b=E_b, P_S=P_S, P_J=P_J, N_0=N_0, noise_sigma=math.sqrt(N_0 / (2 * th.dt)))


@functools.lru_cache(maxsize=256)
def _designed_pulse(fhat: float, T_c: float, N: int, method: Method, dt: float):
    res = design(DesignProblem(fhat, T_c, N), method)
    if not res.converged:
        return None
    return waveform_for(res, dt).samples


@functools.lru_cache(maxsize=16)
def _doublet_pulse(T_p: float, dt: float, T_c: float):
    return normalize(gaussian_doublet(1.0, T_p, T_p / 2, dt, T_c)).samples


@dataclass
class _ChunkResult:
    n_bits: int = 0
    n_errors: int = 0
    n_aborted: int = 0
    clamp_count: int = 0
    sum_abs: np.ndarray = field(default_factory=lambda: np.zeros(3))
    trace: Optional[dict] = None


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _run_chunk(cfg: SimConfig, chunk: int, n: int, instrumented: bool, keep_trace: bool):
    th = cfg.th
    dt = th.dt
    L = th.bit_samples
    powers = calibrate_powers(cfg)
    rng = _chunk_rng(cfg.seed, chunk)

    # draw order is part of the reproducibility contract
    bits = rng.integers(0, 2, n)
    codes = rng.integers(0, th.N_c, (n, th.N_f))
    tau_idx = rng.integers(0, th.frame_samples, n)
    theta = rng.uniform(0.0, 2 * math.pi, n) if cfg.random_theta else np.full(n, cfg.theta_J)
    fhat = None
    optimized = cfg.waveform_mode is WaveformMode.OPTIMIZED
    if optimized:
        if cfg.fixed_fhat is not None:
            fhat = float(cfg.fixed_fhat)
        else:
            fhat = sample_fhat(cfg.estimator, cfg.f_J, rng, None if cfg.estimator.is_deterministic else n)
    noise = rng.standard_normal((n, L)) * powers.noise_sigma if powers.noise_sigma > 0 else None

    out = _ChunkResult()
    valid = np.ones(n, dtype=bool)
    if optimized:
        band = 2.0 * cfg.n_segments / th.T_c
        fhat, out.clamp_count = clamp_fhat(fhat, band)
        if np.ndim(fhat) == 0:
            p = _designed_pulse(float(fhat), th.T_c, cfg.n_segments, cfg.design_method, dt)
            if p is None:
                valid[:] = False
                pulses = np.zeros((1, round(th.T_p / dt)))
            else:
                pulses = p[None, :]
        else:
            rows = []
            for i, f in enumerate(fhat):
                p = _designed_pulse(float(f), th.T_c, cfg.n_segments, cfg.design_method, dt)
                if p is None:
                    valid[i] = False
                    p = np.zeros(round(th.T_p / dt))
                rows.append(p)
            pulses = np.vstack(rows)
    else:
        pulses = _doublet_pulse(th.T_p, dt, th.T_c)[None, :]
    pulses = np.ascontiguousarray(pulses)

    lp = pulses.shape[1]
    D = th.delta_samples
    templates = np.zeros((pulses.shape[0], th.chip_samples))
    templates[:, :lp] += pulses
    templates[:, D : D + lp] -= pulses

    signal = np.zeros((n, L))
    kernels.ppm_synthesize(signal, pulses, pulse_starts(bits, codes, th), th.alpha)
    if powers.P_J > 0:
        t = (tau_idx[:, None] + np.arange(L)[None, :]) * dt
        jam = math.sqrt(2 * powers.P_J) * np.cos(2 * math.pi * cfg.f_J * t + theta[:, None])
    else:
        jam = None
    rx = signal.copy()
    if jam is not None:
        rx += jam
    if noise is not None:
        rx += noise
    if cfg.clipper:
        rx = np.ascontiguousarray(clip_blocks(rx, signal, cfg.K, dt))

    starts = pulse_starts(bits, codes, th, with_data=False)
    R = kernels.ppm_correlate(rx, templates, starts, dt)
    errors = (decide_many(R) != bits) & valid

    out.n_bits = int(np.count_nonzero(valid))
    out.n_errors = int(np.count_nonzero(errors))
    out.n_aborted = int(n - out.n_bits)
    if instrumented:
        zeros = np.zeros(n)

        def corr(x):
            return zeros if x is None else kernels.ppm_correlate(x, templates, starts, dt)

        S, J, N = corr(signal), corr(jam), corr(noise)
        out.sum_abs = np.array([np.abs(v[valid]).sum() for v in (S, J, N)])
        if keep_trace:
            out.trace = {
                "R_k": R[valid], "S_k": S[valid], "J_k": J[valid], "N_k": N[valid],
                "tau_s": tau_idx[valid] * dt,
            }
    return out


def _chunk_plan(n_bits: int) -> list[tuple[int, int]]:
    return [(c, min(CHUNK_BITS, n_bits - c * CHUNK_BITS)) for c in range(-(-n_bits // CHUNK_BITS))]


def _run_chunks(cfg: SimConfig, workers: int, instrumented: bool, keep_trace: bool = False):
    if instrumented and cfg.clipper:
        raise ValueError("the S/J/N breakdown is only defined without the (nonlinear) clipper")
    plan = _chunk_plan(cfg.n_bits)
    args = [(cfg, c, n, instrumented, keep_trace) for c, n in plan]
    if workers <= 1:
        return [_run_chunk(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_chunk, *zip(*args)))


def run_ber(
    cfg: SimConfig,
    workers: int = 1,
    instrumented: bool = False,
    swept_value: float = float("nan"),
) -> BerPoint:
    """Simulate ``cfg.n_bits`` trials and count bit errors.

    Trials whose waveform design fails to converge are excluded from
    ``n_bits`` and counted in ``n_aborted``.
    """
    parts = _run_chunks(cfg, workers, instrumented)
    n = sum(p.n_bits for p in parts)
    k = sum(p.n_errors for p in parts)
    aborted = sum(p.n_aborted for p in parts)
    if aborted:
        log.warning("%d trials aborted: waveform design did not converge", aborted)
    if n == 0:
        raise RuntimeError("every trial was aborted")
    lo, hi = wilson_interval(k, n)
    extra = {}
    if instrumented:
        sums = np.sum([p.sum_abs for p in parts], axis=0)
        extra = dict(mean_abs_S=sums[0] / n, mean_abs_J=sums[1] / n, mean_abs_N=sums[2] / n)
    return BerPoint(
        swept_value=swept_value,
        n_bits=n,
        n_errors=k,
        ber=k / n,
        ci95_low=lo,
        ci95_high=hi,
        seed=cfg.seed,
        clamp_count=sum(p.clamp_count for p in parts),
        n_aborted=aborted,
        fhat_hz=cfg.fixed_fhat,
        fj_hz=cfg.f_J,
        **extra,
    )


def trace(cfg: SimConfig, workers: int = 1) -> dict:
    """Per-bit correlator breakdown (no clipper): arrays R_k, S_k, J_k, N_k, tau_s."""
    parts = _run_chunks(cfg, workers, instrumented=True, keep_trace=True)
    return {key: np.concatenate([p.trace[key] for p in parts]) for key in parts[0].trace}


def point_config(cfg: SimConfig, axis: Axis | str, value: float) -> SimConfig:
    """``cfg`` with the swept quantity set; frequencies in GHz, ratios in dB."""
    axis = Axis(axis)
    if axis is Axis.F_J:
        return replace(cfg, f_J=value * 1e9)
    if axis is Axis.SJR:
        return replace(cfg, sjr_db=value)
    if axis is Axis.EBN0:
        return replace(cfg, ebn0_db=value)
    if axis is Axis.MU_EPS:
        return replace(cfg, estimator=replace(cfg.estimator, mu_eps=value * 1e9))
    if axis is Axis.SIGMA_EPS:
        return replace(cfg, estimator=replace(cfg.estimator, sigma_eps=value * 1e9))
    raise ValueError("the 2-D grid is handled by sweep()")


def sweep(
    cfg: SimConfig,
    axis: Axis | str,
    grid: Sequence[float],
    workers: int = 1,
):
    """One :class:`BerPoint` per grid value, all with the same seed.

    The 2-D axis returns a nested list ``[fhat][f_J]`` covering design
    frequency against true jammer frequency, both taken from ``grid`` (GHz).
    """
    axis = Axis(axis)
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("empty sweep grid")
    if axis is Axis.GRID_2D:
        rows = []
        for fh in grid:
            row = []
            for fj in grid:
                pc = replace(cfg, f_J=fj * 1e9, fixed_fhat=fh * 1e9,
                             waveform_mode=WaveformMode.OPTIMIZED)
                row.append(run_ber(pc, workers, swept_value=fj))
            rows.append(row)
        return rows
    return [run_ber(point_config(cfg, axis, v), workers, swept_value=v) for v in grid]
