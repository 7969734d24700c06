"""Slow single-bit replay of a harness chunk through the public link functions."""

import math

import numpy as np

from ajwave.designer import DesignProblem, design, waveform_for
from ajwave.harness import CHUNK_BITS, WaveformMode, _chunk_rng, calibrate_powers
from ajwave.jamming import JammerSpec, clamp_fhat, sample_fhat
from ajwave.txrx import ThCode, apply_channel, clip, correlate, modulate
from ajwave.waveform import gaussian_doublet, make_template, normalize


def replay_chunk(cfg, chunk=0):
    """Per-bit (bits, R_k) for one chunk, using modulate/apply_channel/clip/correlate."""
    th = cfg.th
    n = min(CHUNK_BITS, cfg.n_bits - chunk * CHUNK_BITS)
    pw = calibrate_powers(cfg)
    r = _chunk_rng(cfg.seed, chunk)
    bits = r.integers(0, 2, n)
    codes = r.integers(0, th.N_c, (n, th.N_f))
    taus = r.integers(0, th.frame_samples, n)
    theta = r.uniform(0, 2 * math.pi, n) if cfg.random_theta else np.full(n, cfg.theta_J)
    opt = cfg.waveform_mode is WaveformMode.OPTIMIZED
    if opt:
        if cfg.fixed_fhat is not None:
            fh = np.full(n, cfg.fixed_fhat)
        else:
            fh = np.broadcast_to(sample_fhat(cfg.estimator, cfg.f_J, r,
                                             None if cfg.estimator.is_deterministic else n), (n,))
        fh = clamp_fhat(np.array(fh, dtype=float), 2 * cfg.n_segments / th.T_c)[0]
    noise = r.standard_normal((n, th.bit_samples)) * pw.noise_sigma if pw.noise_sigma > 0 else None

    R = np.empty(n)
    for b in range(n):
        if opt:
            w = waveform_for(design(DesignProblem(float(fh[b]), th.T_c, cfg.n_segments), cfg.design_method), th.dt)
        else:
            w = normalize(gaussian_doublet(1.0, th.T_p, th.T_p / 2, th.dt, th.T_c))
        tmpl = make_template(w, th.delta, th.T_c)
        code = ThCode(codes[b])
        tx = modulate([bits[b]], code, w, th)
        tau = taus[b] * th.dt
        jam = JammerSpec(cfg.f_J, float(theta[b]), pw.P_J, enabled=pw.P_J > 0)
        rx = apply_channel(tx, th, tau, jam, 0.0, None)[taus[b]:]
        if noise is not None:
            rx = rx + noise[b]
        if cfg.clipper:
            rx = clip(rx, th.alpha * tx, cfg.K, th)
        R[b] = correlate(rx, tmpl, code, th, 0.0, 0).R_k
    return bits, R
