"""Self-check suite behind ``ajwave verify``.

Each check measures a residual and compares it with a tolerance. The report
prints every residual, so a tightened ``tol_scale`` shows how much headroom
each invariant has. ``mutation="flip-x-term"`` negates the first term of the
in-phase sum ``X`` in the closed-form cost; the oracle-equivalence check
must then fail, which shows the suite can see such a bug.
"""

from __future__ import annotations

import contextlib
import math
import sys
from dataclasses import dataclass, replace
from typing import Callable, Iterator

import numpy as np

from . import designer, kernels
from .designer import (
    DesignProblem,
    build_gram,
    cost_A,
    cost_F,
    design_eigen,
    design_powell,
    oracle_max_correlation,
)
from .harness import SimConfig, WaveformMode, run_ber, trace
from .jamming import FreqEstimatorModel, JammerSpec, sample_fhat, stj_samples
from .spectral import psd
from .txrx import ThConfig, ThCode, apply_channel, correlate, modulate
from .waveform import gaussian_doublet, make_rect_composite, make_template, normalize

MUTATIONS = ("flip-x-term",)

_T_C = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)


def _rel(a, b, floor=0.0) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


def _rand_f(rng, n, lo=0.1e9, hi=9.9e9):
    return rng.uniform(lo, hi, n)


# -- waveform / spectral -----------------------------------------------------


def check_rect_energy(rng):
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 9))
        a = rng.standard_normal(n)
        dt = _T_C / (2 * n) / int(rng.integers(1, 6))
        w = make_rect_composite(a, _T_C, dt)
        worst = max(worst, _rel(w.energy, _T_C / (2 * n) * np.sum(a**2)))
    return worst, 1e-12


def check_rect_resampling(rng):
    worst = 0.0
    for _ in range(20):
        n = 5
        a = rng.standard_normal(n)
        e = [make_rect_composite(a, _T_C, _T_C / (2 * n * m)).energy for m in (1, 2, 5, 10)]
        worst = max(worst, _rel(e, e[0]))
    return worst, 1e-9


def check_template_linearity(rng):
    w = normalize(gaussian_doublet())
    worst = 0.0
    for c in rng.uniform(-5, 5, 10):
        v1 = make_template(w.scaled(c), 0.5e-9, 1e-9).samples
        v2 = c * make_template(w, 0.5e-9, 1e-9).samples
        worst = max(worst, float(np.max(np.abs(v1 - v2))) / max(abs(c), 1e-300))
    return worst, 1e-12


def check_tone_psd(rng):
    dt = 0.02e-9
    L = 4096
    # integer number of periods in the record: f = k / (L dt)
    k = int(rng.integers(50, 1500))
    f = k / (L * dt)
    x = math.sqrt(2.0) * np.cos(2 * math.pi * f * np.arange(L) * dt + rng.uniform(0, 2 * math.pi))
    spec = psd(x, dt, L)
    return abs(float(np.sum(spec.psd) * spec.df) - 1.0), 1e-3


def check_parseval(rng):
    dt = 0.02e-9
    x = rng.standard_normal(600)
    spec = psd(x, dt, 1024)
    return _rel(np.sum(spec.psd) * spec.df, np.mean(x**2)), 1e-12


# -- designer ----------------------------------------------------------------


def check_quadratic_form(rng):
    worst = 0.0
    for f in _rand_f(rng, 50):
        # N >= 5 keeps the whole (0.1, 9.9) GHz range inside the band
        n = int(rng.integers(5, 10))
        a = rng.standard_normal(n)
        C = build_gram(DesignProblem(f, _T_C, n)).C
        lhs = cost_F(f, a, _T_C) ** 2
        rhs = cost_A(f, _T_C, n) ** 2 * float(a @ C @ a)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst, 1e-12


def check_scale_equivariance(rng):
    worst = 0.0
    for f in _rand_f(rng, 20):
        a = rng.standard_normal(5)
        c = rng.uniform(-10, 10)
        worst = max(worst, _rel(cost_F(f, c * a, _T_C), abs(c) * cost_F(f, a, _T_C)))
    return worst, 1e-12


def _oracle_template(a):
    n = len(a)
    w = make_rect_composite(a, _T_C, _T_C / (2 * n))
    return make_template(w, _T_C / 2, _T_C)


def check_oracle_equivalence(rng, n_pairs=100):
    worst = 0.0
    for f in _rand_f(rng, n_pairs):
        a = rng.standard_normal(5)
        closed = cost_F(f, a, _T_C)
        oracle = oracle_max_correlation(_oracle_template(a), f)
        # both are in seconds; compare in ns so the 1e-6 floor is meaningful
        worst = max(worst, abs(closed - oracle) / 1e-9 / max(oracle / 1e-9, 1e-6))
    return worst, 1e-3


def check_theta_invariance(rng, n_pairs=10):
    worst = 0.0
    for f in _rand_f(rng, n_pairs):
        tmpl = _oracle_template(rng.standard_normal(5))
        ref = oracle_max_correlation(tmpl, f)
        for th in rng.uniform(0, 2 * math.pi, 3):
            worst = max(worst, _rel(oracle_max_correlation(tmpl, f, th), ref))
    return worst, 1e-6


def check_gram_structure(rng):
    worst = 0.0
    for f in _rand_f(rng, 100):
        n = 5
        C = build_gram(DesignProblem(f, _T_C, n)).C
        w = designer.eigh_sorted(C)[0]
        lmax = w[-1]
        sym = float(np.max(np.abs(C - C.T)))
        toe = max(float(np.max(np.abs(np.diag(C, k) - C[0, k]))) for k in range(n))
        diag = float(np.max(np.abs(np.diag(C) - 1.0)))
        neg = max(0.0, -w[0] / lmax)
        # 1.0 when fewer than N-2 eigenvalues are numerically null
        small = int(np.count_nonzero(w <= 1e-10 * lmax))
        rank_def = 0.0 if small >= n - 2 else 1.0
        worst = max(worst, sym, toe, diag, neg, rank_def)
    return worst, 1e-12


def check_eigen_optimum(rng):
    worst = 0.0
    for f in _rand_f(rng, 50):
        worst = max(worst, design_eigen(DesignProblem(f, _T_C, 5)).cost / 1e-9)
    return worst, 1e-10


def check_solver_agreement(rng, n=50):
    worst = 0.0
    for f in _rand_f(rng, n):
        p = DesignProblem(f, _T_C, 5)
        pw = design_powell(p)
        if not pw.converged:
            return math.inf, 1e-8
        worst = max(worst, abs(pw.objective - design_eigen(p).objective))
    return worst, 1e-8


# -- jamming -----------------------------------------------------------------


def check_phase_periodicity(rng):
    spec = JammerSpec(2.3e9, rng.uniform(0, 2 * math.pi), 1.0)
    x = stj_samples(spec, 0.0, 1000, 0.02e-9)
    y = stj_samples(replace(spec, theta_J=spec.theta_J + 2 * math.pi), 0.0, 1000, 0.02e-9)
    # cos(u + 2 pi) is exact only up to the rounding of u + 2 pi
    return float(np.max(np.abs(x - y))), 1e-12


def check_time_shift(rng):
    worst = 0.0
    for _ in range(10):
        f = rng.uniform(0.1e9, 9.9e9)
        d = rng.uniform(0, 5e-9)
        spec = JammerSpec(f, 0.3, 2.0)
        a = stj_samples(spec, d, 600, 0.02e-9)
        b = stj_samples(replace(spec, theta_J=0.3 + 2 * math.pi * f * d), 0.0, 600, 0.02e-9)
        worst = max(worst, float(np.max(np.abs(a - b))) / spec.amplitude)
    return worst, 1e-12


def check_fhat_reproducible(rng):
    m = FreqEstimatorModel(0.1e9, 0.3e9)
    a = sample_fhat(m, 4.5e9, np.random.default_rng(7), 100)
    b = sample_fhat(m, 4.5e9, np.random.default_rng(7), 100)
    return float(np.max(np.abs(a - b))), 0.0


# -- txrx --------------------------------------------------------------------


def _link(rng, n_bits=20):
    cfg = ThConfig()
    w = normalize(gaussian_doublet(T_c=cfg.T_c))
    tmpl = make_template(w, cfg.delta, cfg.T_c)
    bits = rng.integers(0, 2, n_bits)
    code = ThCode(rng.integers(0, cfg.N_c, n_bits * cfg.N_f))
    return cfg, w, tmpl, bits, code


def check_decomposition(rng):
    cfg, w, tmpl, bits, code = _link(rng)
    tau = int(rng.integers(0, cfg.frame_samples)) * cfg.dt
    parts = apply_channel(
        modulate(bits, code, w, cfg), cfg, tau, JammerSpec(2.1e9, 0.4, 3.0), 2.0, rng,
        return_parts=True,
    )
    worst = 0.0
    for k in range(bits.size):
        o = correlate(parts, tmpl, code, cfg, tau, k)
        worst = max(worst, abs(o.S_k + o.J_k + o.N_k - o.R_k) / max(abs(o.R_k), 1e-300))
    return worst, 1e-9


def check_amplitude_equivariance(rng):
    cfg, w, tmpl, bits, code = _link(rng)
    c = 2.5
    cfg2 = replace(cfg, alpha=c * cfg.alpha)
    jam = JammerSpec(3.3e9, 0.0, 1.0)
    tx = modulate(bits, code, w, cfg)
    p1 = apply_channel(tx, cfg, 0.0, jam, 1.0, np.random.default_rng(3), return_parts=True)
    p2 = apply_channel(tx, cfg2, 0.0, jam, 1.0, np.random.default_rng(3), return_parts=True)
    worst = 0.0
    for k in range(bits.size):
        a = correlate(p1, tmpl, code, cfg, 0.0, k)
        b = correlate(p2, tmpl, code, cfg2, 0.0, k)
        worst = max(worst, _rel(b.S_k, c * a.S_k), abs(b.J_k - a.J_k), abs(b.N_k - a.N_k))
    return worst, 1e-9


def check_th_transparency(rng):
    cfg, w, tmpl, bits, code = _link(rng)
    other = ThCode(rng.integers(0, cfg.N_c, len(code)))
    off = JammerSpec(1e9, enabled=False)
    r1 = apply_channel(modulate(bits, code, w, cfg), cfg, 0.0, off, 0.0, rng)
    r2 = apply_channel(modulate(bits, other, w, cfg), cfg, 0.0, off, 0.0, rng)
    R1 = [correlate(r1, tmpl, code, cfg, 0.0, k).R_k for k in range(bits.size)]
    R2 = [correlate(r2, tmpl, other, cfg, 0.0, k).R_k for k in range(bits.size)]
    return _rel(R2, R1), 1e-9


def check_delta_structure(rng):
    """Simulated J_k equals the sum over frames of the template/tone correlation at Delta_m."""
    th = ThConfig()
    cfg = SimConfig(
        th=th, f_J=2.7e9, theta_J=0.9, sjr_db=-20.0, ebn0_db=math.inf,
        waveform_mode=WaveformMode.DOUBLET, clipper=False, n_bits=200, seed=11,
    )
    tr = trace(cfg)
    rng_c = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    rng_c.integers(0, 2, cfg.n_bits)
    codes = rng_c.integers(0, th.N_c, (cfg.n_bits, th.N_f))
    v = make_template(normalize(gaussian_doublet(1.0, th.T_p, th.T_p / 2, th.dt, th.T_c)), th.delta).samples
    amp = math.sqrt(2 * 10 ** (cfg.sjr_db / -10) * th.N_f / th.T_b)
    t_loc = np.arange(v.size) * th.dt
    J = np.zeros(cfg.n_bits)
    for b in range(cfg.n_bits):
        for m in range(th.N_f):
            delta_m = tr["tau_s"][b] + m * th.T_f + codes[b, m] * th.T_c
            J[b] += th.dt * float(v @ (amp * np.cos(2 * math.pi * cfg.f_J * (t_loc + delta_m) + cfg.theta_J)))
    return float(np.max(np.abs(J - tr["J_k"])) / np.max(np.abs(J))), 1e-9


# -- harness -----------------------------------------------------------------


def check_determinism(rng):
    cfg = SimConfig(n_bits=3000, seed=5, sjr_db=-15.0, ebn0_db=8.0, clipper=False)
    a, b = run_ber(cfg, 1), run_ber(cfg, 2)
    return (0.0 if a == b else 1.0), 0.0


def check_conservation(rng):
    cfg = SimConfig(n_bits=2500, seed=3, ebn0_db=3.0, waveform_mode=WaveformMode.DOUBLET)
    p = run_ber(cfg)
    bad = p.n_errors > p.n_bits or p.n_bits + p.n_aborted != cfg.n_bits
    return (1.0 if bad else 0.0), 0.0


def check_monotone_ebn0(rng):
    base = SimConfig(sjr_db=math.inf, n_bits=100_000, seed=1, clipper=False,
                     waveform_mode=WaveformMode.DOUBLET)
    hi = run_ber(replace(base, ebn0_db=15.0)).ber
    lo = run_ber(replace(base, ebn0_db=5.0)).ber
    # residual > 0 when the 15 dB point is not strictly better
    return (0.0 if hi < lo else 1.0 + hi - lo), 0.0


def check_link_nulling(rng):
    worst = 0.0
    for f in (1.5e9, 3.0e9, 6.6e9):
        cfg = SimConfig(f_J=f, sjr_db=-30.0, n_bits=2000, clipper=False, seed=2)
        p = run_ber(cfg, instrumented=True)
        worst = max(worst, p.mean_abs_J / p.mean_abs_S)
    return worst, 1e-3


# -- driver ------------------------------------------------------------------

Check = Callable[[np.random.Generator], tuple[float, float]]

FAST_CHECKS: list[tuple[str, Check]] = [
    ("waveform.rect_energy", check_rect_energy),
    ("waveform.rect_resampling", check_rect_resampling),
    ("waveform.template_linearity", check_template_linearity),
    ("spectral.tone_psd_integral", check_tone_psd),
    ("spectral.parseval", check_parseval),
    ("designer.quadratic_form", check_quadratic_form),
    ("designer.scale_equivariance", check_scale_equivariance),
    ("designer.oracle_equivalence", check_oracle_equivalence),
    ("designer.theta_invariance", check_theta_invariance),
    ("designer.gram_structure", check_gram_structure),
    ("designer.eigen_optimum_ns", check_eigen_optimum),
    ("designer.solver_agreement", check_solver_agreement),
    ("jamming.phase_periodicity", check_phase_periodicity),
    ("jamming.time_shift", check_time_shift),
    ("jamming.fhat_reproducible", check_fhat_reproducible),
    ("txrx.decomposition", check_decomposition),
    ("txrx.amplitude_equivariance", check_amplitude_equivariance),
    ("txrx.th_transparency", check_th_transparency),
    ("txrx.delta_structure", check_delta_structure),
]

MC_CHECKS: list[tuple[str, Check]] = [
    ("harness.determinism_workers", check_determinism),
    ("harness.conservation", check_conservation),
    ("harness.monotone_ebn0", check_monotone_ebn0),
    ("harness.link_nulling", check_link_nulling),
]


@contextlib.contextmanager
def injected(mutation: str | None) -> Iterator[None]:
    """Temporarily install a deliberate bug in the closed-form cost."""
    if mutation is None:
        yield
        return
    if mutation != "flip-x-term":
        raise ValueError(f"unknown mutation {mutation!r}")
    original = designer.xy_components

    def flipped(f, coeffs, T_c):
        a = np.asarray(coeffs, dtype=np.float64).ravel()
        ph = designer.segment_phases(f, T_c, a.size)
        c = np.cos(ph)
        c[0] = -c[0]
        return float(a @ c), float(a @ np.sin(ph))

    designer.xy_components = flipped
    try:
        yield
    finally:
        designer.xy_components = original


def collect(tol_scale: float = 1.0, mutation: str | None = None, quick: bool = False,
            seed: int = 20240611) -> list[CheckResult]:
    checks = FAST_CHECKS + ([] if quick else MC_CHECKS)
    results = []
    with injected(mutation):
        for i, (name, fn) in enumerate(checks):
            rng = np.random.default_rng([seed, i])
            residual, tol = fn(rng)
            results.append(CheckResult(name, float(residual), tol * tol_scale))
    return results


def run_checks(tol_scale: float = 1.0, mutation: str | None = None, quick: bool = False,
               stream=None) -> int:
    """Print one line per check; return 0 when every check passes, else 1."""
    stream = stream or sys.stdout
    print(f"kernel backend: {kernels.BACKEND}", file=stream)
    if mutation:
        print(f"injected mutation: {mutation}", file=stream)
    results = collect(tol_scale, mutation, quick)
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        print(f"{tag}  {r.name:<32s} residual={r.residual:.3e}  tol={r.tol:.3e}", file=stream)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed", file=stream)
    return 1 if n_fail else 0
