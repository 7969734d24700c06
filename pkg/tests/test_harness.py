import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _reference import replay_chunk
from ajwave.harness import (
    CHUNK_BITS,
    Axis,
    SimConfig,
    WaveformMode,
    calibrate_powers,
    point_config,
    run_ber,
    sweep,
    trace,
    wilson_interval,
)
from ajwave.jamming import FreqEstimatorModel


def test_wilson_reference_values():
    lo, hi = wilson_interval(10, 100)
    assert lo == pytest.approx(0.05522914, abs=1e-7)
    assert hi == pytest.approx(0.17436566, abs=1e-7)
    assert wilson_interval(0, 1000) == (0.0, 0.003)
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


@given(n=st.integers(1, 10**6), data=st.data())
def test_wilson_contains_estimate(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


def test_power_calibration():
    p = calibrate_powers(SimConfig(sjr_db=0.0, ebn0_db=15.0))
    assert p.E_b == 3.0
    assert p.P_J == pytest.approx(3.0 / 12e-9)
    assert p.N_0 == pytest.approx(3.0 * 10**-1.5)
    assert p.noise_sigma == pytest.approx(math.sqrt(p.N_0 / (2 * 0.02e-9)))
    assert calibrate_powers(SimConfig(sjr_db=math.inf)).P_J == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n_bits=0)
    with pytest.raises(ValueError):
        SimConfig(K=0.0)
    with pytest.raises(ValueError):
        SimConfig(waveform_mode="sinc")


@pytest.mark.parametrize("mode", list(WaveformMode))
def test_perfect_channel_has_no_errors(backend, mode):
    cfg = SimConfig(sjr_db=math.inf, ebn0_db=math.inf, waveform_mode=mode, n_bits=10_000)
    p = run_ber(cfg)
    assert (p.n_errors, p.n_bits, p.ber) == (0, 10_000, 0.0)
    assert p.ci95_high == pytest.approx(3e-4)


@pytest.mark.parametrize(
    "cfg",
    [
        SimConfig(n_bits=1500, seed=9, sjr_db=-15.0, ebn0_db=6.0, clipper=False),
        SimConfig(n_bits=400, seed=1, sjr_db=-20.0, ebn0_db=8.0, waveform_mode=WaveformMode.DOUBLET),
        SimConfig(n_bits=300, seed=2, f_J=4.5e9, ebn0_db=10.0, random_theta=True,
                  estimator=FreqEstimatorModel(0.1e9, 0.4e9)),
    ],
    ids=["optimized", "doublet-clip", "estimator-theta"],
)
def test_batched_path_matches_single_bit_replay(backend, cfg):
    bits, R_ref = replay_chunk(cfg, 0)
    n = bits.size
    if cfg.clipper:
        from ajwave import harness

        errs = harness._run_chunk(cfg, 0, n, False, False).n_errors
        assert errs == int(np.count_nonzero((R_ref < 0).astype(int) != bits))
    else:
        R = trace(replace(cfg, n_bits=n))["R_k"]
        np.testing.assert_allclose(R, R_ref, rtol=1e-9, atol=1e-9)


def test_chunks_are_independent_of_run_length():
    cfg = SimConfig(n_bits=2500, seed=4, sjr_db=-10.0, ebn0_db=10.0, clipper=False)
    long = trace(cfg)
    short = trace(replace(cfg, n_bits=CHUNK_BITS))
    np.testing.assert_array_equal(long["R_k"][:CHUNK_BITS], short["R_k"])


def test_determinism_across_workers():
    cfg = SimConfig(n_bits=4200, seed=77, sjr_db=-12.0, ebn0_db=7.0, clipper=True,
                    estimator=FreqEstimatorModel(0.0, 0.2e9), random_theta=True)
    assert run_ber(cfg, workers=1) == run_ber(cfg, workers=3)


def test_conservation():
    p = run_ber(SimConfig(n_bits=3000, ebn0_db=2.0, sjr_db=-5.0, seed=5,
                          waveform_mode=WaveformMode.DOUBLET))
    assert 0 < p.n_errors <= p.n_bits == 3000
    assert p.ci95_low <= p.ber <= p.ci95_high


def test_monotone_in_ebn0():
    base = SimConfig(sjr_db=math.inf, n_bits=100_000, seed=1, clipper=False)
    hi = run_ber(replace(base, ebn0_db=15.0))
    lo = run_ber(replace(base, ebn0_db=5.0))
    assert hi.ber < lo.ber


def test_theory_at_moderate_snr():
    # orthogonal PPM with unit-energy pulses: BER = Q(sqrt(Eb/N0))
    cfg = SimConfig(sjr_db=math.inf, ebn0_db=6.0, n_bits=40_000, seed=3, clipper=False)
    p = run_ber(cfg)
    theory = 0.5 * math.erfc(math.sqrt(10 ** 0.6) / math.sqrt(2))
    assert p.ci95_low <= theory <= p.ci95_high


def test_instrumented_nulling():
    for f in (1.5e9, 3.0e9, 6.6e9):
        p = run_ber(SimConfig(f_J=f, sjr_db=-30.0, n_bits=2000, clipper=False), instrumented=True)
        assert p.mean_abs_J <= 1e-3 * p.mean_abs_S


def test_instrumented_rejects_clipper():
    with pytest.raises(ValueError):
        run_ber(SimConfig(n_bits=10, clipper=True), instrumented=True)


def test_trace_columns():
    tr = trace(SimConfig(n_bits=50, clipper=False))
    assert set(tr) == {"R_k", "S_k", "J_k", "N_k", "tau_s"}
    np.testing.assert_allclose(tr["S_k"] + tr["J_k"] + tr["N_k"], tr["R_k"], rtol=1e-9, atol=1e-12)
    assert np.all((tr["tau_s"] >= 0) & (tr["tau_s"] < 4e-9))


def test_clamped_estimates_counted():
    cfg = SimConfig(n_bits=500, f_J=9.5e9, estimator=FreqEstimatorModel(0.0, 2e9), clipper=False)
    p = run_ber(cfg)
    assert p.clamp_count > 0
    assert p.n_bits + p.n_aborted == 500


def test_point_config_units():
    base = SimConfig()
    assert point_config(base, Axis.F_J, 3.0).f_J == 3e9
    assert point_config(base, "SJR", -20).sjr_db == -20
    assert point_config(base, Axis.EBN0, 5).ebn0_db == 5
    assert point_config(base, Axis.MU_EPS, 0.3).estimator.mu_eps == pytest.approx(0.3e9)
    assert point_config(base, Axis.SIGMA_EPS, 0.6).estimator.sigma_eps == pytest.approx(0.6e9)
    with pytest.raises(ValueError):
        point_config(base, Axis.GRID_2D, 1.0)


def test_sweep_shapes():
    base = SimConfig(n_bits=200, sjr_db=math.inf, ebn0_db=math.inf)
    pts = sweep(base, "SJR", [0, 10])
    assert [p.swept_value for p in pts] == [0.0, 10.0]
    grid = sweep(base, Axis.GRID_2D, [1.5, 3.0])
    assert len(grid) == 2 and all(len(r) == 2 for r in grid)
    assert grid[0][1].fhat_hz == 1.5e9 and grid[0][1].fj_hz == 3e9
    with pytest.raises(ValueError):
        sweep(base, "SJR", [])


def test_doublet_worse_than_optimized_under_strong_tone():
    # strong tone at 3 GHz, no clipper: the doublet collects jammer energy
    base = SimConfig(f_J=3e9, sjr_db=-30.0, ebn0_db=15.0, n_bits=20_000, seed=8, clipper=False)
    opt = run_ber(base)
    dbl = run_ber(replace(base, waveform_mode=WaveformMode.DOUBLET))
    assert dbl.ber >= 10 * max(opt.ber, 1 / opt.n_bits)
