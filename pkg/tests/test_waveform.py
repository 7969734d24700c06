import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from ajwave.designer import REFERENCE_W5
from ajwave.waveform import (
    DEFAULT_DT,
    SamplingGridError,
    doublet_value,
    gaussian_doublet,
    grid_count,
    make_rect_composite,
    make_template,
    normalize,
)

T_C = 1e-9
coeff_lists = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=10)


def test_grid_count():
    assert grid_count(1e-9, DEFAULT_DT) == 50
    with pytest.raises(SamplingGridError):
        grid_count(1.01e-9, DEFAULT_DT)


def test_single_segment_rect():
    w = make_rect_composite([1, 0, 0, 0, 0], T_C)
    # segment width T_c/(2N) = 0.1 ns = 5 samples
    assert w.samples.size == 25
    assert np.all(w.samples[:5] == 1.0)
    assert np.all(w.samples[5:] == 0.0)
    assert w.T_p == pytest.approx(0.5e-9)


def test_equal_weights_give_one_flat_rect():
    w = make_rect_composite(np.ones(5) / math.sqrt(5), T_C)
    np.testing.assert_allclose(w.samples, 1 / math.sqrt(5), rtol=1e-15)


def test_reference_waveform_shape():
    a = REFERENCE_W5[1.5]
    w = make_rect_composite(a, T_C)
    np.testing.assert_array_equal(w.samples.reshape(5, 5), np.repeat(np.array(a)[:, None], 5, axis=1))


def test_rect_rejects_bad_inputs():
    with pytest.raises(ValueError):
        make_rect_composite([], T_C)
    with pytest.raises(ValueError):
        make_rect_composite([1.0, np.nan], T_C)
    # 0.1 ns segments are not a multiple of 0.03 ns
    with pytest.raises(SamplingGridError):
        make_rect_composite(np.ones(5), T_C, 0.03e-9)


@given(coeffs=coeff_lists, sub=st.integers(1, 6))
def test_rect_energy_formula(coeffs, sub):
    n = len(coeffs)
    w = make_rect_composite(coeffs, T_C, T_C / (2 * n) / sub)
    expected = T_C / (2 * n) * sum(c * c for c in coeffs)
    assert w.energy == pytest.approx(expected, rel=1e-12, abs=1e-300)


@given(coeffs=st.lists(st.floats(-5, 5, allow_nan=False), min_size=5, max_size=5).filter(
    lambda c: sum(x * x for x in c) > 1e-6))
def test_rect_energy_resampling_invariant(coeffs):
    e = [make_rect_composite(coeffs, T_C, T_C / (10 * m)).energy for m in (1, 2, 5, 10)]
    np.testing.assert_allclose(e, e[0], rtol=1e-9)


def test_doublet_peak_at_centre():
    assert doublet_value(0.25e-9, 2.5, 0.5e-9, 0.25e-9) == pytest.approx(2.5)


def test_doublet_zero_crossings_symbolic():
    t, Tp, A = sp.symbols("t T_p A", positive=True)
    x = 2 * t / Tp
    roots = sp.solve(sp.Eq(1 - 4 * sp.pi * x**2, 0), t)
    assert len(roots) == 1
    # T_p / (4 sqrt(pi)); equals 1/(8 sqrt(pi)) ns only at T_p = 0.5 ns
    assert sp.simplify(roots[0] - Tp / (4 * sp.sqrt(sp.pi))) == 0
    z = float(roots[0].subs(Tp, 0.5e-9))
    assert doublet_value(0.25e-9 + z, 1.0, 0.5e-9, 0.25e-9) == pytest.approx(0.0, abs=1e-12)
    assert doublet_value(0.25e-9 - z, 1.0, 0.5e-9, 0.25e-9) == pytest.approx(0.0, abs=1e-12)


def test_doublet_sampled_at_cell_centres():
    w = gaussian_doublet()
    assert w.samples.size == 25
    np.testing.assert_allclose(w.samples, doublet_value(w.times, 1.0, 0.5e-9, 0.25e-9))
    # symmetric about T_m, which falls on a cell centre
    np.testing.assert_allclose(w.samples, w.samples[::-1], atol=1e-15)


def test_doublet_truncation_loss():
    # energy of the analytic pulse outside [0, T_p), relative to the total
    Tp, Tm = 0.5e-9, 0.25e-9
    t = np.linspace(Tm - 4 * Tp, Tm + 4 * Tp, 400001)
    v2 = doublet_value(t, 1.0, Tp, Tm) ** 2
    inside = (t >= 0) & (t < Tp)
    loss = v2[~inside].sum() / v2.sum()
    assert loss == pytest.approx(1.13e-4, rel=0.02)


def test_normalize_unit_energy_and_idempotent():
    w = normalize(gaussian_doublet(3.0))
    assert w.energy == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(normalize(w).samples, w.samples, rtol=1e-15)


def test_normalize_unit_rect_height():
    w = normalize(make_rect_composite([1.0], T_C))
    np.testing.assert_allclose(w.samples, 1 / math.sqrt(0.5e-9))


def test_normalize_reference_vector_scale():
    a = np.array(REFERENCE_W5[1.5])
    assert np.sum(a**2) == pytest.approx(1.0006, abs=1e-4)
    w = make_rect_composite(a, T_C)
    # unnormalized energy is (T_c/2N) sum(a^2); normalize divides by its root
    s = normalize(w).samples[0] / w.samples[0]
    assert s == pytest.approx(1 / math.sqrt(T_C / 10 * np.sum(a**2)))
    np.testing.assert_allclose(normalize(w).coeffs, a)


def test_normalize_rejects_zero():
    with pytest.raises(ValueError):
        normalize(make_rect_composite([0.0, 0.0], T_C))


@given(c=st.floats(-100, 100, allow_nan=False))
def test_template_linearity(c):
    w = normalize(gaussian_doublet())
    v1 = make_template(w.scaled(c), 0.5e-9, T_C).samples
    v2 = c * make_template(w, 0.5e-9, T_C).samples
    np.testing.assert_allclose(v1, v2, rtol=1e-14, atol=1e-300)


def test_template_zero_shift_is_zero():
    assert not np.any(make_template(normalize(gaussian_doublet()), 0.0, T_C).samples)


def test_template_disjoint_copies():
    w = normalize(gaussian_doublet())
    v = make_template(w, 0.5e-9, T_C)
    assert v.samples.size == 50
    assert v.energy == pytest.approx(2.0, rel=1e-12)
    np.testing.assert_array_equal(v.samples[:25], w.samples)
    np.testing.assert_array_equal(v.samples[25:], -w.samples)


def test_template_overflow_rejected():
    w = gaussian_doublet()
    with pytest.raises(ValueError):
        make_template(w, 0.6e-9, T_C)
    with pytest.raises(ValueError):
        make_template(w, -0.1e-9, T_C)
