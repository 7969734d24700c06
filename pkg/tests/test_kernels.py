import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ajwave import kernels

BACKENDS = kernels.available_backends()

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def sym_matrices(max_n=8):
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=finite).map(lambda m: (m + m.T) / 2)
    )


def test_backend_selection():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("name", BACKENDS)
@given(a=sym_matrices())
def test_jacobi_matches_lapack(name, a):
    impl = kernels.get_backend(name)
    w, V, sweeps = impl.jacobi_eigh(np.ascontiguousarray(a))
    assert sweeps >= 0
    scale = max(1.0, np.abs(a).max())
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-11 * scale)
    np.testing.assert_allclose(V.T @ V, np.eye(a.shape[0]), atol=1e-12)
    np.testing.assert_allclose(a @ V, V * w, atol=1e-10 * scale)


@pytest.mark.parametrize("name", BACKENDS)
def test_jacobi_accepts_read_only(name):
    a = np.diag([3.0, 1.0, 2.0])
    a.setflags(write=False)
    w, _, _ = kernels.get_backend(name).jacobi_eigh(a)
    assert sorted(w) == [1.0, 2.0, 3.0]


@pytest.mark.parametrize("name", BACKENDS)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 7))
def test_line_minimize_hits_analytic_minimizer(name, seed, n):
    # h(p + g u) is a parabola in g; its vertex is -u'Cp / u'Cu
    r = np.random.default_rng(seed)
    m = r.standard_normal((n, n))
    C = m @ m.T + 0.1 * np.eye(n)
    p, u = r.standard_normal(n), r.standard_normal(n)
    g = kernels.get_backend(name).line_minimize(C, p, u)
    g_star = -(u @ C @ p) / (u @ C @ u)
    h = lambda x: (p + x * u) @ C @ (p + x * u)
    assert h(g) <= h(g_star) + 1e-9 * max(1.0, abs(h(g_star)))


def _naive_synth(L, pulses, starts, gain):
    out = np.zeros((starts.shape[0], L))
    for b in range(starts.shape[0]):
        row = pulses[b if pulses.shape[0] > 1 else 0]
        for s in starts[b]:
            out[b, s : s + row.size] += gain * row
    return out


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("per_bit", [False, True])
def test_ppm_synthesize_matches_loop(name, per_bit, rng):
    n_bits, L, lp = 17, 600, 25
    pulses = rng.standard_normal((n_bits if per_bit else 1, lp))
    starts = np.sort(rng.integers(0, L - lp, (n_bits, 3)), axis=1).astype(np.int64)
    out = np.zeros((n_bits, L))
    kernels.get_backend(name).ppm_synthesize(out, pulses, starts, 1.7)
    np.testing.assert_allclose(out, _naive_synth(L, pulses, starts, 1.7), atol=1e-14)


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("per_bit", [False, True])
def test_ppm_correlate_matches_loop(name, per_bit, rng):
    n_bits, L, lt = 9, 600, 50
    rx = rng.standard_normal((n_bits, L))
    tmpl = rng.standard_normal((n_bits if per_bit else 1, lt))
    starts = rng.integers(0, L - lt, (n_bits, 3)).astype(np.int64)
    R = kernels.get_backend(name).ppm_correlate(rx, tmpl, starts, 0.02)
    ref = [
        0.02 * sum(rx[b, s : s + lt] @ tmpl[b if per_bit else 0] for s in starts[b])
        for b in range(n_bits)
    ]
    np.testing.assert_allclose(R, ref, rtol=1e-12, atol=1e-14)


def test_backends_agree_bitwise_on_design(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    C = np.cos(np.pi * 0.3 * np.abs(np.subtract.outer(np.arange(5), np.arange(5))))
    wc, Vc, _ = kernels.get_backend("cython").jacobi_eigh(C)
    wp, Vp, _ = kernels.get_backend("python").jacobi_eigh(C)
    np.testing.assert_allclose(np.sort(wc), np.sort(wp), atol=1e-14)
