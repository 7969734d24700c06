# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics mirror ``_pykernels`` exactly."""

from libc.math cimport sqrt, fabs

import numpy as np

cdef double _INVPHI = 0.6180339887498949


def jacobi_eigh(const double[:, ::1] a, double tol=1e-14, int max_sweeps=100):
    """Cyclic Jacobi eigen-decomposition of a small symmetric matrix.

    Returns (eigenvalues, eigenvectors-as-columns, sweeps); eigenvalues unsorted.
    A negative sweep count means the sweep budget ran out.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k, p, q
    cdef double[:, ::1] m = np.array(a, dtype=np.float64, copy=True)
    v_arr = np.eye(n)
    cdef double[:, ::1] v = v_arr
    cdef double fro = 0.0, off, theta, t, c, s, mkp, mkq, apq
    cdef int sweep
    for i in range(n):
        for j in range(n):
            fro += m[i, j] * m[i, j]
    fro = sqrt(fro)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += m[i, j] * m[i, j]
        if sqrt(off) <= tol * fro:
            return np.array([m[i, i] for i in range(n)]), v_arr, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    # theta**2 would overflow; t -> 1/(2 theta)
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    mkp = m[k, p]
                    mkq = m[k, q]
                    m[k, p] = c * mkp - s * mkq
                    m[k, q] = s * mkp + c * mkq
                for k in range(n):
                    mkp = m[p, k]
                    mkq = m[q, k]
                    m[p, k] = c * mkp - s * mkq
                    m[q, k] = s * mkp + c * mkq
                for k in range(n):
                    mkp = v[k, p]
                    mkq = v[k, q]
                    v[k, p] = c * mkp - s * mkq
                    v[k, q] = s * mkp + c * mkq
    return np.array([m[i, i] for i in range(n)]), v_arr, -max_sweeps


cdef double _quad(const double[:, ::1] cm, const double[::1] p, const double[::1] u, double g) noexcept:
    cdef Py_ssize_t n = p.shape[0], i, j
    cdef double acc = 0.0, row, xi
    for i in range(n):
        xi = p[i] + g * u[i]
        row = 0.0
        for j in range(n):
            row += cm[i, j] * (p[j] + g * u[j])
        acc += xi * row
    return acc


def line_minimize(const double[:, ::1] cm, const double[::1] p, const double[::1] u,
                  double step=1e-3, double tol=1e-12, int max_expand=200,
                  int max_iter=400):
    """Golden-section minimum of h(p + g*u), h(x) = x'Cx, bracketed by doubling."""
    cdef double f0, fa, fb, fc, a, b, c, lo, hi, x1, x2, f1, f2
    cdef int it
    cdef Py_ssize_t i
    cdef double unorm = 0.0
    for i in range(u.shape[0]):
        unorm += u[i] * u[i]
    if unorm == 0.0:
        return 0.0
    f0 = _quad(cm, p, u, 0.0)
    fb = _quad(cm, p, u, step)
    b = step
    if fb >= f0:
        fb = _quad(cm, p, u, -step)
        b = -step
        if fb >= f0:
            if fb == f0 and _quad(cm, p, u, step) == f0:
                return 0.0
            lo = -step
            hi = step
            b = 0.0
    if b != 0.0:
        a = 0.0
        fa = f0
        for it in range(max_expand):
            c = 2.0 * b
            fc = _quad(cm, p, u, c)
            if fc > fb:
                break
            a = b
            fa = fb
            b = c
            fb = fc
        lo = a if a < c else c
        hi = c if a < c else a
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = _quad(cm, p, u, x1)
    f2 = _quad(cm, p, u, x2)
    for it in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi = x2
            x2 = x1
            f2 = f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = _quad(cm, p, u, x1)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = _quad(cm, p, u, x2)
    return 0.5 * (lo + hi)


def ppm_synthesize(double[:, ::1] out, const double[:, ::1] pulses,
                   const long[:, ::1] starts, double gain):
    """out[b, s:s+len] += gain * pulse_b for every start s in starts[b]."""
    cdef Py_ssize_t nb = out.shape[0], npulse = starts.shape[1]
    cdef Py_ssize_t lp = pulses.shape[1]
    cdef bint shared = pulses.shape[0] == 1
    cdef Py_ssize_t b, m, j, s, row
    for b in range(nb):
        row = 0 if shared else b
        for m in range(npulse):
            s = starts[b, m]
            for j in range(lp):
                out[b, s + j] += gain * pulses[row, j]


def ppm_correlate(const double[:, ::1] rx, const double[:, ::1] templates,
                  const long[:, ::1] starts, double dt):
    """R[b] = dt * sum over starts s of <rx[b, s:s+len], template_b>."""
    cdef Py_ssize_t nb = rx.shape[0], npulse = starts.shape[1]
    cdef Py_ssize_t lt = templates.shape[1]
    cdef bint shared = templates.shape[0] == 1
    cdef Py_ssize_t b, m, j, s, row
    cdef double acc
    res = np.zeros(nb)
    cdef double[::1] r = res
    for b in range(nb):
        row = 0 if shared else b
        acc = 0.0
        for m in range(npulse):
            s = starts[b, m]
            for j in range(lt):
                acc += rx[b, s + j] * templates[row, j]
        r[b] = dt * acc
    return res
