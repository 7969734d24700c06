"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``."""

import math

import numpy as np

_INVPHI = 0.6180339887498949


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigen-decomposition of a small symmetric matrix.

    Returns (eigenvalues, eigenvectors-as-columns, sweeps); eigenvalues unsorted.
    A negative sweep count means the sweep budget ran out.
    """
    m = np.array(a, dtype=np.float64, copy=True)
    n = m.shape[0]
    v = np.eye(n)
    fro = math.sqrt(float(np.sum(m * m)))
    offdiag = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps + 1):
        off = float(np.sum(m[offdiag] ** 2))
        if math.sqrt(off) <= tol * fro:
            return np.diag(m).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    # theta**2 would overflow; t -> 1/(2 theta)
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = m[:, p].copy(), m[:, q].copy()
                m[:, p] = c * cp - s * cq
                m[:, q] = s * cp + c * cq
                rp, rq = m[p, :].copy(), m[q, :].copy()
                m[p, :] = c * rp - s * rq
                m[q, :] = s * rp + c * rq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(m).copy(), v, -max_sweeps


def _quad(cm, p, u, g):
    x = p + g * u
    return float(x @ cm @ x)


def line_minimize(cm, p, u, step=1e-3, tol=1e-12, max_expand=200, max_iter=400):
    """Golden-section minimum of h(p + g*u), h(x) = x'Cx, bracketed by doubling."""
    if not np.any(u):
        return 0.0
    f0 = _quad(cm, p, u, 0.0)
    b = step
    fb = _quad(cm, p, u, b)
    if fb >= f0:
        b = -step
        fb = _quad(cm, p, u, b)
        if fb >= f0:
            if fb == f0 and _quad(cm, p, u, step) == f0:
                return 0.0
            lo, hi = -step, step
            b = 0.0
    if b != 0.0:
        a = 0.0
        for _ in range(max_expand):
            c = 2.0 * b
            fc = _quad(cm, p, u, c)
            if fc > fb:
                break
            a, b, fb = b, c, fc
        lo, hi = min(a, c), max(a, c)
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = _quad(cm, p, u, x1)
    f2 = _quad(cm, p, u, x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = _quad(cm, p, u, x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = _quad(cm, p, u, x2)
    return 0.5 * (lo + hi)


def ppm_synthesize(out, pulses, starts, gain):
    """out[b, s:s+len] += gain * pulse_b for every start s in starts[b]."""
    rows = np.arange(out.shape[0])[:, None]
    span = np.arange(pulses.shape[1])
    for m in range(starts.shape[1]):
        out[rows, starts[:, m, None] + span] += gain * pulses


def ppm_correlate(rx, templates, starts, dt):
    """R[b] = dt * sum over starts s of <rx[b, s:s+len], template_b>."""
    lt = templates.shape[1]
    idx = starts[:, :, None] + np.arange(lt)
    seg = np.take_along_axis(rx, idx.reshape(rx.shape[0], -1), axis=1)
    seg = seg.reshape(rx.shape[0], starts.shape[1], lt)
    return dt * np.einsum("bmj,bj->b", seg, np.broadcast_to(templates, (rx.shape[0], lt)))
