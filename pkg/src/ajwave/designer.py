"""Anti-jamming waveform design against a single tone.

A rect-composite pulse with weights ``a`` correlates with a tone at ``f``
with a worst-case (over timing offset) magnitude

    F(f, a) = |A(f)| * sqrt(X**2 + Y**2) = |A(f)| * sqrt(a' C a),

where ``C[i, j] = cos(pi f T_c |i - j| / N)``. Minimising ``a' C a`` on the
unit sphere is an eigenproblem. ``C`` has rank at most two, so for ``N >= 3``
the optimum is a perfect null.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .spectral import psd
from .waveform import DEFAULT_DT, Template, make_rect_composite, normalize


#: Published 5-segment designs (T_c = 1 ns), keyed by design frequency in GHz.
#: Rounded to three digits, so they are near-nulls rather than exact ones.
REFERENCE_W5 = {
    1.5: (-0.441, 0.717, -0.517, 0.013, 0.157),
    3.0: (0.487, 0.523, 0.656, 0.241, 0.032),
    6.6: (-0.282, 0.662, 0.197, 0.370, -0.554),
}


class Method(enum.Enum):
    EIGEN = "eigen"
    POWELL = "powell"


@dataclass(frozen=True)
class DesignProblem:
    """Design target: estimated tone ``fhat_J`` (Hz), chip ``T_c`` (s), ``N`` segments."""

    fhat_J: float
    T_c: float = 1e-9
    N: int = 5

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("need at least one rectangular segment")
        if self.T_c <= 0:
            raise ValueError("chip duration must be positive")
        if not 0.0 < self.fhat_J < self.band_edge:
            raise ValueError(
                f"estimated jammer frequency {self.fhat_J!r} Hz is outside the "
                f"design band (0, {self.band_edge!r}) Hz"
            )

    @property
    def band_edge(self) -> float:
        """``2N/T_c``, where the amplitude factor first vanishes."""
        return 2.0 * self.N / self.T_c


@dataclass(frozen=True, eq=False)
class CosineGram:
    C: np.ndarray
    fhat_J: float
    T_c: float

    @property
    def N(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True, eq=False)
class DesignResult:
    coeffs: np.ndarray
    fhat_J: float
    T_c: float
    cost: float
    method: Method
    iterations: int
    min_eigenvalue: float
    lagrange_lambda: float
    kkt_residual: float
    converged: bool = True

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def objective(self) -> float:
        """The quadratic form ``a' C a`` at the returned coefficients."""
        return self.lagrange_lambda


def cost_A(f, T_c: float, N: int):
    """Amplitude factor ``(2/(pi f)) sin(pi f T_c/2) sin(pi f T_c/(2N))`` in seconds.

    Vectorised over ``f``; the ``f -> 0`` limit is 0.
    """
    f = np.asarray(f, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (
            2.0
            / (math.pi * f)
            * np.sin(math.pi * f * T_c / 2.0)
            * np.sin(math.pi * f * T_c / (2.0 * N))
        )
    val = np.where(f == 0.0, 0.0, val)
    return float(val) if val.ndim == 0 else val


def segment_phases(f: float, T_c: float, N: int) -> np.ndarray:
    i = np.arange(1, N + 1)
    return (N - 1 + 2 * i) / (2.0 * N) * math.pi * f * T_c


def xy_components(f: float, coeffs, T_c: float) -> tuple[float, float]:
    """In-phase and quadrature sums ``X``, ``Y`` of the weighted segment phases."""
    a = np.asarray(coeffs, dtype=np.float64).ravel()
    ph = segment_phases(f, T_c, a.size)
    return float(a @ np.cos(ph)), float(a @ np.sin(ph))


def cost_F(fhat_J: float, coeffs, T_c: float) -> float:
    """Worst-case template/tone correlation magnitude (seconds) for raw weights."""
    a = np.asarray(coeffs, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError("need at least one coefficient")
    x, y = xy_components(fhat_J, a, T_c)
    return abs(cost_A(fhat_J, T_c, a.size)) * math.hypot(x, y)


def build_gram(problem: DesignProblem) -> CosineGram:
    k = np.arange(problem.N)
    lag = np.abs(k[:, None] - k[None, :])
    C = np.cos(math.pi * problem.fhat_J * problem.T_c * lag / problem.N)
    C.setflags(write=False)
    return CosineGram(C=C, fhat_J=problem.fhat_J, T_c=problem.T_c)


def eigh_sorted(C: np.ndarray, tol: float = 1e-14):
    """Jacobi eigenpairs with ascending eigenvalues; also returns the sweep count."""
    w, V, sweeps = kernels.jacobi_eigh(np.ascontiguousarray(C, dtype=np.float64), tol)
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(V[:, order]), sweeps


def _canonical_sign(a: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(a)))
    return -a if a[k] < 0 else a


def _kkt(C: np.ndarray, a: np.ndarray) -> tuple[float, float]:
    Ca = C @ a
    lam = float(a @ Ca)
    return lam, float(np.linalg.norm(Ca - lam * a))


def range_basis(problem: DesignProblem) -> np.ndarray:
    """Orthonormal basis (columns) of the range of ``C``.

    ``C[i, j] = cos(phi (i - j))`` expands to ``c c' + s s'`` with
    ``c = cos(phi i)`` and ``s = sin(phi i)``, so the range is spanned by
    ``c`` and ``s``. ``s`` is dropped when it is parallel to ``c`` to within
    rounding (``f T_c / N`` an integer), where the rank falls to one.
    """
    phi = math.pi * problem.fhat_J * problem.T_c / problem.N
    i = np.arange(problem.N)
    c, s = np.cos(phi * i), np.sin(phi * i)
    q1 = c / np.linalg.norm(c)
    r = s - q1 * (q1 @ s)
    r = r - q1 * (q1 @ r)
    nr = np.linalg.norm(r)
    if nr <= 1e-13 * math.sqrt(problem.N):
        return q1[:, None]
    return np.column_stack([q1, r / nr])


def design_eigen(problem: DesignProblem) -> DesignResult:
    """Minimise ``a' C a`` on the unit sphere through the eigen-decomposition of ``C``.

    The Jacobi eigenvalues certify the optimum (the smallest one is the
    minimum of ``a' C a``). For ``N >= 3`` that minimum is zero with an
    ``N - 2`` (or ``N - 1``) dimensional null space, so a canonical member
    is returned: project ``e_1, e_2, ...`` onto the complement of the range
    of ``C``, keep the first projection that does not vanish, and make the
    largest-magnitude entry positive. The range comes from the closed form in
    :func:`range_basis`, so the result does not depend on the rotation the
    eigen solver happened to pick inside the null space.
    """
    gram = build_gram(problem)
    C = gram.C
    n = problem.N
    w, V, sweeps = eigh_sorted(C)
    a = None
    if n >= 3:
        Q = range_basis(problem)
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            v = e - Q @ (Q.T @ e)
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                v = v / nv
                v = v - Q @ (Q.T @ v)
                a = v / np.linalg.norm(v)
                break
    if a is None:
        a = V[:, 0].copy()
    a = _canonical_sign(a)
    lam, res = _kkt(C, a)
    return DesignResult(
        coeffs=a,
        fhat_J=problem.fhat_J,
        T_c=problem.T_c,
        cost=cost_F(problem.fhat_J, a, problem.T_c),
        method=Method.EIGEN,
        iterations=abs(sweeps),
        min_eigenvalue=float(w[0]),
        lagrange_lambda=lam,
        kkt_residual=res,
        converged=sweeps >= 0,
    )


def design_powell(
    problem: DesignProblem,
    init: Optional[Sequence[float]] = None,
    tol: float = 1e-7,
    max_outer: int = 50,
    rng_seed: int = 0,
    max_inner: Optional[int] = None,
) -> DesignResult:
    """Powell's conjugate-direction search for the minimum of ``h(a) = a' C a``.

    Each outer pass resets the direction set to the unit vectors and runs
    Powell iterations (N golden-section line searches, drop the oldest
    direction, append ``p_N - p_0``, one more line search) until progress
    stalls. The iterate is then put back on the unit sphere. Outer passes
    repeat until the KKT residual ``||C a - lambda a||`` with
    ``lambda = a' C a`` is below ``tol * ||C||_2``.

    ``h`` is only resolved to rounding error, which floors the relative
    residual near ``sqrt(eps)``; a ``tol`` much below ``1e-7`` is not
    reachable. If ``max_outer`` runs out, the best iterate is returned with
    ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    C = np.ascontiguousarray(build_gram(problem).C)
    n = problem.N
    rng = np.random.default_rng(rng_seed)
    if init is None:
        a = np.zeros(n)
        a[0] = 1.0
    else:
        a = np.array(init, dtype=np.float64).ravel()
        if a.size != n:
            raise ValueError(f"init has {a.size} entries, expected {n}")
    norm = np.linalg.norm(a)
    if not norm > 0:
        raise ValueError("initial vector must be nonzero")
    a = a / norm
    max_inner = 4 * n if max_inner is None else max_inner
    w = eigh_sorted(C)[0]
    # C is positive semidefinite, so its largest eigenvalue is its 2-norm
    res_tol = tol * float(w[-1])

    best_a, (best_lam, best_res) = a, _kkt(C, a)
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        U = np.eye(n)
        for _ in range(max_inner):
            p0 = a
            h0 = float(p0 @ C @ p0)
            p = p0.copy()
            for k in range(n):
                g = kernels.line_minimize(C, p, U[k])
                p = p + g * U[k]
            d = p - p0
            if np.linalg.norm(d) < 1e-14:
                U = np.eye(n)
                a = p
                break
            U[:-1] = U[1:].copy()
            U[-1] = d
            g = kernels.line_minimize(C, p0, np.ascontiguousarray(d))
            a = p0 + g * d
            h1 = float(a @ C @ a)
            na = np.linalg.norm(a)
            if na == 0.0 or np.linalg.norm(C @ a) <= 0.01 * res_tol * na:
                break
            if h0 - h1 <= 1e-14 * h0:
                break
        na = np.linalg.norm(a)
        if not na > 1e-150:
            # the unconstrained descent collapsed onto the origin; restart
            a = rng.standard_normal(n)
            a /= np.linalg.norm(a)
            continue
        a = a / na
        lam, res = _kkt(C, a)
        if lam < best_lam or (lam == best_lam and res < best_res):
            best_a, best_lam, best_res = a, lam, res
        if res < res_tol:
            best_a, best_lam, best_res = a, lam, res
            converged = True
            break

    a = _canonical_sign(best_a)
    return DesignResult(
        coeffs=a,
        fhat_J=problem.fhat_J,
        T_c=problem.T_c,
        cost=cost_F(problem.fhat_J, a, problem.T_c),
        method=Method.POWELL,
        iterations=outer,
        min_eigenvalue=float(w[0]),
        lagrange_lambda=float(a @ C @ a),
        kkt_residual=best_res,
        converged=converged,
    )


def design(problem: DesignProblem, method: Method | str = Method.EIGEN, **kw) -> DesignResult:
    method = Method(method)
    if method is Method.EIGEN:
        return design_eigen(problem)
    return design_powell(problem, **kw)


def _oracle_nodes(template: Template, f_J: float, substeps: Optional[int]):
    """Trapezoid nodes and weights covering every sample cell of the template."""
    v = template.samples
    dt = template.dt
    if substeps is None:
        substeps = max(8, int(math.ceil(dt / (1.0 / f_J / 400))))
    frac = np.linspace(0.0, 1.0, substeps + 1)
    wts = np.full(substeps + 1, 1.0 / substeps)
    wts[0] = wts[-1] = 0.5 / substeps
    t = ((np.arange(v.size)[:, None] + frac[None, :]) * dt).ravel()
    weights = (v[:, None] * wts[None, :] * dt).ravel()
    keep = weights != 0.0
    return t[keep], weights[keep]


def template_tone_correlation(
    template: Template,
    f_J: float,
    z,
    theta_J: float = 0.0,
    substeps: Optional[int] = None,
):
    """Signed ``int v(t) cos(2 pi f (t + z) + theta) dt`` by the trapezoidal rule.

    Vectorised over ``z``. The rule runs inside each sample cell with
    ``substeps`` intervals (default: at least 400 per tone period).
    """
    if f_J <= 0:
        raise ValueError("tone frequency must be positive")
    t, weights = _oracle_nodes(template, f_J, substeps)
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if t.size == 0:
        return np.zeros(z.shape)
    return np.cos(2 * math.pi * f_J * (t[None, :] + z[:, None]) + theta_J) @ weights


def oracle_max_correlation(
    template: Template,
    f_J: float,
    theta_J: float = 0.0,
    grid_step: Optional[float] = None,
    substeps: Optional[int] = None,
) -> float:
    """Brute-force ``max_z |int v(t) cos(2 pi f (t + z) + theta) dt|``.

    The integral uses the trapezoidal rule inside every sample cell with
    enough sub-nodes to resolve the tone, and ``z`` is scanned over one
    tone period with step ``grid_step`` (default ``T_J/256``). The best grid
    point is then polished by golden-section search. Result in
    seconds times template units.
    """
    if f_J <= 0:
        raise ValueError("tone frequency must be positive")
    T_J = 1.0 / f_J
    if grid_step is None:
        grid_step = T_J / 256
    if grid_step > T_J / 200 * (1 + 1e-12):
        raise ValueError(f"grid_step {grid_step!r} s is coarser than T_J/200")
    t, weights = _oracle_nodes(template, f_J, substeps)
    if t.size == 0:
        return 0.0

    def corr(z):
        z = np.atleast_1d(z)
        return np.abs(np.cos(2 * math.pi * f_J * (t[None, :] + z[:, None]) + theta_J) @ weights)

    zs = np.arange(0.0, T_J, grid_step)
    vals = np.concatenate([corr(zs[i : i + 256]) for i in range(0, zs.size, 256)])
    k = int(np.argmax(vals))
    lo, hi = zs[k] - grid_step, zs[k] + grid_step
    best = float(vals[k])
    invphi = (math.sqrt(5) - 1) / 2
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = corr(x1)[0], corr(x2)[0]
    for _ in range(100):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = corr(x1)[0]
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = corr(x2)[0]
    return max(best, float(f1), float(f2))


def waveform_for(result: DesignResult, dt: float = DEFAULT_DT):
    """Unit-energy rect-composite pulse built from a design result."""
    return normalize(make_rect_composite(result.coeffs, result.T_c, dt))


@dataclass(frozen=True, eq=False)
class Spectrogram:
    fhat: np.ndarray
    freqs: np.ndarray
    psd: np.ndarray  # rows follow fhat

    def null_depth_db(self, row: int) -> float:
        """PSD at the row's design frequency relative to the row peak, in dB."""
        df = self.freqs[1] - self.freqs[0]
        k = int(round(self.fhat[row] / df))
        return float(10 * np.log10(self.psd[row, k] / np.max(self.psd[row])))


def design_spectrogram(
    f_grid,
    T_c: float = 1e-9,
    N: int = 5,
    nfft: int = 4096,
    dt: float = DEFAULT_DT,
    method: Method | str = Method.EIGEN,
) -> Spectrogram:
    """One PSD row per design frequency: the waveform designed for that frequency."""
    f_grid = np.asarray(f_grid, dtype=np.float64).ravel()
    if f_grid.size == 0:
        raise ValueError("empty frequency grid")
    rows = []
    freqs = None
    for f in f_grid:
        res = design(DesignProblem(float(f), T_c, N), method)
        spec = psd(waveform_for(res, dt).samples, dt, nfft)
        freqs = spec.freqs
        rows.append(spec.psd)
    return Spectrogram(fhat=f_grid, freqs=freqs, psd=np.vstack(rows))
