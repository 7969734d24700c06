"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row times one kernel on a representative workload (best of ``repeat``)
and reports the speed-up of the compiled backend.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from ajwave import kernels
from ajwave.designer import DesignProblem, build_gram, design_powell
from ajwave.harness import SimConfig, run_ber


def _workloads(rng):
    C5 = np.ascontiguousarray(build_gram(DesignProblem(2.7e9, 1e-9, 5)).C)
    m = rng.standard_normal((16, 16))
    S16 = np.ascontiguousarray(m + m.T)
    p, u = rng.standard_normal(5), rng.standard_normal(5)
    n_bits, L = 1000, 600
    pulses = rng.standard_normal((1, 25))
    starts = (np.arange(3) * 200 + rng.integers(0, 4, (n_bits, 3)) * 50).astype(np.int64)
    rx = rng.standard_normal((n_bits, L))
    tmpl = rng.standard_normal((1, 50))

    def synth(impl):
        out = np.zeros((n_bits, L))
        impl.ppm_synthesize(out, pulses, starts, 1.0)

    return {
        "jacobi_eigh 5x5": lambda impl: impl.jacobi_eigh(C5),
        "jacobi_eigh 16x16": lambda impl: impl.jacobi_eigh(S16),
        "line_minimize N=5": lambda impl: impl.line_minimize(C5, p, u),
        "ppm_synthesize 1000 bits": synth,
        "ppm_correlate 1000 bits": lambda impl: impl.ppm_correlate(rx, tmpl, starts, 0.02e-9),
    }


def _with_backend(name, fn):
    """Run ``fn`` with every library call routed through backend ``name``."""
    impl = kernels.get_backend(name)
    saved = {k: getattr(kernels, k) for k in ("jacobi_eigh", "line_minimize", "ppm_synthesize", "ppm_correlate")}
    try:
        for k in saved:
            setattr(kernels, k, getattr(impl, k))
        return fn()
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def _end_to_end():
    cfg = SimConfig(n_bits=5000, clipper=False, ebn0_db=8.0)
    return {
        "design_powell N=5": lambda: design_powell(DesignProblem(2.7e9, 1e-9, 5)),
        "run_ber 5000 bits": lambda: run_ber(cfg),
    }


def best_time(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1 << 16:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None, help="also write the results here")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the Python backend is available", file=sys.stderr)

    rows = []
    for name, work in _workloads(np.random.default_rng(0)).items():
        t = {b: best_time(lambda: work(kernels.get_backend(b)), args.repeat) for b in backends}
        rows.append((name, t))
    for name, fn in _end_to_end().items():
        t = {b: best_time(lambda: _with_backend(b, fn), max(1, args.repeat // 2)) for b in backends}
        rows.append((name, t))

    print(f"{'workload':<28s}" + "".join(f"{b:>14s}" for b in backends) + ("    speed-up" if len(backends) > 1 else ""))
    for name, t in rows:
        line = f"{name:<28s}" + "".join(f"{t[b] * 1e6:>11.1f} us" for b in backends)
        if len(backends) > 1:
            line += f"   {t['python'] / t['cython']:>8.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({name: t for name, t in rows}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
