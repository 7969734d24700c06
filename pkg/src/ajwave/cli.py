"""``ajwave`` command line: design, cost, spectrogram, psd, ber, trace, verify.

Frequencies are given in GHz and times in ns at this surface; everything is
converted to SI before it reaches the library.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as aio
from .designer import (
    DesignProblem,
    Method,
    cost_F,
    design,
    design_spectrogram,
    oracle_max_correlation,
)
from .harness import Axis, sweep, trace
from .spectral import psd, write_psd_csv
from .waveform import DEFAULT_DT, gaussian_doublet, make_rect_composite, make_template, normalize

GHZ = 1e9
NS = 1e-9


def parse_grid(text: str) -> list[float]:
    """``"1.5,3,6.6"`` or inclusive ``"start:stop:step"``; returns floats in the given unit."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"bad range grid {text!r}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- commands ----------------------------------------------------------------


def cmd_design(args) -> int:
    try:
        problem = DesignProblem(args.fhat * GHZ, args.tc * NS, args.n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    kw = {"rng_seed": args.seed} if args.method == "powell" else {}
    res = design(problem, args.method, **kw)
    _emit(aio.dumps_coeff_file(aio.coeff_file_from_result(res, args.seed)), args.out)
    print(
        f"cost={res.cost / NS:.6e} ns  h(a)={res.objective:.3e}  "
        f"kkt={res.kkt_residual:.2e}  iterations={res.iterations}",
        file=sys.stderr,
    )
    if not res.converged:
        print("error: solver did not converge", file=sys.stderr)
        return 1
    return 0


def cost_pair(cf: aio.CoeffFile, f_J: float) -> tuple[float, float]:
    """(closed form, oracle) worst-case correlation in seconds for raw coefficients."""
    closed = cost_F(f_J, cf.coeffs, cf.tc_s)
    # one sample per segment reproduces the rectangles exactly
    dt = cf.tc_s / (2 * cf.n)
    w = make_rect_composite(cf.coeffs, cf.tc_s, dt)
    oracle = oracle_max_correlation(make_template(w, cf.tc_s / 2), f_J)
    return closed, oracle


def cmd_cost(args) -> int:
    try:
        cf = aio.read_coeff_file(args.file)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    f_J = cf.fhat_hz if args.fj is None else args.fj * GHZ
    closed, oracle = cost_pair(cf, f_J)
    print(f"f_J={f_J / GHZ:.6g} GHz")
    print(f"closed_form_ns={closed / NS:.9e}")
    print(f"oracle_ns={oracle / NS:.9e}")
    return 0


def cmd_spectrogram(args, parser) -> int:
    try:
        grid = parse_grid(args.fgrid)
    except ValueError as exc:
        parser.error(str(exc))
    if not grid:
        parser.error("empty frequency grid")
    try:
        sg = design_spectrogram(
            np.array(grid) * GHZ, args.tc * NS, args.n, args.nfft, args.dt * NS, args.method
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(aio.spectrogram_csv_text(sg), args.out)
    return 0


def cmd_psd(args) -> int:
    dt = args.dt * NS
    if args.coeffs:
        cf = aio.read_coeff_file(args.coeffs)
        w = normalize(make_rect_composite(cf.coeffs, cf.tc_s, dt))
    else:
        w = normalize(gaussian_doublet(1.0, args.tp * NS, args.tp * NS / 2, dt))
    spec = psd(w.samples, dt, args.nfft)
    if args.out in (None, "-"):
        for f, p in zip(spec.freqs, spec.psd):
            print(f"{f:.12e},{p:.12e}")
    else:
        write_psd_csv(args.out, spec)
    return 0


def _sim_config(args):
    values = aio.load_config(args.config, args.set or ())
    return aio.sim_config_from(values, random_theta=args.random_theta)


def cmd_ber(args, parser) -> int:
    try:
        cfg = _sim_config(args)
        grid = parse_grid(args.grid)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not grid:
        parser.error("empty sweep grid")
    try:
        points = sweep(cfg, args.axis, grid, workers=args.workers)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(aio.sweep_csv_text(args.axis, points), args.out)
    return 0


def cmd_trace(args) -> int:
    try:
        cfg = _sim_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.clipper:
        print("note: clipper disabled for the correlator breakdown", file=sys.stderr)
        cfg = replace(cfg, clipper=False)
    _emit(aio.trace_csv_text(trace(cfg, workers=args.workers)), args.out)
    return 0


def cmd_verify(args) -> int:
    from .verify import run_checks

    return run_checks(tol_scale=args.tol_scale, mutation=args.inject_mutation, quick=args.quick)


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ajwave", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="design an N-segment waveform for one tone frequency")
    d.add_argument("--fhat", type=float, required=True, help="estimated jammer frequency, GHz")
    d.add_argument("--n", type=int, default=5, help="number of rectangular segments")
    d.add_argument("--tc", type=float, default=1.0, help="chip duration, ns")
    d.add_argument("--method", choices=[m.value for m in Method], default="eigen")
    d.add_argument("--seed", type=int, default=0, help="restart seed (powell)")
    d.add_argument("--out", default=None, help="coefficient file (default stdout)")

    c = sub.add_parser("cost", help="closed-form and brute-force cost of a coefficient file")
    c.add_argument("file")
    c.add_argument("--fj", type=float, default=None, help="tone frequency, GHz (default: design frequency)")

    s = sub.add_parser("spectrogram", help="PSD of the designed waveform for each grid frequency")
    s.add_argument("--fgrid", required=True, help="GHz, 'a,b,c' or 'start:stop:step'")
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--tc", type=float, default=1.0, help="ns")
    s.add_argument("--dt", type=float, default=DEFAULT_DT / NS, help="sample interval, ns")
    s.add_argument("--nfft", type=int, default=4096)
    s.add_argument("--method", choices=[m.value for m in Method], default="eigen")
    s.add_argument("--out", default=None)

    q = sub.add_parser("psd", help="PSD of a designed waveform or the Gaussian doublet")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--coeffs", help="coefficient file")
    src.add_argument("--doublet", action="store_true")
    q.add_argument("--tp", type=float, default=0.5, help="doublet duration, ns")
    q.add_argument("--dt", type=float, default=DEFAULT_DT / NS, help="ns")
    q.add_argument("--nfft", type=int, default=4096)
    q.add_argument("--out", default=None)

    for name, hlp in (("ber", "Monte Carlo BER sweep"), ("trace", "per-bit correlator breakdown")):
        b = sub.add_parser(name, help=hlp)
        b.add_argument("--config", default=None, help="JSON file with dotted keys")
        b.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        b.add_argument("--workers", type=int, default=1)
        b.add_argument("--random-theta", action="store_true", help="uniform jammer phase per bit")
        b.add_argument("--out", default=None)
        if name == "ber":
            b.add_argument("--axis", required=True, choices=[a.value for a in Axis])
            b.add_argument("--grid", required=True, help="GHz or dB; 'a,b,c' or 'start:stop:step' (use --grid=-10,0 for negative values)")

    v = sub.add_parser("verify", help="run the invariant checks")
    v.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    v.add_argument("--inject-mutation", choices=["flip-x-term"], default=None)
    v.add_argument("--quick", action="store_true", help="skip the Monte Carlo checks")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    cmd = args.command
    if cmd == "design":
        return cmd_design(args)
    if cmd == "cost":
        return cmd_cost(args)
    if cmd == "spectrogram":
        return cmd_spectrogram(args, parser)
    if cmd == "psd":
        return cmd_psd(args)
    if cmd == "ber":
        return cmd_ber(args, parser)
    if cmd == "trace":
        return cmd_trace(args)
    return cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
