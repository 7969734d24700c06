"""File formats: coefficient files, sweep/spectrogram/trace CSVs and run configs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .designer import DesignResult, Spectrogram
from .harness import Axis, BerPoint, SimConfig, WaveformMode
from .jamming import FreqEstimatorModel
from .txrx import ThConfig

_FMT = "{:.12e}"

COEFF_FIELDS = ("n", "fhat_hz", "tc_s", "coeffs", "cost", "method", "seed")
SWEEP_HEADER = ("axis", "value", "n_bits", "n_errors", "ber", "ci_low", "ci_high", "seed", "clamp_count")
GRID_EXTRA = ("fhat_hz", "fj_hz")
TRACE_HEADER = ("bit_index", "R_k", "S_k", "J_k", "N_k", "tau_s")


class ConfigError(ValueError):
    pass


# -- coefficient files -------------------------------------------------------


@dataclass(frozen=True)
class CoeffFile:
    n: int
    fhat_hz: float
    tc_s: float
    coeffs: tuple[float, ...]
    cost: float  # worst-case correlation, seconds
    method: str
    seed: int


def coeff_file_from_result(res: DesignResult, seed: int = 0) -> CoeffFile:
    return CoeffFile(
        n=res.N,
        fhat_hz=float(res.fhat_J),
        tc_s=float(res.T_c),
        coeffs=tuple(float(c) for c in res.coeffs),
        cost=float(res.cost),
        method=res.method.value,
        seed=int(seed),
    )


def dumps_coeff_file(cf: CoeffFile) -> str:
    doc = {k: getattr(cf, k) for k in COEFF_FIELDS}
    doc["coeffs"] = list(cf.coeffs)
    return json.dumps(doc, indent=2) + "\n"


def write_coeff_file(path, cf: CoeffFile) -> None:
    Path(path).write_text(dumps_coeff_file(cf))


def read_coeff_file(path) -> CoeffFile:
    doc = json.loads(Path(path).read_text())
    missing = [k for k in COEFF_FIELDS if k not in doc]
    if missing:
        raise ValueError(f"{path}: missing fields {missing}")
    unknown = sorted(set(doc) - set(COEFF_FIELDS))
    if unknown:
        raise ValueError(f"{path}: unknown fields {unknown}")
    coeffs = tuple(float(c) for c in doc["coeffs"])
    if len(coeffs) != int(doc["n"]):
        raise ValueError(f"{path}: n={doc['n']} but {len(coeffs)} coefficients")
    return CoeffFile(
        n=int(doc["n"]),
        fhat_hz=float(doc["fhat_hz"]),
        tc_s=float(doc["tc_s"]),
        coeffs=coeffs,
        cost=float(doc["cost"]),
        method=str(doc["method"]),
        seed=int(doc["seed"]),
    )


# -- CSV ---------------------------------------------------------------------


def _fmt(x) -> str:
    return _FMT.format(float(x))


def sweep_csv_text(axis: Axis | str, points) -> str:
    """Sweep results as CSV; nested point lists (the 2-D grid) get the extra columns."""
    axis = Axis(axis)
    grid2d = axis is Axis.GRID_2D
    flat: list[BerPoint] = [p for row in points for p in row] if grid2d else list(points)
    header = SWEEP_HEADER + (GRID_EXTRA if grid2d else ())
    lines = [",".join(header)]
    for p in flat:
        cells = [
            axis.value, _fmt(p.swept_value), str(p.n_bits), str(p.n_errors), _fmt(p.ber),
            _fmt(p.ci95_low), _fmt(p.ci95_high), str(p.seed), str(p.clamp_count),
        ]
        if grid2d:
            cells += [_fmt(p.fhat_hz), _fmt(p.fj_hz)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def read_csv_rows(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:] if ln]


def reserialize_csv(header: list[str], rows: list[list[str]]) -> str:
    """Re-emit parsed CSV cells: integers stay integers, reals go through ``%.12e``."""
    out = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            try:
                int(cell)
            except ValueError:
                try:
                    cells.append(_fmt(float(cell)))
                except ValueError:
                    cells.append(cell)
            else:
                cells.append(cell)
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def spectrogram_csv_text(sg: Spectrogram) -> str:
    header = ["fhat_hz"] + [f"psd@{_fmt(f)}" for f in sg.freqs]
    lines = [",".join(header)]
    for fh, row in zip(sg.fhat, sg.psd):
        lines.append(",".join([_fmt(fh)] + [_fmt(v) for v in row]))
    return "\n".join(lines) + "\n"


def trace_csv_text(tr: Mapping[str, np.ndarray]) -> str:
    lines = [",".join(TRACE_HEADER)]
    for i in range(tr["R_k"].size):
        lines.append(
            ",".join([str(i)] + [_fmt(tr[k][i]) for k in TRACE_HEADER[1:]])
        )
    return "\n".join(lines) + "\n"


# -- run configuration -------------------------------------------------------

CONFIG_DEFAULTS: dict[str, Any] = {
    "th.tc_ns": 1.0,
    "th.tf_ns": 4.0,
    "th.nf": 3,
    "th.nc": 4,
    "th.delta_ns": 0.5,
    "th.tp_ns": 0.5,
    "th.dt_ns": 0.02,
    "th.alpha": 1.0,
    "jammer.fj_ghz": 1.5,
    "jammer.theta_rad": 0.0,
    "jammer.sjr_db": -10.0,
    "link.ebn0_db": 15.0,
    "waveform.mode": "optimized",
    "waveform.n": 5,
    "clipper.enabled": True,
    "clipper.k": 1.2,
    "estimator.mu_ghz": 0.0,
    "estimator.sigma_ghz": 0.0,
    "mc.n_bits": 200_000,
    "mc.seed": 0,
}

_INT_KEYS = {"th.nf", "th.nc", "waveform.n", "mc.n_bits", "mc.seed"}
_BOOL_KEYS = {"clipper.enabled"}
_STR_KEYS = {"waveform.mode"}


def _flatten(doc: Mapping, prefix: str = "") -> dict[str, Any]:
    flat = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def _coerce(key: str, value: Any) -> Any:
    if key in _BOOL_KEYS:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false", "1", "0", "yes", "no"):
            return value.lower() in ("true", "1", "yes")
        raise ConfigError(f"{key} must be a boolean, got {value!r}")
    if key in _STR_KEYS:
        return str(value)
    if key in _INT_KEYS:
        f = float(value)
        if not f.is_integer():
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(f)
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None
    if math.isnan(f):
        raise ConfigError(f"{key} is NaN")
    return f


def resolve_config(doc: Mapping | None = None, overrides: Iterable[str] = ()) -> dict[str, Any]:
    """Merge a (flat or nested) key map and ``key=value`` overrides over the defaults."""
    values = dict(CONFIG_DEFAULTS)
    given = _flatten(doc or {})
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        given[k.strip()] = v.strip()
    unknown = sorted(set(given) - set(CONFIG_DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for k, v in given.items():
        values[k] = _coerce(k, v)
    if values["waveform.mode"] not in {m.value for m in WaveformMode}:
        raise ConfigError(f"waveform.mode must be one of {[m.value for m in WaveformMode]}")
    return values


def load_config(path=None, overrides: Iterable[str] = ()) -> dict[str, Any]:
    doc = json.loads(Path(path).read_text()) if path else {}
    if not isinstance(doc, Mapping):
        raise ConfigError("config file must hold a JSON object")
    return resolve_config(doc, overrides)


def sim_config_from(values: Mapping[str, Any], random_theta: bool = False) -> SimConfig:
    ns, ghz = 1e-9, 1e9
    try:
        th = ThConfig(
            T_c=values["th.tc_ns"] * ns,
            T_f=values["th.tf_ns"] * ns,
            N_f=values["th.nf"],
            N_c=values["th.nc"],
            delta=values["th.delta_ns"] * ns,
            T_p=values["th.tp_ns"] * ns,
            dt=values["th.dt_ns"] * ns,
            alpha=values["th.alpha"],
        )
        return SimConfig(
            th=th,
            f_J=values["jammer.fj_ghz"] * ghz,
            theta_J=values["jammer.theta_rad"],
            sjr_db=values["jammer.sjr_db"],
            ebn0_db=values["link.ebn0_db"],
            waveform_mode=WaveformMode(values["waveform.mode"]),
            n_segments=values["waveform.n"],
            clipper=values["clipper.enabled"],
            K=values["clipper.k"],
            estimator=FreqEstimatorModel(
                mu_eps=values["estimator.mu_ghz"] * ghz,
                sigma_eps=values["estimator.sigma_ghz"] * ghz,
            ),
            n_bits=values["mc.n_bits"],
            seed=values["mc.seed"],
            random_theta=random_theta,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
