import json
import math

import numpy as np
import pytest

from ajwave import io as aio
from ajwave.designer import DesignProblem, design_eigen
from ajwave.harness import Axis, SimConfig, sweep


def test_coeff_file_roundtrip(tmp_path):
    res = design_eigen(DesignProblem(1.5e9))
    cf = aio.coeff_file_from_result(res, seed=3)
    path = tmp_path / "w.json"
    aio.write_coeff_file(path, cf)
    doc = json.loads(path.read_text())
    assert list(doc) == list(aio.COEFF_FIELDS)
    back = aio.read_coeff_file(path)
    assert back == cf
    assert aio.dumps_coeff_file(back) == path.read_text()


def test_coeff_file_rejects_bad_documents(tmp_path):
    path = tmp_path / "w.json"
    good = {"n": 2, "fhat_hz": 1e9, "tc_s": 1e-9, "coeffs": [1, 0], "cost": 0.0, "method": "eigen", "seed": 0}
    for bad in ({**good, "extra": 1}, {k: v for k, v in good.items() if k != "seed"}, {**good, "n": 3}):
        path.write_text(json.dumps(bad))
        with pytest.raises(ValueError):
            aio.read_coeff_file(path)


def test_sweep_csv_roundtrip(tmp_path):
    pts = sweep(SimConfig(n_bits=300, ebn0_db=3.0), "EbN0", [3.0, 4.5])
    text = aio.sweep_csv_text("EbN0", pts)
    lines = text.splitlines()
    assert lines[0] == ",".join(aio.SWEEP_HEADER)
    assert lines[1].startswith("EbN0,3.000000000000e+00,300,")
    path = tmp_path / "s.csv"
    path.write_text(text)
    assert aio.reserialize_csv(*aio.read_csv_rows(path)) == text


def test_grid_csv_has_frequency_columns():
    pts = sweep(SimConfig(n_bits=100, sjr_db=math.inf, ebn0_db=math.inf), Axis.GRID_2D, [1.5, 3.0])
    lines = aio.sweep_csv_text(Axis.GRID_2D, pts).splitlines()
    assert lines[0].endswith(",fhat_hz,fj_hz")
    assert len(lines) == 5
    assert lines[2].split(",")[-2:] == ["1.500000000000e+09", "3.000000000000e+09"]


def test_trace_csv():
    tr = {k: np.array([1.0, -2.0]) for k in ("R_k", "S_k", "J_k", "N_k", "tau_s")}
    lines = aio.trace_csv_text(tr).splitlines()
    assert lines[0] == "bit_index,R_k,S_k,J_k,N_k,tau_s"
    assert lines[2].startswith("1,-2.000000000000e+00")


def test_config_defaults_reproduce_reference_setup():
    cfg = aio.sim_config_from(aio.resolve_config())
    ref = SimConfig()
    assert cfg.th.T_c == pytest.approx(ref.th.T_c)
    assert cfg.th.dt == pytest.approx(ref.th.dt)
    assert (cfg.th.N_f, cfg.th.N_c) == (3, 4)
    assert cfg.th.delta == pytest.approx(0.5e-9)
    assert cfg.K == 1.2 and cfg.clipper
    assert cfg.f_J == pytest.approx(1.5e9)
    assert cfg.n_bits == 200_000


def test_config_flat_and_nested(tmp_path):
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps({"jammer.fj_ghz": 3.0, "mc.n_bits": 10}))
    nested = tmp_path / "nested.json"
    nested.write_text(json.dumps({"jammer": {"fj_ghz": 3.0}, "mc": {"n_bits": 10}}))
    assert aio.load_config(flat) == aio.load_config(nested)


def test_config_overrides_and_types():
    v = aio.resolve_config(overrides=["clipper.enabled=false", "link.ebn0_db=inf", "waveform.mode=doublet"])
    assert v["clipper.enabled"] is False
    assert v["link.ebn0_db"] == math.inf
    assert aio.sim_config_from(v).waveform_mode.value == "doublet"


@pytest.mark.parametrize(
    "doc",
    [
        {"jammer.freq": 1.0},
        {"th.nf": 2.5},
        {"clipper.enabled": "maybe"},
        {"waveform.mode": "sinc"},
        {"jammer.sjr_db": "loud"},
        {"th.tf_ns": 5.0},
    ],
)
def test_config_rejections(doc):
    with pytest.raises(aio.ConfigError):
        aio.sim_config_from(aio.resolve_config(doc))


def test_config_override_syntax():
    with pytest.raises(aio.ConfigError):
        aio.resolve_config(overrides=["mc.seed"])
