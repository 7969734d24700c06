"""Anti-jamming waveform design for TH-PPM links under single-tone jamming."""

from .designer import (
    DesignProblem,
    DesignResult,
    Method,
    cost_A,
    cost_F,
    design,
    design_eigen,
    design_powell,
    oracle_max_correlation,
)
from .harness import Axis, BerPoint, SimConfig, WaveformMode, run_ber, sweep
from .kernels import BACKEND
from .waveform import gaussian_doublet, make_rect_composite, make_template, normalize

__version__ = "0.1.0"

__all__ = [
    "Axis", "BACKEND", "BerPoint", "DesignProblem", "DesignResult", "Method", "SimConfig",
    "WaveformMode", "cost_A", "cost_F", "design", "design_eigen", "design_powell",
    "gaussian_doublet", "make_rect_composite", "make_template", "normalize",
    "oracle_max_correlation", "run_ber", "sweep",
]
