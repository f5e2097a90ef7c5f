"""Experiment harness: configs, sweeps, rate fits, CSV/SVG emission."""

from .emit import CSV_HEADER, emit, parse_csv, render_svg, write_csv
from .run import NOISE_FLOOR, RateFit, RunResult, SweepPoint, fit_rate, run
from .spec import (
    ContinuumModelSpec,
    ExperimentSpec,
    LatticeModelSpec,
    ObservableSpec,
    load_spec,
    parse_spec,
)

__all__ = [
    "CSV_HEADER",
    "NOISE_FLOOR",
    "ContinuumModelSpec",
    "ExperimentSpec",
    "LatticeModelSpec",
    "ObservableSpec",
    "RateFit",
    "RunResult",
    "SweepPoint",
    "emit",
    "fit_rate",
    "load_spec",
    "parse_csv",
    "parse_spec",
    "render_svg",
    "run",
    "write_csv",
]
