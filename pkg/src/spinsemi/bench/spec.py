"""Experiment configuration: schema, TOML parsing, validation.

A config file is TOML with sections [experiment], [model], [observable],
[sweep], and optionally [series], [initial], [output].  The CLI subcommand
fixes the mode; a mode also present in the file must agree.  Every run is
reproducible from (config, seed): randomized inputs are drawn from a seeded
generator and the seed is echoed in all outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from ..errors import CapError, ConfigError
from ..lattice import LABEL_TO_COMPONENT
from ..quantum import DIMENSION_CAP

MODES = ("large-spin", "coherent", "mean-field", "classical")

Box = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class LatticeModelSpec:
    """Spin chain with nearest-neighbour exchange and a uniform field."""

    sites: int
    coupling: float
    field: tuple[float, float, float]


@dataclass(frozen=True)
class ContinuumModelSpec:
    """Zeeman term plus a short-range radial exchange kernel on a box."""

    dim: int
    box: Box
    field: tuple[float, float, float]
    exchange_radius: float | None
    exchange_amplitude: float


OBSERVABLE_PROFILES = ("uniform", "sine-squared")


@dataclass(frozen=True)
class ObservableSpec:
    site: int
    component: str  # ladder label: "+", "z" or "-"
    profile: str = "uniform"  # mean-field probe weight over the box


@dataclass(frozen=True)
class InitialSpec:
    """Product-state directions; None means seeded random unit vectors."""

    thetas: tuple[float, ...] | None = None
    phis: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str
    seed: int
    record_timing: bool
    t: float
    s_values: tuple[float, ...]
    h_values: tuple[float, ...]
    dt_values: tuple[float, ...]
    s_fixed: float
    tol: float
    n_steps: int
    dt: float
    model: LatticeModelSpec | ContinuumModelSpec
    observable: ObservableSpec
    initial: InitialSpec
    basename: str

    @property
    def param_name(self) -> str:
        return {"large-spin": "s", "coherent": "s", "mean-field": "h", "classical": "dt"}[
            self.mode
        ]

    @property
    def param_values(self) -> tuple[float, ...]:
        if self.mode in ("large-spin", "coherent"):
            return self.s_values
        if self.mode == "mean-field":
            return self.h_values
        return self.dt_values


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _as_float(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(f"{name} must be finite")
    return out


def _float_list(value, name: str) -> tuple[float, ...]:
    _require(isinstance(value, list) and len(value) > 0, f"{name} must be a non-empty list")
    return tuple(_as_float(v, name) for v in value)


def _valid_spin(s: float, name: str) -> float:
    two_s = 2.0 * s
    _require(s > 0 and abs(two_s - round(two_s)) < 1e-9, f"{name} = {s} is not a half-integer")
    return s


def _parse_vector3(value, name: str) -> tuple[float, float, float]:
    vec = _float_list(value, name)
    _require(len(vec) == 3, f"{name} must have three components")
    return vec  # type: ignore[return-value]


def _parse_lattice_model(model: dict) -> LatticeModelSpec:
    preset = model.get("preset", "heisenberg-chain")
    _require(preset == "heisenberg-chain", f"unknown lattice preset {preset!r}")
    sites = model.get("sites", 2)
    _require(isinstance(sites, int) and sites >= 1, "model.sites must be a positive integer")
    coupling = _as_float(model.get("coupling", 0.0), "model.coupling")
    field = _parse_vector3(model.get("field", [0.0, 0.0, 1.0]), "model.field")
    return LatticeModelSpec(sites, coupling, field)


def _parse_continuum_model(model: dict) -> ContinuumModelSpec:
    preset = model.get("preset", "heisenberg-continuum")
    _require(preset == "heisenberg-continuum", f"unknown continuum preset {preset!r}")
    dim = model.get("dim", 1)
    _require(isinstance(dim, int) and dim >= 1, "model.dim must be a positive integer")
    raw_box = model.get("box")
    _require(isinstance(raw_box, list) and len(raw_box) == dim, "model.box must list one [lo, hi] per dimension")
    box = []
    for entry in raw_box:
        pair = _float_list(entry, "model.box entry")
        _require(len(pair) == 2 and pair[0] < pair[1], "model.box entries must be [lo, hi] with lo < hi")
        box.append((pair[0], pair[1]))
    field = _parse_vector3(model.get("field", [0.0, 0.0, 0.0]), "model.field")
    radius = model.get("exchange_radius")
    if radius is not None:
        radius = _as_float(radius, "model.exchange_radius")
        _require(radius > 0, "model.exchange_radius must be positive")
    amplitude = _as_float(model.get("exchange_amplitude", 0.0), "model.exchange_amplitude")
    if amplitude != 0.0:
        _require(radius is not None, "exchange_amplitude needs an exchange_radius")
    _require(
        any(field) or (radius is not None and amplitude != 0.0),
        "continuum model needs a field or an exchange kernel",
    )
    return ContinuumModelSpec(dim, tuple(box), field, radius, amplitude)


def _parse_observable(obs: dict, n_sites: int) -> ObservableSpec:
    site = obs.get("site", 0)
    _require(isinstance(site, int) and 0 <= site < n_sites, f"observable.site out of range [0, {n_sites})")
    comp = obs.get("component", "z")
    _require(comp in LABEL_TO_COMPONENT, "observable.component must be one of +, z, -")
    profile = obs.get("profile", "uniform")
    _require(
        profile in OBSERVABLE_PROFILES,
        f"observable.profile must be one of {', '.join(OBSERVABLE_PROFILES)}",
    )
    return ObservableSpec(site, comp, profile)


def _parse_initial(section: dict, n_sites: int) -> InitialSpec:
    thetas = section.get("theta")
    phis = section.get("phi")
    if thetas is None and phis is None:
        return InitialSpec()
    _require(thetas is not None and phis is not None, "initial needs both theta and phi lists")
    th = _float_list(thetas, "initial.theta")
    ph = _float_list(phis, "initial.phi")
    _require(len(th) == n_sites and len(ph) == n_sites, "initial angle lists must have one entry per site")
    return InitialSpec(th, ph)


def _check_dimension_cap(spec: ExperimentSpec) -> None:
    """Reject sweeps whose largest Hilbert space exceeds the global cap."""
    if spec.mode in ("large-spin", "coherent"):
        assert isinstance(spec.model, LatticeModelSpec)
        s_max = max(spec.s_values)
        dim = (int(round(2 * s_max)) + 1) ** spec.model.sites
        if dim > DIMENSION_CAP:
            raise CapError(f"requested Hilbert dimension {dim} exceeds the cap {DIMENSION_CAP}")
    elif spec.mode == "mean-field":
        assert isinstance(spec.model, ContinuumModelSpec)
        local = int(round(2 * spec.s_fixed)) + 1
        h_min = min(spec.h_values)
        n_sites = 1
        for lo, hi in spec.model.box:
            per_axis = len([n for n in range(int(math.floor(lo / h_min)) + 1, int(math.ceil(hi / h_min)) + 1) if lo < n * h_min < hi])
            n_sites *= max(per_axis, 1)
        if local**n_sites > DIMENSION_CAP:
            raise CapError(
                f"finest grid needs Hilbert dimension {local**n_sites} > cap {DIMENSION_CAP}"
            )


def parse_spec(data: dict, mode: str, seed_override: int | None = None) -> ExperimentSpec:
    _require(mode in MODES, f"unknown mode {mode!r}")
    _require(isinstance(data, dict), "config root must be a table")

    experiment = data.get("experiment", {})
    file_mode = experiment.get("mode")
    if file_mode is not None:
        _require(file_mode == mode, f"config declares mode {file_mode!r} but the subcommand is {mode!r}")
    seed = experiment.get("seed", 0)
    _require(isinstance(seed, int) and seed >= 0, "experiment.seed must be a non-negative integer")
    if seed_override is not None:
        seed = seed_override
    record_timing = experiment.get("record_timing", False)
    _require(isinstance(record_timing, bool), "experiment.record_timing must be a boolean")

    sweep = data.get("sweep", {})
    t = _as_float(sweep.get("t", 0.3), "sweep.t")

    s_values: tuple[float, ...] = ()
    h_values: tuple[float, ...] = ()
    dt_values: tuple[float, ...] = ()
    s_fixed = 1.0
    if mode in ("large-spin", "coherent"):
        s_values = _float_list(sweep.get("s"), "sweep.s")
        s_values = tuple(_valid_spin(s, "sweep.s entry") for s in s_values)
    elif mode == "mean-field":
        h_values = _float_list(sweep.get("h"), "sweep.h")
        _require(all(h > 0 for h in h_values), "sweep.h entries must be positive")
        s_fixed = _valid_spin(_as_float(sweep.get("s", 1.0), "sweep.s"), "sweep.s")
    else:
        dt_values = _float_list(sweep.get("dt"), "sweep.dt")
        _require(all(d > 0 for d in dt_values), "sweep.dt entries must be positive")
        _require(t != 0.0, "classical convergence sweep needs t != 0")

    series = data.get("series", {})
    tol = _as_float(series.get("tol", 1e-6), "series.tol")
    _require(tol > 0, "series.tol must be positive")
    n_steps = series.get("n_steps", 0)
    _require(isinstance(n_steps, int) and n_steps >= 0, "series.n_steps must be a non-negative integer")
    dt = _as_float(series.get("dt", 1e-3), "series.dt")
    _require(dt > 0, "series.dt must be positive")

    model_section = data.get("model", {})
    if mode == "mean-field":
        model: LatticeModelSpec | ContinuumModelSpec = _parse_continuum_model(model_section)
        observable = _parse_observable(data.get("observable", {}), n_sites=1)
    else:
        model = _parse_lattice_model(model_section)
        observable = _parse_observable(data.get("observable", {}), n_sites=model.sites)

    n_sites = model.sites if isinstance(model, LatticeModelSpec) else 0
    initial = _parse_initial(data.get("initial", {}), n_sites) if n_sites else InitialSpec()

    output = data.get("output", {})
    basename = output.get("basename", mode)
    _require(isinstance(basename, str) and basename, "output.basename must be a non-empty string")

    spec = ExperimentSpec(
        mode=mode,
        seed=seed,
        record_timing=record_timing,
        t=t,
        s_values=s_values,
        h_values=h_values,
        dt_values=dt_values,
        s_fixed=s_fixed,
        tol=tol,
        n_steps=n_steps,
        dt=dt,
        model=model,
        observable=observable,
        initial=initial,
        basename=basename,
    )
    _check_dimension_cap(spec)
    return spec


def load_spec(path: str, mode: str, seed_override: int | None = None) -> ExperimentSpec:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse failure in {path}: {exc}") from exc
    return parse_spec(data, mode, seed_override)
