"""Sweep execution and convergence-rate fitting.

Each mode measures one error per sweep parameter:

* large-spin: operator-norm Egorov gap versus the spin magnitude s,
* coherent: coherent-product-state expectation gap versus s,
* mean-field: operator-norm gap versus the grid spacing h at fixed s,
* classical: integrator self-convergence versus the step dt.

Sweep points are independent and may run on a thread pool; rows are
assembled in parameter order so concurrency never changes the output.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..classical import (
    PolynomialObservable,
    SpinConfiguration,
    evaluate,
    flow,
    propagate_observable,
)
from ..coherent import ProductState
from ..errors import ConfigError
from ..lattice import LABEL_TO_COMPONENT, Lattice, Potential, heisenberg_potential
from ..meanfield import (
    MeanFieldPotential,
    SmearingFunction,
    heisenberg_meanfield,
    meanfield_egorov_error,
    observable_smearing,
)
from ..quantum import (
    SpinRep,
    egorov_error,
    heisenberg_evolve,
    propagator,
    quantize,
    quantize_hamiltonian,
)
from .spec import ContinuumModelSpec, ExperimentSpec, LatticeModelSpec

NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log10 x, log10 error)."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class SweepPoint:
    param_name: str
    param_value: float
    t: float
    error: float
    fit_included: bool
    wall_ms: float


@dataclass(frozen=True)
class RunResult:
    rows: tuple[SweepPoint, ...]
    fit: RateFit | None
    fit_note: str
    meta: dict


def fit_rate(points) -> RateFit:
    """OLS fit of log10(error) against log10(parameter).

    Callers must pre-filter: at least three points, all errors above the
    noise floor.
    """
    pts = [(float(x), float(e)) for x, e in points]
    if len(pts) < 3:
        raise ValueError(f"rate fit needs at least 3 points, got {len(pts)}")
    if any(e <= NOISE_FLOOR for _, e in pts):
        raise ValueError("rate fit rejects errors at or below the noise floor")
    lx = np.log10([x for x, _ in pts])
    le = np.log10([e for _, e in pts])
    slope, intercept = np.polyfit(lx, le, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((le - pred) ** 2))
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), r2, len(pts))


# ---------------------------------------------------------------------------
# Model builders


def build_lattice_model(model: LatticeModelSpec) -> Potential:
    lattice = Lattice.chain(model.sites)
    coupling = None
    if model.coupling != 0.0 and model.sites > 1:
        J = np.zeros((model.sites, model.sites))
        for i in range(model.sites - 1):
            J[i, i + 1] = J[i + 1, i] = model.coupling
        coupling = J
    return heisenberg_potential(lattice, field_vectors=np.asarray(model.field), coupling=coupling)


def build_continuum_model(model: ContinuumModelSpec) -> MeanFieldPotential:
    field = model.field if any(model.field) else None
    return heisenberg_meanfield(
        model.dim,
        model.box,
        field_vector=field,
        exchange_radius=model.exchange_radius,
        exchange_amplitude=model.exchange_amplitude,
    )


def build_observable(spec: ExperimentSpec, lattice: Lattice) -> PolynomialObservable:
    comp = LABEL_TO_COMPONENT[spec.observable.component]
    site = lattice.sites[spec.observable.site]
    return PolynomialObservable.site_component(lattice, site, comp)


def build_probe(spec: ExperimentSpec) -> SmearingFunction:
    assert isinstance(spec.model, ContinuumModelSpec)
    comp = LABEL_TO_COMPONENT[spec.observable.component]
    weight = None
    if spec.observable.profile == "sine-squared":
        box = spec.model.box

        def weight(x):
            out = 1.0
            for (lo, hi), u in zip(box, x):
                out *= math.sin(math.pi * (u - lo) / (hi - lo)) ** 2
            return out

    return observable_smearing(spec.model.dim, spec.model.box, comp, weight=weight)


def initial_configuration(spec: ExperimentSpec, lattice: Lattice) -> SpinConfiguration:
    if spec.initial.thetas is not None:
        return SpinConfiguration.from_angles(lattice, spec.initial.thetas, spec.initial.phis)
    rng = np.random.default_rng(spec.seed)
    thetas = rng.uniform(0.3, math.pi - 0.3, size=lattice.n_sites)
    phis = rng.uniform(0.0, 2.0 * math.pi, size=lattice.n_sites)
    return SpinConfiguration.from_angles(lattice, thetas, phis)


# ---------------------------------------------------------------------------
# Mode drivers


def _sweep(values, worker, threads: int, record_timing: bool):
    """Map worker over values, keeping value order; returns (error, ms) pairs."""

    def timed(value):
        start = time.perf_counter()
        error = worker(value)
        ms = (time.perf_counter() - start) * 1e3 if record_timing else 0.0
        return error, ms

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(timed, values))
    return [timed(v) for v in values]


def _run_large_spin(spec: ExperimentSpec, threads: int):
    V = build_lattice_model(spec.model)
    A = build_observable(spec, V.lattice)
    evolved = propagate_observable(V, A, spec.t, spec.tol, n_steps=spec.n_steps)

    def worker(s: float) -> float:
        return egorov_error(V, A, spec.t, s, tol=spec.tol, evolved_classical=evolved)

    meta = {"observable_terms": evolved.n_terms()}
    return _sweep(spec.s_values, worker, threads, spec.record_timing), meta


def _run_coherent(spec: ExperimentSpec, threads: int):
    V = build_lattice_model(spec.model)
    A = build_observable(spec, V.lattice)
    M0 = initial_configuration(spec, V.lattice)

    # classical reference shared by every s: step-doubled check as in
    # coherent_egorov_error, so rows match the direct per-point call
    c1 = evaluate(A, flow(V, M0, spec.t, dt=spec.dt).final)
    c2 = evaluate(A, flow(V, M0, spec.t, dt=spec.dt / 2.0).final)
    c_ref = c2 if abs(c2 - c1) > spec.tol else c1

    def worker(s: float) -> float:
        rep = SpinRep.large_spin(s)
        state = ProductState.coherent(V.lattice, s, M0)
        U = propagator(quantize_hamiltonian(V, rep), spec.t)
        evolved = heisenberg_evolve(quantize(A, rep), U)
        return abs(state.expectation(evolved) - c_ref)

    meta = {"classical_reference": [c_ref.real, c_ref.imag]}
    return _sweep(spec.s_values, worker, threads, spec.record_timing), meta


def _run_mean_field(spec: ExperimentSpec, threads: int):
    V = build_continuum_model(spec.model)
    probe = build_probe(spec)

    def worker(h: float) -> float:
        return meanfield_egorov_error(V, probe, spec.t, h, spec.s_fixed, tol=spec.tol)

    meta = {"s": spec.s_fixed}
    return _sweep(spec.h_values, worker, threads, spec.record_timing), meta


def _run_classical(spec: ExperimentSpec, threads: int):
    V = build_lattice_model(spec.model)
    M0 = initial_configuration(spec, V.lattice)
    dt_ref = min(spec.dt_values) / 2.0
    reference = flow(V, M0, spec.t, dt=dt_ref).final.cartesian

    def worker(dt: float) -> float:
        final = flow(V, M0, spec.t, dt=dt).final.cartesian
        return float(np.max(np.linalg.norm(final - reference, axis=1)))

    meta = {"reference_dt": dt_ref}
    return _sweep(spec.dt_values, worker, threads, spec.record_timing), meta


_DRIVERS = {
    "large-spin": _run_large_spin,
    "coherent": _run_coherent,
    "mean-field": _run_mean_field,
    "classical": _run_classical,
}


def run(spec: ExperimentSpec, threads: int = 1) -> RunResult:
    if spec.mode not in _DRIVERS:
        raise ConfigError(f"unknown mode {spec.mode!r}")
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    values = spec.param_values
    results, meta = _DRIVERS[spec.mode](spec, threads)

    order = sorted(range(len(values)), key=lambda i: values[i])
    pairs = [(values[i], results[i][0]) for i in order]
    walls = [results[i][1] for i in order]

    fit: RateFit | None = None
    if len(pairs) < 3:
        note = "too-few-points"
    elif any(e <= NOISE_FLOOR for _, e in pairs):
        note = "noise-floor"
    else:
        fit = fit_rate(pairs)
        note = "ok"

    rows = tuple(
        SweepPoint(
            param_name=spec.param_name,
            param_value=value,
            t=spec.t,
            error=error,
            fit_included=fit is not None,
            wall_ms=wall,
        )
        for (value, error), wall in zip(pairs, walls)
    )
    meta = dict(meta)
    meta.update(
        {
            "mode": spec.mode,
            "seed": spec.seed,
            "t": spec.t,
            "tol": spec.tol,
            "param_name": spec.param_name,
            "fit_note": note,
        }
    )
    return RunResult(rows, fit, note, meta)
