"""Continuum-limit apparatus: smeared spin observables on shrinking grids.

A smearing function f of arity p assigns a complex coefficient to a tuple of
p ladder indices and p points of R^d.  The associated observable

    M(f) = sum_{i_1..i_p} int dx_1..dx_p f_{i_1..i_p}(x_1..x_p)
           M_{i_1}(x_1) ... M_{i_p}(x_p)

is realized on the grid h Z^d intersected with an open box as the h^{pd}
weighted lattice sum, so classical integrals and quantum lattice operators
live on the same grid and are directly comparable.  Quantum generators carry
the scale h^d/s in this regime; expectations then track the classical values
with an O(h^d) gap at fixed s, which is what the error measurements here
resolve.

Conventions: smearing functions are symmetric under joint permutation of
(index, point) slots, vanish outside their declared support box, and satisfy
the reality condition conj(f_{i...}) = f_{conj(i)...} when they enter a
Hamilton function.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classical import (
    PolynomialObservable,
    SpinConfiguration,
    Trajectory,
    evaluate,
    flow,
)
from .coherent import ProductState
from .errors import ConfigError
from .lattice import (
    CONJUGATE_COMPONENT,
    EPSILON_ENTRIES,
    LADDER_COMPONENTS,
    Lattice,
    MultiIndex,
    Potential,
    closed_box_points,
)
from .quantum import (
    LatticeOperator,
    SpinRep,
    egorov_error,
    heisenberg_evolve,
    hilbert_dimension,
    propagator,
    quantize,
    quantize_hamiltonian,
)

MAX_SYMMETRIZE_ARITY = 6

# epsilon-tilde entries grouped by the third slot, for the harpoon contraction
def _entries_by_third() -> dict[int, tuple[tuple[int, int, float], ...]]:
    out: dict[int, tuple[tuple[int, int, float], ...]] = {}
    for i, j, k, v in EPSILON_ENTRIES:
        out[k] = out.get(k, ()) + ((i, j, v),)
    return out


_BY_THIRD = _entries_by_third()

Box = tuple[tuple[float, float], ...]


def _box_hull(a: Box, b: Box) -> Box:
    if len(a) != len(b):
        raise ValueError("support boxes have different dimensions")
    return tuple((min(la, lb), max(ha, hb)) for (la, ha), (lb, hb) in zip(a, b))


@dataclass(frozen=True)
class SmearingFunction:
    """Coefficient function of a smeared observable.

    ``func(comps, points)`` receives a tuple of ``arity`` ladder components
    and an (arity, dim) array of points and returns a complex value.  The
    function must vanish outside ``box``; ``range_radius`` optionally records
    a finite interaction range (value 0 whenever two arguments are farther
    apart).
    """

    arity: int
    dim: int
    func: Callable[[tuple[int, ...], np.ndarray], complex]
    box: Box
    range_radius: float | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("smearing functions need arity >= 1")
        if len(self.box) != self.dim:
            raise ValueError("support box does not match the dimension")

    def __call__(self, comps, points) -> complex:
        pts = np.asarray(points, dtype=float).reshape(self.arity, self.dim)
        return complex(self.func(tuple(comps), pts))


def symmetrize(f: SmearingFunction) -> SmearingFunction:
    """Average over joint permutations of the (index, point) slots."""
    p = f.arity
    if p > MAX_SYMMETRIZE_ARITY:
        raise ValueError(f"refusing to symmetrize arity {p} > {MAX_SYMMETRIZE_ARITY}")
    if p == 1:
        return f
    perms = list(itertools.permutations(range(p)))
    inv_count = 1.0 / len(perms)
    raw = f.func

    def sym(comps: tuple[int, ...], points: np.ndarray) -> complex:
        total = 0.0 + 0.0j
        for sigma in perms:
            total += raw(tuple(comps[a] for a in sigma), points[list(sigma)])
        return total * inv_count

    return SmearingFunction(p, f.dim, sym, f.box, f.range_radius, f.label)


def harpoon(f: SmearingFunction, g: SmearingFunction) -> SmearingFunction:
    """Contraction product with {M(f), M(g)} = p q M(f harpoon g).

    The unsymmetrized value is i sum_{i,j} eps~_{i j i1}
    f_{i i2..ip}(x1..xp) g_{j i_{p+1}..}(x1, x_{p+1}, ..); the first point is
    shared.  The result is symmetrized jointly over all p + q - 1 slots.
    """
    if f.dim != g.dim:
        raise ValueError("smearing functions live in different dimensions")
    p, q = f.arity, g.arity
    r = p + q - 1
    box = _box_hull(f.box, g.box)

    def raw(comps: tuple[int, ...], points: np.ndarray) -> complex:
        f_pts = points[:p]
        g_pts = np.concatenate([points[:1], points[p:]], axis=0)
        total = 0.0 + 0.0j
        for i, j, val in _BY_THIRD[comps[0]]:
            fa = f((i,) + comps[1:p], f_pts)
            if fa == 0.0:
                continue
            total += val * fa * g((j,) + comps[p:], g_pts)
        return 1j * total

    radius = None
    if f.range_radius is not None and g.range_radius is not None:
        radius = f.range_radius + g.range_radius
    out = SmearingFunction(r, f.dim, raw, box, radius)
    return symmetrize(out)


# ---------------------------------------------------------------------------
# Discrete norms


def _grid_coordinates(box: Box, h: float) -> np.ndarray:
    pts = closed_box_points(box, h)
    return np.asarray(pts, dtype=float) * h


def norm1_h(f: SmearingFunction, h: float, box: Box | None = None) -> float:
    """h^{pd} weighted absolute sum over the closed-box grid, all indices."""
    if h <= 0:
        raise ValueError("spacing must be positive")
    grid = _grid_coordinates(box or f.box, h)
    p, d = f.arity, f.dim
    total = 0.0
    for idx in itertools.product(range(len(grid)), repeat=p):
        pts = grid[list(idx)]
        for comps in itertools.product(LADDER_COMPONENTS, repeat=p):
            total += abs(f(comps, pts))
    return (h ** (p * d)) * total


def norm_inf1_h(f: SmearingFunction, h: float, box: Box | None = None) -> float:
    """sup over the first point of the h^{(p-1)d} weighted sum over the rest."""
    if h <= 0:
        raise ValueError("spacing must be positive")
    grid = _grid_coordinates(box or f.box, h)
    p, d = f.arity, f.dim
    best = 0.0
    for first in range(len(grid)):
        acc = 0.0
        for rest in itertools.product(range(len(grid)), repeat=p - 1):
            pts = grid[[first, *rest]]
            for comps in itertools.product(LADDER_COMPONENTS, repeat=p):
                acc += abs(f(comps, pts))
        best = max(best, acc)
    return (h ** ((p - 1) * d)) * best


# ---------------------------------------------------------------------------
# Hamilton functions


@dataclass(frozen=True)
class MeanFieldPotential:
    """Hamilton function H = sum_n M(V^(n)) given by its smearing kernels."""

    dim: int
    kernels: tuple[SmearingFunction, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.kernels:
            raise ValueError("empty mean-field potential")
        for k in self.kernels:
            if k.dim != self.dim:
                raise ValueError("kernel dimension mismatch")
        defect = self.reality_defect()
        if defect > 1e-8:
            raise ValueError(f"kernels violate the reality condition ({defect:.3g})")

    @property
    def box(self) -> Box:
        box = self.kernels[0].box
        for k in self.kernels[1:]:
            box = _box_hull(box, k.box)
        return box

    @property
    def max_arity(self) -> int:
        return max(k.arity for k in self.kernels)

    def reality_defect(self, n_axis: int = 3) -> float:
        """Largest |conj f_{i...}(x) - f_{conj i ...}(x)| on a probe grid."""
        worst = 0.0
        for k in self.kernels:
            h = max(hi - lo for lo, hi in k.box) / n_axis
            grid = _grid_coordinates(k.box, h)
            step = max(1, len(grid) // 4)
            probe = grid[::step]
            for idx in itertools.product(range(len(probe)), repeat=k.arity):
                pts = probe[list(idx)]
                for comps in itertools.product(LADDER_COMPONENTS, repeat=k.arity):
                    bar = tuple(CONJUGATE_COMPONENT[c] for c in comps)
                    worst = max(worst, abs(np.conj(k(comps, pts)) - k(bar, pts)))
        return worst


def meanfield_potential_norm(V: MeanFieldPotential, h: float) -> float:
    """Series norm sum_n n e^n |V^(n)|_{inf,1} at spacing h."""
    return sum(
        k.arity * math.exp(k.arity) * norm_inf1_h(k, h) for k in V.kernels
    )


# ---------------------------------------------------------------------------
# Discretization onto a lattice


def discretize(
    f: SmearingFunction, lattice: Lattice, weighted: bool = True
) -> PolynomialObservable:
    """Sample f on lattice point tuples as a polynomial observable.

    With ``weighted`` the coefficients carry the quadrature weight h^{pd}, so
    the polynomial evaluates to the Riemann sum for M(f); without it the raw
    samples are kept (the form quantized with h^d/s scaled generators).
    """
    if lattice.spacing is None:
        raise ValueError("discretization needs a lattice with a spacing")
    if lattice.dim != f.dim:
        raise ValueError("lattice dimension does not match the smearing function")
    h = lattice.spacing
    p = f.arity
    coords = lattice.coordinates()
    weight = h ** (p * lattice.dim) if weighted else 1.0
    terms: dict[MultiIndex, complex] = {}
    for idx in itertools.product(range(lattice.n_sites), repeat=p):
        pts = coords[list(idx)]
        sites = [lattice.sites[i] for i in idx]
        for comps in itertools.product(LADDER_COMPONENTS, repeat=p):
            val = f(comps, pts)
            if val == 0.0:
                continue
            alpha = MultiIndex([((site, comp), 1) for site, comp in zip(sites, comps)])
            terms[alpha] = terms.get(alpha, 0.0) + weight * val
    return PolynomialObservable(lattice, terms)


def effective_lattice_potential(V: MeanFieldPotential, lattice: Lattice) -> Potential:
    """Lattice potential h^{-d} sum_n discretize(V^(n)) generating the flow.

    The single h^{-d} compensates the grid Dirac delta in the bracket
    {M_i(x), M_j(y)} = i eps~ h^{-d} delta_{xy} M_k(x), so the ordinary
    lattice Poisson structure reproduces the continuum equations of motion.
    """
    if lattice.spacing is None:
        raise ValueError("mean-field potentials need a spaced grid")
    scale = lattice.spacing ** (-lattice.dim)
    terms: dict[MultiIndex, complex] = {}
    for k in V.kernels:
        for alpha, c in discretize(k, lattice).terms.items():
            terms[alpha] = terms.get(alpha, 0.0) + scale * c
    return Potential(lattice, terms, label=V.label or "mean-field")


# ---------------------------------------------------------------------------
# Spin fields


@dataclass(frozen=True)
class SpinField:
    """Classical field x -> closed unit ball of R^3, with its domain box."""

    func: Callable[[np.ndarray], np.ndarray]
    box: Box
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def sample(self, lattice: Lattice) -> SpinConfiguration:
        coords = lattice.coordinates()
        values = np.stack([self(x) for x in coords])
        return SpinConfiguration(lattice, values)

    @classmethod
    def constant(cls, direction, box: Box) -> "SpinField":
        m = np.asarray(direction, dtype=float)
        return cls(lambda x: m, box, label="constant")


def spin_wave_field(
    box: Box,
    theta0: float = 0.5,
    theta1: float = 1.0,
    phi0: float = 0.0,
    phi1: float = 2.0,
) -> SpinField:
    """Smooth unit field with polar angles linear in the first coordinate."""

    def func(x: np.ndarray) -> np.ndarray:
        u = float(np.atleast_1d(x)[0])
        th = theta0 + theta1 * u
        ph = phi0 + phi1 * u
        return np.array(
            [math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]
        )

    return SpinField(func, box, label="spin-wave")


def evaluate_observable(
    f: SmearingFunction, M: SpinField, h: float, box: Box | None = None
) -> complex:
    """Quadrature value of M(f) on the grid of spacing h.

    The modulus is bounded by norm1_h(f, h) since every |M_i(x)| <= 1.
    """
    lattice = Lattice.open_box_grid(box or M.box, h)
    return evaluate(discretize(f, lattice), M.sample(lattice))


# ---------------------------------------------------------------------------
# Quantization and dynamics


def quantize_smeared(
    f: SmearingFunction, rep: SpinRep, lattice: Lattice
) -> LatticeOperator:
    """Normal-ordered :S(f): = sum f(comps, sites) :S_{i1}(x1)..S_{ip}(xp):.

    ``rep`` is expected to carry the mean-field scale h^d/s; the h^{pd}
    quadrature weight then sits inside the p generator factors, so the raw
    (unweighted) samples are quantized.
    """
    hilbert_dimension(rep, lattice)
    return quantize(discretize(f, lattice, weighted=False), rep)


def continuum_flow(
    V: MeanFieldPotential,
    M0: SpinField,
    h: float,
    t: float,
    dt: float = 1e-3,
    record_every: int = 1,
) -> Trajectory:
    """Integrate the continuum equations of motion at grid resolution h."""
    lattice = Lattice.open_box_grid(V.box, h)
    W = effective_lattice_potential(V, lattice)
    return flow(W, M0.sample(lattice), t, dt=dt, record_every=record_every)


def meanfield_egorov_error(
    V: MeanFieldPotential,
    f: SmearingFunction,
    t: float,
    h: float,
    s: float,
    tol: float = 1e-8,
    evolved_classical: PolynomialObservable | None = None,
) -> float:
    """Operator-norm Egorov gap at grid spacing h and spin magnitude s.

    Both sides are built on the lattice h Z^d intersected with the open
    support box of V: the quantum side evolves :S(f): with the exact
    propagator of the quantized Hamilton function, the classical side pushes
    the sampled polynomial through the certified bracket series and is then
    quantized.  At fixed s the gap is dominated by the O(h^d) term.
    """
    lattice = Lattice.open_box_grid(V.box, h)
    W = effective_lattice_potential(V, lattice)
    A = discretize(f, lattice)
    rep = SpinRep.large_spin(s)
    return egorov_error(
        W, A, t, s, tol=tol, rep=rep, evolved_classical=evolved_classical
    )


def coherent_continuum_error(
    V: MeanFieldPotential,
    f: SmearingFunction,
    M0: SpinField,
    t: float,
    h: float,
    s: float,
    dt: float = 1e-3,
    fine_factor: int = 4,
) -> float:
    """|rho_M(U* :S(f): U) - A(M(t))| against a fine-grid classical reference.

    The quantum expectation is taken in the coherent product state sampled
    from M0 on the h-grid; the classical reference integrates the flow on a
    ``fine_factor`` times finer grid and evaluates the quadrature of f there.
    """
    lattice = Lattice.open_box_grid(V.box, h)
    W = effective_lattice_potential(V, lattice)
    rep = SpinRep.large_spin(s)
    hilbert_dimension(rep, lattice)
    state = ProductState.coherent(lattice, s, M0.sample(lattice))
    A_hat = quantize(discretize(f, lattice), rep)
    if t != 0.0:
        U = propagator(quantize_hamiltonian(W, rep), t)
        A_hat = heisenberg_evolve(A_hat, U)
    qside = state.expectation(A_hat)

    fine = Lattice.open_box_grid(V.box, h / fine_factor)
    W_fine = effective_lattice_potential(V, fine)
    M_t = flow(W_fine, M0.sample(fine), t, dt=dt).final
    cside = evaluate(discretize(f, fine), M_t)
    return abs(qside - cside)


# ---------------------------------------------------------------------------
# Narrow-kernel consistency of the exchange field


def exchange_taylor_residual(
    kernel: Callable[[float], float],
    radius: float,
    M0: SpinField,
    n_probe: int = 5,
    h_quad: float | None = None,
) -> tuple[float, float]:
    """Compare the nonlocal exchange field with its second-order local form.

    For a narrow radial kernel k and a smooth field M the convolution
    int k(|x-y|) M(y) dy equals c M(x) + alpha (Lap M)(x) + higher order,
    with c = int k and alpha = (1/2d) int k(|z|) |z|^2 dz.  Returns the
    largest probe-point residual of that comparison and the size of the
    Laplacian term (the scale the residual should be small against).
    """
    box = M0.box
    d = len(box)
    h = h_quad if h_quad is not None else radius / 24.0
    n_ball = math.ceil(radius / h)
    offsets = np.array(
        list(itertools.product(range(-n_ball, n_ball + 1), repeat=d)), dtype=float
    ) * h
    dists = np.linalg.norm(offsets, axis=1)
    weights = np.array([kernel(r) for r in dists]) * h**d
    c0 = float(weights.sum())
    alpha = float((weights * dists**2).sum()) / (2 * d)

    # probe points keep a margin so every quadrature node stays in the box
    margin = radius + 4 * h
    probes = []
    for k_i in range(n_probe):
        frac = (k_i + 0.5) / n_probe
        probes.append(
            np.array([lo + margin + frac * (hi - lo - 2 * margin) for lo, hi in box])
        )

    delta = radius / 6.0
    worst = 0.0
    scale = 0.0
    for x in probes:
        conv = np.zeros(3)
        for off, w in zip(offsets, weights):
            if w != 0.0:
                conv += w * M0(x + off)
        lap = np.zeros(3)
        for axis in range(d):
            e = np.zeros(d)
            e[axis] = delta
            lap += (M0(x + e) - 2.0 * M0(x) + M0(x - e)) / delta**2
        resid = conv - c0 * M0(x) - alpha * lap
        worst = max(worst, float(np.max(np.abs(resid))))
        scale = max(scale, float(np.max(np.abs(alpha * lap))))
    return worst, scale


# ---------------------------------------------------------------------------
# Kernel presets


def _inside(box: Box, pts: np.ndarray, tol: float = 1e-9) -> bool:
    for (lo, hi), col in zip(box, pts.T):
        if np.any(col < lo - tol) or np.any(col > hi + tol):
            return False
    return True


def cosine_bump(radius: float, amplitude: float) -> Callable[[float], float]:
    """Radial bump (a/2)(1 + cos(pi r / R)) supported on r < R."""
    if radius <= 0:
        raise ConfigError("kernel radius must be positive")

    def k(r: float) -> float:
        if r >= radius:
            return 0.0
        return 0.5 * amplitude * (1.0 + math.cos(math.pi * r / radius))

    return k


def field_smearing(dim: int, box: Box, b) -> SmearingFunction:
    """Arity-1 kernel of the Zeeman term -int b . M(x) dx, b constant."""
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise ConfigError("field vector must have three components")
    coeff = {
        0: -(b[0] - 1j * b[1]) / math.sqrt(2.0),  # +
        1: -complex(b[2]),  # z
        2: -(b[0] + 1j * b[1]) / math.sqrt(2.0),  # -
    }

    def func(comps: tuple[int, ...], pts: np.ndarray) -> complex:
        if not _inside(box, pts):
            return 0.0
        return coeff[comps[0]]

    return SmearingFunction(1, dim, func, box, label="field")


_EXCHANGE_PAIRS = {(0, 2), (2, 0), (1, 1)}  # (+,-), (-,+), (z,z)


def exchange_smearing(
    dim: int, box: Box, radius: float, amplitude: float
) -> SmearingFunction:
    """Arity-2 kernel of -1/2 int int J(|x-y|) M(x).M(y), J a cosine bump."""
    k = cosine_bump(radius, amplitude)

    def func(comps: tuple[int, ...], pts: np.ndarray) -> complex:
        if tuple(comps) not in _EXCHANGE_PAIRS:
            return 0.0
        if not _inside(box, pts):
            return 0.0
        r = float(np.linalg.norm(pts[0] - pts[1]))
        return complex(-0.5 * k(r))

    return SmearingFunction(2, dim, func, box, range_radius=radius, label="exchange")


def observable_smearing(dim: int, box: Box, comp: int, weight=None) -> SmearingFunction:
    """Arity-1 test observable: one ladder component against a scalar profile.

    ``weight`` is a scalar function of the point (default 1 on the box); the
    component must be z for the function to be real-valued on its own.
    """

    def func(comps: tuple[int, ...], pts: np.ndarray) -> complex:
        if comps[0] != comp:
            return 0.0
        if not _inside(box, pts):
            return 0.0
        return complex(1.0 if weight is None else weight(pts[0]))

    return SmearingFunction(1, dim, func, box, label="probe")


def heisenberg_meanfield(
    dim: int,
    box: Box,
    field_vector=None,
    exchange_radius: float | None = None,
    exchange_amplitude: float = 0.0,
) -> MeanFieldPotential:
    """Zeeman plus short-range isotropic exchange Hamilton function."""
    kernels: list[SmearingFunction] = []
    if field_vector is not None:
        kernels.append(field_smearing(dim, box, field_vector))
    if exchange_radius is not None and exchange_amplitude != 0.0:
        kernels.append(exchange_smearing(dim, box, exchange_radius, exchange_amplitude))
    if not kernels:
        raise ConfigError("mean-field model needs a field or an exchange kernel")
    return MeanFieldPotential(dim, tuple(kernels), label="heisenberg")
