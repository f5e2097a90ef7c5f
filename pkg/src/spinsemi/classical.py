"""Classical spin dynamics: observables, Poisson brackets, flows and series.

The phase space is a product of unit spheres, one per lattice site, with
Poisson structure {M_i(x), M_j(y)} = i eps_tilde(i,j,k) delta(x,y) M_k(x)
in ladder components.  Observables are polynomials in the M_i(x); time
evolution is available both as a Runge-Kutta integration of the Hamiltonian
flow and as the Lie-Schwinger bracket series with a certified truncation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import CapError, RadiusError
from .lattice import (
    FIRST_SLOT_ENTRIES,
    MINUS,
    PAIR_CONTRACTION,
    PLUS,
    ZEE,
    Lattice,
    MultiIndex,
    Potential,
    potential_norm,
)

_SQRT2 = math.sqrt(2.0)

SERIES_ORDER_CAP = 64
# target |tau| * norm(V) per certified series step; short steps keep the
# per-step order low so degree growth is pruned by the between-step truncation
_STEP_TARGET = 0.25


# ---------------------------------------------------------------------------
# Observables


@dataclass
class PolynomialObservable:
    """Polynomial in the classical spin variables with complex coefficients."""

    lattice: Lattice
    terms: dict[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for alpha, c in self.terms.items():
            c = complex(c)
            if c != 0:
                clean[alpha] = c
        self.terms = clean

    @classmethod
    def monomial(cls, lattice: Lattice, alpha: MultiIndex, coeff: complex = 1.0):
        return cls(lattice, {alpha: complex(coeff)})

    @classmethod
    def site_component(cls, lattice: Lattice, site, comp: int):
        return cls.monomial(lattice, MultiIndex.single(site, comp))

    @classmethod
    def zero(cls, lattice: Lattice):
        return cls(lattice, {})

    def coefficient(self, alpha: MultiIndex) -> complex:
        return self.terms.get(alpha, 0.0)

    def degree(self) -> int:
        return max((a.degree() for a in self.terms), default=0)

    def n_terms(self) -> int:
        return len(self.terms)

    def conjugate(self) -> "PolynomialObservable":
        return PolynomialObservable(
            self.lattice,
            {a.conjugate(): c.conjugate() for a, c in self.terms.items()},
        )

    def coeff_abs_sum(self) -> float:
        """Sum of |coefficients|; bounds the sup norm since |M^alpha| <= 1."""
        return float(sum(abs(c) for c in self.terms.values()))

    def weighted_norm(self, weight: float = math.e) -> float:
        """sum_alpha |c_alpha| * weight^{|alpha|}, the series tail prefactor."""
        return float(sum(abs(c) * weight ** a.degree() for a, c in self.terms.items()))

    def scaled(self, factor: complex) -> "PolynomialObservable":
        return PolynomialObservable(
            self.lattice, {a: factor * c for a, c in self.terms.items()}
        )

    def __add__(self, other: "PolynomialObservable") -> "PolynomialObservable":
        if self.lattice != other.lattice:
            raise ValueError("cannot add observables on different lattices")
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0.0) + c
        return PolynomialObservable(self.lattice, terms)

    def __sub__(self, other: "PolynomialObservable") -> "PolynomialObservable":
        return self + other.scaled(-1.0)


def _drop_smallest(
    terms: dict[MultiIndex, complex], budget: float, weight: float | None
) -> tuple[dict[MultiIndex, complex], float]:
    if budget <= 0 or not terms:
        return terms, 0.0
    if weight is None:
        mass = {alpha: abs(c) for alpha, c in terms.items()}
    else:
        mass = {alpha: abs(c) * weight ** alpha.degree() for alpha, c in terms.items()}
    order = sorted(terms.items(), key=lambda kv: mass[kv[0]])
    dropped = 0.0
    cut = 0
    for alpha, _c in order:
        if dropped + mass[alpha] > budget:
            break
        dropped += mass[alpha]
        cut += 1
    if cut == 0:
        return terms, 0.0
    return dict(order[cut:]), dropped


def truncate_observable(
    A: PolynomialObservable, budget: float, weight: float | None = None
) -> tuple[PolynomialObservable, float]:
    """Drop smallest-mass terms while the discarded mass stays within budget.

    With ``weight`` = None the mass of a term is |c|, bounding the sup-norm
    change of the observable itself.  A weight w > 1 uses |c| w^|alpha|, the
    measure that stays controlled under further bracket-series evolution, so
    truncation between propagation steps stays certified.  Returns the
    truncated observable and the mass dropped.
    """
    kept, dropped = _drop_smallest(A.terms, budget, weight)
    if dropped == 0.0:
        return A, 0.0
    return PolynomialObservable(A.lattice, kept), dropped


# ---------------------------------------------------------------------------
# Spin configurations


def cartesian_to_ladder(cart: np.ndarray) -> np.ndarray:
    cart = np.asarray(cart, dtype=float)
    out = np.empty(cart.shape[:-1] + (3,), dtype=complex)
    out[..., PLUS] = (cart[..., 0] + 1j * cart[..., 1]) / _SQRT2
    out[..., ZEE] = cart[..., 2]
    out[..., MINUS] = (cart[..., 0] - 1j * cart[..., 1]) / _SQRT2
    return out


def ladder_to_cartesian(lad: np.ndarray) -> np.ndarray:
    lad = np.asarray(lad, dtype=complex)
    out = np.empty(lad.shape[:-1] + (3,), dtype=float)
    out[..., 0] = ((lad[..., PLUS] + lad[..., MINUS]) / _SQRT2).real
    out[..., 1] = ((lad[..., PLUS] - lad[..., MINUS]) / (1j * _SQRT2)).real
    out[..., 2] = lad[..., ZEE].real
    return out


class SpinConfiguration:
    """Classical state: one vector M(x) (|M| <= 1) per lattice site."""

    def __init__(self, lattice: Lattice, cartesian, validate: bool = True):
        self.lattice = lattice
        cart = np.array(cartesian, dtype=float)
        if cart.shape != (lattice.n_sites, 3):
            raise ValueError(
                f"configuration must have shape ({lattice.n_sites}, 3); got {cart.shape}"
            )
        if validate:
            norms = np.linalg.norm(cart, axis=1)
            if np.any(norms > 1.0 + 1e-6):
                raise ValueError(f"spin vector of length {norms.max()} exceeds 1")
        self.cartesian = cart
        self._ladder: np.ndarray | None = None

    @property
    def ladder(self) -> np.ndarray:
        if self._ladder is None:
            self._ladder = cartesian_to_ladder(self.cartesian)
        return self._ladder

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.cartesian, axis=1)

    @classmethod
    def aligned(cls, lattice: Lattice, direction) -> "SpinConfiguration":
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls(lattice, np.tile(d, (lattice.n_sites, 1)))

    @classmethod
    def from_angles(cls, lattice: Lattice, thetas, phis) -> "SpinConfiguration":
        th = np.broadcast_to(np.asarray(thetas, dtype=float), (lattice.n_sites,))
        ph = np.broadcast_to(np.asarray(phis, dtype=float), (lattice.n_sites,))
        cart = np.stack(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1
        )
        return cls(lattice, cart)

    @classmethod
    def random(cls, lattice: Lattice, rng: np.random.Generator, radius: float = 1.0):
        """Uniform directions, radius fixed (default: unit sphere)."""
        v = rng.normal(size=(lattice.n_sites, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return cls(lattice, radius * v)


def evaluate(A: PolynomialObservable, M: SpinConfiguration) -> complex:
    """Value of the polynomial at the configuration."""
    lad = M.ladder
    idx = A.lattice.index
    total = 0.0 + 0.0j
    for alpha, c in A.terms.items():
        val = c
        for (site, comp), exp in alpha.items():
            base = lad[idx(site), comp]
            val *= base if exp == 1 else base ** exp
        total += val
    return total


# ---------------------------------------------------------------------------
# Poisson bracket


def _bracket_terms(
    out: dict[MultiIndex, complex],
    alpha: MultiIndex,
    beta: MultiIndex,
    cab: complex,
) -> None:
    common = set(alpha.sites()) & set(beta.sites())
    if not common:
        return
    base = alpha.as_dict()
    for k, e in beta.items():
        base[k] = base.get(k, 0) + e
    for x in common:
        ea = alpha.site_exponents(x)
        eb = beta.site_exponents(x)
        for (i, j), (k, val) in PAIR_CONTRACTION.items():
            ai = ea[i]
            bj = eb[j]
            if ai == 0 or bj == 0:
                continue
            d = dict(base)
            for key, delta in (((x, i), -1), ((x, j), -1), ((x, k), 1)):
                new = d.get(key, 0) + delta
                if new:
                    d[key] = new
                else:
                    d.pop(key, None)
            gamma = MultiIndex(d)
            coeff = 1j * val * ai * bj * cab
            acc = out.get(gamma, 0.0) + coeff
            if acc == 0:
                out.pop(gamma, None)
            else:
                out[gamma] = acc


def poisson_bracket(
    A: PolynomialObservable, B: PolynomialObservable
) -> PolynomialObservable:
    """{A, B} extended bilinearly from the monomial bracket."""
    if A.lattice != B.lattice:
        raise ValueError("bracket arguments live on different lattices")
    out: dict[MultiIndex, complex] = {}
    for alpha, ca in A.terms.items():
        for beta, cb in B.terms.items():
            _bracket_terms(out, alpha, beta, ca * cb)
    return PolynomialObservable(A.lattice, out)


def hamiltonian_observable(V: Potential, t: float = 0.0) -> PolynomialObservable:
    return PolynomialObservable(V.lattice, dict(V.at(t).terms))


def _adjoint_action(V: Potential, alpha: MultiIndex) -> tuple:
    """Terms of {H, M^alpha} for static V, memoized on the potential.

    The bracket series applies the same Hamiltonian over and over, so the
    action on each monomial is computed once and reused across orders, steps
    and sweeps.
    """
    cache = getattr(V, "_adjoint_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(V, "_adjoint_cache", cache)
    action = cache.get(alpha)
    if action is None:
        out: dict[MultiIndex, complex] = {}
        for beta, cb in V.terms.items():
            _bracket_terms(out, beta, alpha, cb)
        action = tuple(out.items())
        cache[alpha] = action
    return action


# ---------------------------------------------------------------------------
# Hamiltonian vector field


class _CompiledField:
    """Flattened form of the equations of motion for fast repeated evaluation.

    dM_i/dt(x) = sum_alpha V(alpha) sum_{j,k} i eps_tilde(j,i,k) alpha_j(x)
                 M^{alpha - delta_j(x) + delta_k(x)}
    """

    def __init__(self, V: Potential):
        lattice = V.lattice
        idx = lattice.index
        out_slots: list[int] = []
        coeffs: list[complex] = []
        fac_slots: list[int] = []
        fac_exps: list[int] = []
        seg_starts: list[int] = []
        for alpha, c in V.terms.items():
            base = alpha.as_dict()
            for x in alpha.sites():
                exps = alpha.site_exponents(x)
                for j in (PLUS, ZEE, MINUS):
                    aj = exps[j]
                    if aj == 0:
                        continue
                    for i, k, val in FIRST_SLOT_ENTRIES[j]:
                        d = dict(base)
                        for key, delta in (((x, j), -1), ((x, k), 1)):
                            new = d.get(key, 0) + delta
                            if new:
                                d[key] = new
                            else:
                                d.pop(key, None)
                        seg_starts.append(len(fac_slots))
                        for (site, comp), e in sorted(d.items()):
                            fac_slots.append(3 * idx(site) + comp)
                            fac_exps.append(e)
                        out_slots.append(3 * idx(x) + i)
                        coeffs.append(1j * val * aj * c)
        self.n_slots = 3 * lattice.n_sites
        self.out_slots = np.asarray(out_slots, dtype=np.intp)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.fac_slots = np.asarray(fac_slots, dtype=np.intp)
        self.fac_exps = np.asarray(fac_exps, dtype=np.intp)
        self.seg_starts = np.asarray(seg_starts, dtype=np.intp)
        self.trivial_exps = bool(np.all(self.fac_exps == 1))

    def __call__(self, ladder_flat: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_slots, dtype=complex)
        if self.coeffs.size == 0:
            return out
        vals = ladder_flat[self.fac_slots]
        if not self.trivial_exps:
            vals = vals ** self.fac_exps
        prods = np.multiply.reduceat(vals, self.seg_starts)
        np.add.at(out, self.out_slots, self.coeffs * prods)
        return out


def _compiled_field(V: Potential) -> _CompiledField:
    cache = getattr(V, "_field_cache", None)
    if cache is None:
        cache = _CompiledField(V)
        object.__setattr__(V, "_field_cache", cache)
    return cache


def vector_field(V: Potential, M: SpinConfiguration, t: float = 0.0) -> np.ndarray:
    """Ladder-component time derivative of the configuration, shape (n_sites, 3)."""
    if V.lattice != M.lattice:
        raise ValueError("potential and configuration lattices differ")
    comp = _compiled_field(V.at(t))
    return comp(M.ladder.reshape(-1)).reshape(-1, 3)


# ---------------------------------------------------------------------------
# Flow integration


@dataclass
class Trajectory:
    """Recorded flow: times and Cartesian states, shape (n_records, n_sites, 3)."""

    lattice: Lattice
    times: np.ndarray
    states: np.ndarray

    def state(self, k: int) -> SpinConfiguration:
        return SpinConfiguration(self.lattice, self.states[k], validate=False)

    @property
    def final(self) -> SpinConfiguration:
        return self.state(-1)

    def norm_drift(self) -> float:
        """Largest deviation of any site norm |M(t,x)| from its initial value."""
        norms = np.linalg.norm(self.states, axis=2)
        return float(np.max(np.abs(norms - norms[0])))

    def to_csv(self, path) -> None:
        """Rows t, site_index, m1, m2, m3 for every recorded time and site."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "site_index", "m1", "m2", "m3"])
            for k, t in enumerate(self.times):
                for pos in range(self.lattice.n_sites):
                    m = self.states[k, pos]
                    writer.writerow([repr(float(t)), pos, repr(m[0]), repr(m[1]), repr(m[2])])


def flow(
    V: Potential,
    M0: SpinConfiguration,
    t: float,
    dt: float = 1e-3,
    record_every: int = 1,
) -> Trajectory:
    """Fixed-step fourth-order Runge-Kutta integration of the spin equations.

    No renormalization is applied; conservation of the site norms is a
    property of the integrated field and is monitored via ``norm_drift``.
    """
    if V.lattice != M0.lattice:
        raise ValueError("potential and configuration lattices differ")
    if dt <= 0:
        raise ValueError("dt must be positive")
    t = float(t)
    n_steps = max(1, math.ceil(abs(t) / dt - 1e-12)) if t != 0.0 else 0
    step = t / n_steps if n_steps else 0.0

    static = V.static
    if static:
        comp = _compiled_field(V)

        def deriv(y: np.ndarray, _s: float) -> np.ndarray:
            lad = cartesian_to_ladder(y).reshape(-1)
            return ladder_to_cartesian(comp(lad).reshape(-1, 3))

    else:
        cache: dict[float, _CompiledField] = {}

        def deriv(y: np.ndarray, s: float) -> np.ndarray:
            c = cache.get(s)
            if c is None:
                cache.clear()  # RK4 revisits only the current midpoint
                c = _CompiledField(V.at(s))
                cache[s] = c
            lad = cartesian_to_ladder(y).reshape(-1)
            return ladder_to_cartesian(c(lad).reshape(-1, 3))

    y = M0.cartesian.copy()
    rec_times = [0.0]
    rec_states = [y.copy()]
    s_now = 0.0
    for k in range(n_steps):
        k1 = deriv(y, s_now)
        k2 = deriv(y + 0.5 * step * k1, s_now + 0.5 * step)
        k3 = deriv(y + 0.5 * step * k2, s_now + 0.5 * step)
        k4 = deriv(y + step * k3, s_now + step)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        s_now += step
        if (k + 1) % record_every == 0 or k == n_steps - 1:
            rec_times.append(s_now)
            rec_states.append(y.copy())
    return Trajectory(V.lattice, np.asarray(rec_times), np.asarray(rec_states))


# ---------------------------------------------------------------------------
# Lie-Schwinger series


def _series_order(prefactor: float, rho: float, tol: float, cap: int) -> int:
    """Smallest L with prefactor * rho^(L+1) / (1 - rho) < tol."""
    if prefactor == 0.0 or rho == 0.0:
        return 0
    tail = prefactor * rho / (1.0 - rho)
    L = 0
    while tail >= tol:
        L += 1
        tail *= rho
        if L > cap:
            raise CapError(
                f"certified series order exceeds the cap of {cap} "
                f"(rho={rho:.3g}, tol={tol:.3g})"
            )
    return L


def lie_schwinger_classical(
    V: Potential,
    A: PolynomialObservable,
    t: float,
    tol: float,
    weight: float = math.e,
    cap: int = SERIES_ORDER_CAP,
    drop_budget: float = 0.0,
) -> PolynomialObservable:
    """Bracket series sum_{l<=L} t^l/l! {H, A}^(l), truncated with a certified tail.

    The order L is the smallest one whose geometric tail bound
    sum_{|beta|} |c_beta| e^{|beta|} * sum_{l>L} (|t| norm(V))^l falls below
    ``tol``; the series diverges outside |t| < 1/norm(V), which is enforced.

    A positive ``drop_budget`` additionally prunes the order-l carrier as the
    series runs: a carrier term of weighted mass w feeds later orders by at
    most w/(1 - rho), so pruning each order within drop_budget*(1-rho)/L
    keeps the extra error below ``drop_budget``.
    """
    if not V.static:
        raise ValueError("series propagation requires a static potential")
    if V.lattice != A.lattice:
        raise ValueError("potential and observable lattices differ")
    vnorm = potential_norm(V, weight)
    rho = abs(t) * vnorm
    if rho >= 1.0:
        raise RadiusError(
            f"|t| = {abs(t)} is outside the certified radius 1/norm(V) = "
            f"{1.0 / vnorm if vnorm else math.inf:.6g}"
        )
    prefactor = A.weighted_norm(weight)
    L = _series_order(prefactor, rho, tol, cap)
    order_budget = drop_budget * (1.0 - rho) / L if L else 0.0
    total = dict(A.terms)
    terms: dict[MultiIndex, complex] = dict(A.terms)
    for l in range(1, L + 1):
        factor = t / l
        nxt: dict[MultiIndex, complex] = {}
        for alpha, c in terms.items():
            cf = c * factor
            for gamma, k in _adjoint_action(V, alpha):
                acc = nxt.get(gamma, 0.0) + cf * k
                if acc == 0:
                    nxt.pop(gamma, None)
                else:
                    nxt[gamma] = acc
        terms = nxt
        if not terms:
            break
        for gamma, c in terms.items():
            acc = total.get(gamma, 0.0) + c
            if acc == 0:
                total.pop(gamma, None)
            else:
                total[gamma] = acc
        if order_budget > 0.0:
            terms, _ = _drop_smallest(terms, order_budget, weight)
    return PolynomialObservable(A.lattice, total)


def propagate_observable(
    V: Potential,
    A: PolynomialObservable,
    t: float,
    tol: float,
    n_steps: int = 0,
) -> PolynomialObservable:
    """Evolve A to time t by iterated certified series steps.

    With ``n_steps = 0`` the step count is raised automatically until every
    sub-step is well inside the convergence radius.  An explicit step count
    is honoured as given and rejected if it violates the radius.

    Half the error budget ``tol`` goes to series tails, half to dropping
    small terms between steps.  A term dropped after step k is measured by
    its weighted mass |c| e^degree, since each remaining series step can
    grow that mass by at most 1/(1 - rho); the per-step drop budget carries
    the matching geometric factor so the final contamination stays below
    tol/2.
    """
    if not V.static:
        raise ValueError("series propagation requires a static potential")
    if t == 0.0:
        return A
    vnorm = potential_norm(V)
    if n_steps <= 0:
        nu = max(1, math.ceil(abs(t) * vnorm / _STEP_TARGET))
    else:
        nu = int(n_steps)
        if abs(t / nu) * vnorm >= 1.0:
            raise RadiusError(
                f"explicit step count {nu} leaves sub-steps outside the "
                f"convergence radius (|t/nu| * norm(V) = {abs(t / nu) * vnorm:.3g})"
            )
    tau = t / nu
    rho_step = abs(tau) * vnorm
    tail_budget = tol / (2 * nu)
    out = A
    for k in range(nu):
        drop_budget = (tol / (2 * nu)) * (1.0 - rho_step) ** (nu - 1 - k)
        out = lie_schwinger_classical(
            V, out, tau, tail_budget, drop_budget=drop_budget / 2
        )
        out, _ = truncate_observable(out, drop_budget / 2, weight=math.e)
    return out
