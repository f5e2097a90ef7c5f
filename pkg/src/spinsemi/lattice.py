"""Lattice geometry, ladder components, monomial multi-indices and potentials.

Conventions used throughout the package:

* Spin components are handled in the ladder basis.  Component 0 is the
  raising part ``+``, component 1 is ``z``, component 2 is the lowering
  part ``-``::

      M_+ = (M_1 + i M_2) / sqrt(2),   M_z = M_3,   M_- = (M_1 - i M_2) / sqrt(2).

  Complex conjugation swaps ``+`` and ``-`` and fixes ``z``.

* The antisymmetrized structure constants ``eps_tilde`` encode the Poisson
  structure ``{M_i(x), M_j(y)} = i eps_tilde(i,j,k) delta(x,y) M_k(x)``.
  The non-zero entries are

      eps(+,-,z) = +1    eps(-,+,z) = -1
      eps(+,z,+) = -1    eps(-,z,-) = +1
      eps(z,+,+) = +1    eps(z,-,-) = -1

* Lattice sites are stored as integer coordinate tuples.  A lattice with
  ``spacing`` h places site ``n`` at the point ``n * h`` of h Z^d; unit
  lattices (``spacing is None``) live directly on Z^d.  Site order is
  lexicographic and fixed, so tensor factors, CSV rows and flattened state
  vectors all agree on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

PLUS, ZEE, MINUS = 0, 1, 2
LADDER_COMPONENTS = (PLUS, ZEE, MINUS)
COMPONENT_LABELS = ("+", "z", "-")
LABEL_TO_COMPONENT = {"+": PLUS, "z": ZEE, "-": MINUS}
CONJUGATE_COMPONENT = (MINUS, ZEE, PLUS)

# (i, j, k, value) with eps_tilde(i, j, k) = value; all other entries vanish.
EPSILON_ENTRIES = (
    (PLUS, MINUS, ZEE, 1.0),
    (MINUS, PLUS, ZEE, -1.0),
    (PLUS, ZEE, PLUS, -1.0),
    (MINUS, ZEE, MINUS, 1.0),
    (ZEE, PLUS, PLUS, 1.0),
    (ZEE, MINUS, MINUS, -1.0),
)

_EPSILON_TABLE = {(i, j, k): v for (i, j, k, v) in EPSILON_ENTRIES}

# For fixed (i, j) there is at most one k with eps_tilde(i,j,k) != 0.
PAIR_CONTRACTION = {(i, j): (k, v) for (i, j, k, v) in EPSILON_ENTRIES}

# For fixed first slot j: list of (i, k, value) with eps_tilde(j, i, k) = value.
FIRST_SLOT_ENTRIES = {
    j: tuple((i, k, v) for (jj, i, k, v) in EPSILON_ENTRIES if jj == j)
    for j in LADDER_COMPONENTS
}


def epsilon_tilde(i: int, j: int, k: int) -> float:
    """Structure constant eps_tilde(i, j, k) in the ladder basis."""
    return _EPSILON_TABLE.get((i, j, k), 0.0)


def conjugate_component(i: int) -> int:
    return CONJUGATE_COMPONENT[i]


# ---------------------------------------------------------------------------
# Lattice


@dataclass(frozen=True)
class Lattice:
    """Finite set of sites, ordered lexicographically.

    ``sites`` holds integer coordinates; the physical position of a site is
    ``site * spacing`` when a spacing is set (mean-field grids on h Z^d) and
    the integer coordinate itself otherwise.
    """

    dim: int
    sites: tuple[tuple[int, ...], ...]
    spacing: float | None = None
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("lattice dimension must be positive")
        sites = tuple(tuple(int(c) for c in s) for s in self.sites)
        if not sites:
            raise ValueError("lattice needs at least one site")
        for s in sites:
            if len(s) != self.dim:
                raise ValueError(f"site {s} does not have dimension {self.dim}")
        ordered = tuple(sorted(set(sites)))
        if len(ordered) != len(sites):
            raise ValueError("duplicate lattice sites")
        object.__setattr__(self, "sites", ordered)
        object.__setattr__(self, "_index", {s: n for n, s in enumerate(ordered)})
        if self.spacing is not None and not self.spacing > 0:
            raise ValueError("lattice spacing must be positive")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def index(self, site: tuple[int, ...]) -> int:
        try:
            return self._index[tuple(site)]
        except KeyError:
            raise KeyError(f"site {site} not on lattice") from None

    def __contains__(self, site) -> bool:
        return tuple(site) in self._index

    def coordinate(self, site: tuple[int, ...]) -> tuple[float, ...]:
        h = self.spacing
        if h is None:
            return tuple(float(c) for c in site)
        return tuple(c * h for c in site)

    def coordinates(self) -> np.ndarray:
        """All site positions as an (n_sites, dim) float array."""
        arr = np.asarray(self.sites, dtype=float)
        if self.spacing is not None:
            arr = arr * self.spacing
        return arr

    @classmethod
    def chain(cls, n: int) -> "Lattice":
        """Unit chain 0, 1, ..., n-1 in one dimension."""
        return cls(1, tuple((k,) for k in range(n)))

    @classmethod
    def block(cls, shape: tuple[int, ...]) -> "Lattice":
        """Unit box {0..L1-1} x ... x {0..Ld-1}."""
        dims = tuple(int(n) for n in shape)
        sites = [()]
        for n in dims:
            sites = [s + (k,) for s in sites for k in range(n)]
        return cls(len(dims), tuple(sites))

    @classmethod
    def open_box_grid(cls, box: tuple[tuple[float, float], ...], spacing: float) -> "Lattice":
        """Grid h Z^d intersected with the open box prod_a (lo_a, hi_a)."""
        h = float(spacing)
        if not h > 0:
            raise ValueError("grid spacing must be positive")
        axes = []
        for lo, hi in box:
            if not lo < hi:
                raise ValueError("empty box interval")
            first = math.floor(lo / h) + 1
            ns = [n for n in range(first, math.ceil(hi / h) + 1) if lo < n * h < hi]
            axes.append(ns)
        sites = [()]
        for ns in axes:
            sites = [s + (n,) for s in sites for n in ns]
        if not sites or not sites[0]:
            raise ValueError(f"no grid points of spacing {h} inside the box")
        return cls(len(box), tuple(sites), spacing=h)


def closed_box_points(box: tuple[tuple[float, float], ...], spacing: float) -> list[tuple[int, ...]]:
    """Integer coordinates n with n * spacing inside the closed box, per axis."""
    h = float(spacing)
    axes = []
    tol = 1e-9 * max(1.0, h)
    for lo, hi in box:
        first = math.ceil(lo / h - tol)
        last = math.floor(hi / h + tol)
        axes.append(list(range(first, last + 1)))
    pts = [()]
    for ns in axes:
        pts = [p + (n,) for p in pts for n in ns]
    return pts


# ---------------------------------------------------------------------------
# Multi-indices


class MultiIndex:
    """Exponent table of a monomial in the variables M_i(x).

    Immutable and hashable; the pair list is kept sorted by (site, component)
    so equal monomials compare equal and iteration order is reproducible.
    """

    __slots__ = ("_pairs", "_hash")

    def __init__(self, pairs: Iterable | Mapping = ()):  # pairs of ((site, comp), exp)
        if isinstance(pairs, Mapping):
            items = pairs.items()
        else:
            items = pairs
        acc: dict[tuple[tuple[int, ...], int], int] = {}
        for (site, comp), exp in items:
            exp = int(exp)
            if exp == 0:
                continue
            if exp < 0:
                raise ValueError("negative exponent in multi-index")
            if comp not in LADDER_COMPONENTS:
                raise ValueError(f"unknown ladder component {comp!r}")
            key = (tuple(site), comp)
            acc[key] = acc.get(key, 0) + exp
        self._pairs = tuple(sorted(acc.items()))
        self._hash = hash(self._pairs)

    @classmethod
    def unit(cls) -> "MultiIndex":
        return cls()

    @classmethod
    def single(cls, site: tuple[int, ...], comp: int, power: int = 1) -> "MultiIndex":
        return cls((((tuple(site), comp), power),))

    @property
    def pairs(self) -> tuple:
        return self._pairs

    def items(self):
        return iter(self._pairs)

    def degree(self) -> int:
        return sum(e for _, e in self._pairs)

    def site_degree(self, site: tuple[int, ...]) -> int:
        site = tuple(site)
        return sum(e for (s, _), e in self._pairs if s == site)

    def sites(self) -> tuple[tuple[int, ...], ...]:
        seen: list[tuple[int, ...]] = []
        for (s, _), _ in self._pairs:
            if not seen or seen[-1] != s:
                seen.append(s)
        return tuple(seen)

    def site_exponents(self, site: tuple[int, ...]) -> tuple[int, int, int]:
        site = tuple(site)
        out = [0, 0, 0]
        for (s, c), e in self._pairs:
            if s == site:
                out[c] = e
        return tuple(out)

    def exponent(self, site: tuple[int, ...], comp: int) -> int:
        key = (tuple(site), comp)
        for k, e in self._pairs:
            if k == key:
                return e
        return 0

    def conjugate(self) -> "MultiIndex":
        return MultiIndex((((s, CONJUGATE_COMPONENT[c]), e) for (s, c), e in self._pairs))

    def as_dict(self) -> dict:
        return dict(self._pairs)

    def __mul__(self, other: "MultiIndex") -> "MultiIndex":
        d = dict(self._pairs)
        for k, e in other._pairs:
            d[k] = d.get(k, 0) + e
        return MultiIndex(d)

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndex) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "MultiIndex") -> bool:
        return self._pairs < other._pairs

    def __repr__(self) -> str:
        if not self._pairs:
            return "1"
        parts = []
        for (s, c), e in self._pairs:
            site = ",".join(str(v) for v in s)
            base = f"M{COMPONENT_LABELS[c]}({site})"
            parts.append(base if e == 1 else f"{base}^{e}")
        return " ".join(parts)


# ---------------------------------------------------------------------------
# Potentials


def _check_reality(terms: dict[MultiIndex, complex], tol: float = 1e-9) -> None:
    for alpha, c in terms.items():
        cbar = terms.get(alpha.conjugate(), 0.0)
        if abs(c.conjugate() - cbar) > tol * max(1.0, abs(c)):
            raise ValueError(
                f"potential violates the reality condition at {alpha!r}: "
                f"conj({c}) != {cbar}"
            )


@dataclass
class Potential:
    """Hamilton function H = sum_alpha V(alpha) M^alpha on a fixed lattice.

    Coefficients are stored as a finite table.  A time-dependent potential
    carries a map t -> coefficient table instead; ``at(t)`` samples it.
    Reality, conj(V(alpha)) = V(conj alpha), is enforced so the Hamilton
    function is real-valued and its quantization Hermitian.
    """

    lattice: Lattice
    terms: dict[MultiIndex, complex] = field(default_factory=dict)
    time_dependence: Callable[[float], Mapping[MultiIndex, complex]] | None = None
    label: str = ""

    def __post_init__(self) -> None:
        clean: dict[MultiIndex, complex] = {}
        for alpha, c in self.terms.items():
            if not isinstance(alpha, MultiIndex):
                raise TypeError("potential keys must be MultiIndex instances")
            for s in alpha.sites():
                if s not in self.lattice:
                    raise ValueError(f"monomial site {s} not on the lattice")
            c = complex(c)
            if c != 0:
                clean[alpha] = c
        self.terms = clean
        if self.time_dependence is None:
            _check_reality(self.terms)

    @property
    def static(self) -> bool:
        return self.time_dependence is None

    def at(self, t: float) -> "Potential":
        """Static snapshot of the coefficient table at time t."""
        if self.time_dependence is None:
            return self
        sampled = dict(self.time_dependence(float(t)))
        return Potential(self.lattice, sampled, label=self.label)

    def scaled(self, factor: float) -> "Potential":
        if self.time_dependence is not None:
            dep = self.time_dependence
            return Potential(
                self.lattice,
                {},
                time_dependence=lambda t: {a: factor * c for a, c in dep(t).items()},
                label=self.label,
            )
        return Potential(
            self.lattice,
            {a: factor * c for a, c in self.terms.items()},
            label=self.label,
        )

    def __add__(self, other: "Potential") -> "Potential":
        if self.lattice != other.lattice:
            raise ValueError("cannot add potentials on different lattices")
        if not (self.static and other.static):
            raise ValueError("cannot add time-dependent potentials")
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0.0) + c
        return Potential(self.lattice, terms)


def potential_norm(potential: Potential, weight: float = math.e) -> float:
    """Weighted interaction norm sum_n w^n sup_x sum_{|alpha|=n} |alpha(x)| |V(alpha)|.

    The default weight w = e is the one entering the certified convergence
    radius |t| < 1/norm of the bracket series.  Larger weights give the
    stricter norms used when generator norms exceed one (spin 1/2).
    """
    if not potential.static:
        raise ValueError("potential_norm needs a static potential; sample with .at(t)")
    per_degree: dict[int, dict[tuple[int, ...], float]] = {}
    for alpha, c in potential.terms.items():
        n = alpha.degree()
        if n == 0:
            continue  # constant terms generate no dynamics and carry no weight
        bucket = per_degree.setdefault(n, {})
        mag = abs(c)
        for site in alpha.sites():
            bucket[site] = bucket.get(site, 0.0) + alpha.site_degree(site) * mag
    total = 0.0
    for n, bucket in per_degree.items():
        total += (weight ** n) * max(bucket.values())
    return total


def heisenberg_potential(
    lattice: Lattice,
    field_vectors=None,
    coupling=None,
) -> Potential:
    """Heisenberg Hamilton function H = -sum_x h(x).M(x) - 1/2 sum_xy J(x,y) M(x).M(y).

    ``field_vectors`` is an (n_sites, 3) array-like of Cartesian fields (or a
    callable t -> array for a time-dependent field).  ``coupling`` is a
    symmetric (n_sites, n_sites) array-like with zero diagonal.
    """
    n = lattice.n_sites

    def build(field_arr) -> dict[MultiIndex, complex]:
        terms: dict[MultiIndex, complex] = {}

        def add(alpha: MultiIndex, c: complex) -> None:
            if c != 0:
                terms[alpha] = terms.get(alpha, 0.0) + c

        if field_arr is not None:
            fa = np.asarray(field_arr, dtype=float)
            if fa.shape == (3,):
                fa = np.tile(fa, (n, 1))
            if fa.shape != (n, 3):
                raise ValueError(f"field must have shape ({n}, 3); got {fa.shape}")
            for pos, site in enumerate(lattice.sites):
                h1, h2, h3 = fa[pos]
                # h.M = ((h1 - i h2)/sqrt2) M_+ + h3 M_z + ((h1 + i h2)/sqrt2) M_-
                add(MultiIndex.single(site, PLUS), -(h1 - 1j * h2) / math.sqrt(2))
                add(MultiIndex.single(site, ZEE), -complex(h3))
                add(MultiIndex.single(site, MINUS), -(h1 + 1j * h2) / math.sqrt(2))
        if coupling is not None:
            J = np.asarray(coupling, dtype=float)
            if J.shape != (n, n):
                raise ValueError(f"coupling must have shape ({n}, {n}); got {J.shape}")
            if not np.allclose(J, J.T, atol=1e-12):
                raise ValueError("coupling matrix must be symmetric")
            if np.max(np.abs(np.diag(J))) > 0:
                raise ValueError("coupling matrix must have zero diagonal")
            for a in range(n):
                for b in range(a + 1, n):
                    j = J[a, b]
                    if j == 0:
                        continue
                    x, y = lattice.sites[a], lattice.sites[b]
                    # M(x).M(y) = M_+(x)M_-(y) + M_-(x)M_+(y) + M_z(x)M_z(y);
                    # the double sum over ordered pairs cancels the 1/2.
                    add(MultiIndex.single(x, PLUS) * MultiIndex.single(y, MINUS), -j)
                    add(MultiIndex.single(x, MINUS) * MultiIndex.single(y, PLUS), -j)
                    add(MultiIndex.single(x, ZEE) * MultiIndex.single(y, ZEE), -j)
        return terms

    if callable(field_vectors):
        dep = field_vectors
        return Potential(
            lattice, {}, time_dependence=lambda t: build(dep(t)), label="heisenberg"
        )
    return Potential(lattice, build(field_vectors), label="heisenberg")


# ---------------------------------------------------------------------------
# Serialization

_FORMAT_TAG = "spin-potential-v1"


def potential_to_json(potential: Potential) -> str:
    """Serialize a static potential to the documented JSON text format.

    Layout: one object with the format tag, lattice data (dimension, integer
    site coordinates, optional spacing) and a term list; each term carries its
    monomial as (site, component label, power) factors plus the real and
    imaginary parts of the coefficient.
    """
    if not potential.static:
        raise ValueError("only static potentials are serializable")
    terms = []
    for alpha in sorted(potential.terms):
        c = potential.terms[alpha]
        factors = [
            [list(site), COMPONENT_LABELS[comp], exp]
            for (site, comp), exp in alpha.items()
        ]
        terms.append({"monomial": factors, "re": c.real, "im": c.imag})
    doc = {
        "format": _FORMAT_TAG,
        "dim": potential.lattice.dim,
        "spacing": potential.lattice.spacing,
        "sites": [list(s) for s in potential.lattice.sites],
        "label": potential.label,
        "terms": terms,
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def potential_from_json(text: str) -> Potential:
    doc = json.loads(text)
    if doc.get("format") != _FORMAT_TAG:
        raise ValueError(f"unknown potential format {doc.get('format')!r}")
    lattice = Lattice(
        int(doc["dim"]),
        tuple(tuple(s) for s in doc["sites"]),
        spacing=doc.get("spacing"),
    )
    terms: dict[MultiIndex, complex] = {}
    for item in doc["terms"]:
        pairs = []
        for site, label, exp in item["monomial"]:
            pairs.append(((tuple(site), LABEL_TO_COMPONENT[label]), int(exp)))
        alpha = MultiIndex(pairs)
        terms[alpha] = terms.get(alpha, 0.0) + complex(item["re"], item["im"])
    return Potential(lattice, terms, label=doc.get("label", ""))
