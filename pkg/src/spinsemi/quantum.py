"""Quantum spin-s lattice operators, quantization and Heisenberg evolution.

The scaled generators on one site are S_hat_i = scale * S_i with the
unscaled spin-s matrices S_i, so that

    [S_hat_i(x), S_hat_j(y)] = scale * eps_tilde(i,j,k) delta(x,y) S_hat_k(x).

``scale = 1/s`` is the large-spin normalization (generator norms <= 1 for
s >= 1); ``scale = h^d / s`` is the mean-field normalization on a grid of
spacing h.  Quantization maps a classical monomial to the normal-ordered
operator product: all raising factors to the left, then z, then lowering,
ties broken by site order.  Everything is dense; matrix exponentials go
through Hermitian eigendecompositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .classical import PolynomialObservable, _series_order, propagate_observable
from .errors import CapError, RadiusError
from .lattice import MINUS, PLUS, ZEE, Lattice, Potential, potential_norm

DIMENSION_CAP = 8192

_SQRT2 = math.sqrt(2.0)


@lru_cache(maxsize=None)
def _raw_matrices(two_s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unscaled (S_1 + i S_2, S_3, S_1 - i S_2) with basis m = s, s-1, ..., -s."""
    s = two_s / 2.0
    dim = two_s + 1
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    raise_op = np.zeros((dim, dim), dtype=complex)
    for col in range(1, dim):
        mm = m[col]  # (S_1 + i S_2)|m> = sqrt(s(s+1) - m(m+1)) |m+1>
        raise_op[col - 1, col] = math.sqrt(s * (s + 1) - mm * (mm + 1))
    lower_op = raise_op.conj().T
    return raise_op, sz, lower_op


@dataclass(frozen=True)
class SpinRep:
    """Spin representation: 2s as an integer plus the generator scale."""

    two_s: int
    scale: float

    def __post_init__(self) -> None:
        if self.two_s < 1:
            raise ValueError("2s must be a positive integer")
        if not self.scale > 0:
            raise ValueError("generator scale must be positive")

    @classmethod
    def large_spin(cls, s: float) -> "SpinRep":
        two_s = cls._two_s(s)
        return cls(two_s, scale=2.0 / two_s)

    @classmethod
    def mean_field(cls, s: float, spacing: float, dim: int) -> "SpinRep":
        two_s = cls._two_s(s)
        return cls(two_s, scale=(spacing ** dim) * 2.0 / two_s)

    @staticmethod
    def _two_s(s: float) -> int:
        two_s = round(2 * s)
        if abs(2 * s - two_s) > 1e-9 or two_s < 1:
            raise ValueError(f"spin must be a positive half-integer; got {s}")
        return two_s

    @property
    def s(self) -> float:
        return self.two_s / 2.0

    @property
    def dim(self) -> int:
        return self.two_s + 1

    def ladder_matrix(self, comp: int) -> np.ndarray:
        """Scaled generator S_hat_+ , S_hat_z or S_hat_- on one site."""
        raise_op, sz, lower_op = _raw_matrices(self.two_s)
        if comp == PLUS:
            return (self.scale / _SQRT2) * raise_op
        if comp == ZEE:
            return self.scale * sz
        if comp == MINUS:
            return (self.scale / _SQRT2) * lower_op
        raise ValueError(f"unknown ladder component {comp!r}")

    def cartesian_matrix(self, axis: int) -> np.ndarray:
        """Scaled Cartesian generator S_hat_1, S_hat_2 or S_hat_3."""
        sp = self.ladder_matrix(PLUS)
        sm = self.ladder_matrix(MINUS)
        if axis == 0:
            return (sp + sm) / _SQRT2
        if axis == 1:
            return (sp - sm) / (1j * _SQRT2)
        if axis == 2:
            return self.ladder_matrix(ZEE)
        raise ValueError(f"unknown Cartesian axis {axis!r}")


def hilbert_dimension(rep: SpinRep, lattice: Lattice, cap: int = DIMENSION_CAP) -> int:
    dim = rep.dim ** lattice.n_sites
    if dim > cap:
        raise CapError(
            f"Hilbert dimension {rep.dim}^{lattice.n_sites} = {dim} exceeds the "
            f"dense-matrix cap of {cap}"
        )
    return dim


@dataclass
class LatticeOperator:
    """Dense operator on the product Hilbert space of a lattice."""

    lattice: Lattice
    rep: SpinRep
    matrix: np.ndarray

    def __post_init__(self) -> None:
        dim = self.rep.dim ** self.lattice.n_sites
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"operator matrix has shape {self.matrix.shape}; expected ({dim}, {dim})"
            )

    def _like(self, matrix: np.ndarray) -> "LatticeOperator":
        return LatticeOperator(self.lattice, self.rep, matrix)

    def dagger(self) -> "LatticeOperator":
        return self._like(self.matrix.conj().T)

    def norm(self) -> float:
        return operator_norm(self)

    def __add__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        return self._like(self.matrix + other.matrix)

    def __sub__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        return self._like(self.matrix - other.matrix)

    def __matmul__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        return self._like(self.matrix @ other.matrix)

    def scaled(self, factor: complex) -> "LatticeOperator":
        return self._like(factor * self.matrix)

    def _check(self, other: "LatticeOperator") -> None:
        if self.lattice != other.lattice or self.rep != other.rep:
            raise ValueError("operators belong to different spaces")

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def operator_norm(op: LatticeOperator | np.ndarray) -> float:
    mat = op.matrix if isinstance(op, LatticeOperator) else op
    return float(np.linalg.norm(mat, 2))


def identity_operator(rep: SpinRep, lattice: Lattice) -> LatticeOperator:
    dim = hilbert_dimension(rep, lattice)
    return LatticeOperator(lattice, rep, np.eye(dim, dtype=complex))


def site_operator(rep: SpinRep, lattice: Lattice, comp: int, site) -> LatticeOperator:
    """Scaled generator S_hat_comp acting on one site, identity elsewhere."""
    hilbert_dimension(rep, lattice)
    pos = lattice.index(site)
    mat = np.eye(1, dtype=complex)
    local = rep.ladder_matrix(comp)
    eye = np.eye(rep.dim, dtype=complex)
    for k in range(lattice.n_sites):
        mat = np.kron(mat, local if k == pos else eye)
    return LatticeOperator(lattice, rep, mat)


def operator_sequence_product(rep: SpinRep, lattice: Lattice, factors) -> LatticeOperator:
    """Product of site generators in the exact order given (no reordering).

    ``factors`` is an iterable of (component, site) pairs; the first factor
    is the leftmost one in the product.
    """
    hilbert_dimension(rep, lattice)
    # Generators on distinct sites commute, so the global product equals the
    # Kronecker product of per-site products taken in their original relative
    # order; only the within-site order matters and it is preserved here.
    locals_: list[np.ndarray] = [np.eye(rep.dim, dtype=complex) for _ in lattice.sites]
    for comp, site in factors:
        pos = lattice.index(site)
        locals_[pos] = locals_[pos] @ rep.ladder_matrix(comp)
    mat = np.eye(1, dtype=complex)
    for loc in locals_:
        mat = np.kron(mat, loc)
    return LatticeOperator(lattice, rep, mat)


@lru_cache(maxsize=None)
def _local_product(two_s: int, scale: float, e_plus: int, e_z: int, e_minus: int) -> np.ndarray:
    rep = SpinRep(two_s, scale)
    mat = np.eye(rep.dim, dtype=complex)
    for comp, e in ((PLUS, e_plus), (ZEE, e_z), (MINUS, e_minus)):
        if e:
            mat = mat @ np.linalg.matrix_power(rep.ladder_matrix(comp), e)
    return mat


def quantize(A: PolynomialObservable, rep: SpinRep) -> LatticeOperator:
    """Normal-ordered quantization of a polynomial observable.

    Each monomial maps to the product with all S_hat_+ factors first, then
    S_hat_z, then S_hat_-, ties broken by site order; since generators on
    distinct sites commute this equals the site-by-site Kronecker product of
    local normal-ordered factors, which is how it is assembled.
    """
    lattice = A.lattice
    dim = hilbert_dimension(rep, lattice)
    n = lattice.n_sites
    idx = lattice.index

    if not A.terms:
        return LatticeOperator(lattice, rep, np.zeros((dim, dim), dtype=complex))

    entries: list[tuple[complex, tuple[tuple[int, int, int], ...]]] = []
    for alpha, c in A.terms.items():
        exps = [(0, 0, 0)] * n
        for site in alpha.sites():
            exps[idx(site)] = alpha.site_exponents(site)
        entries.append((c, tuple(exps)))

    def local(tr: tuple[int, int, int]) -> np.ndarray:
        return _local_product(rep.two_s, rep.scale, *tr)

    def assemble(items: list, depth: int) -> np.ndarray:
        if depth == n - 1:
            acc = np.zeros((rep.dim, rep.dim), dtype=complex)
            for c, exps in items:
                acc += c * local(exps[depth])
            return acc
        groups: dict[tuple[int, int, int], list] = {}
        for c, exps in items:
            groups.setdefault(exps[depth], []).append((c, exps))
        tail_dim = rep.dim ** (n - 1 - depth)
        acc = np.zeros((rep.dim * tail_dim, rep.dim * tail_dim), dtype=complex)
        for tr, sub in sorted(groups.items()):
            acc += np.kron(local(tr), assemble(sub, depth + 1))
        return acc

    return LatticeOperator(lattice, rep, assemble(entries, 0))


def quantize_hamiltonian(V: Potential, rep: SpinRep, t: float | None = None) -> LatticeOperator:
    sampled = V if V.static else V.at(0.0 if t is None else t)
    op = quantize(PolynomialObservable(sampled.lattice, dict(sampled.terms)), rep)
    defect = op.hermiticity_defect()
    if defect > 1e-9 * max(1.0, float(np.max(np.abs(op.matrix)))):
        raise ValueError(f"quantized Hamiltonian is not Hermitian (defect {defect:.3g})")
    return op


def propagator(H: LatticeOperator, t: float, sigma: float | None = None) -> LatticeOperator:
    """Unitary exp(-i sigma H t) through the eigendecomposition of H.

    ``sigma`` defaults to 1/scale, which is s in the large-spin normalization
    and s h^{-d} in the mean-field one.
    """
    if sigma is None:
        sigma = 1.0 / H.rep.scale
    evals, evecs = np.linalg.eigh(H.matrix)
    phases = np.exp(-1j * sigma * evals * t)
    mat = (evecs * phases) @ evecs.conj().T
    return LatticeOperator(H.lattice, H.rep, mat)


def propagator_stepped(
    V: Potential, rep: SpinRep, t: float, n_steps: int, sigma: float | None = None
) -> LatticeOperator:
    """Time-ordered product of midpoint-sampled short-time propagators."""
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    dt = t / n_steps
    U = identity_operator(rep, V.lattice)
    for k in range(n_steps):
        mid = (k + 0.5) * dt
        Hk = quantize_hamiltonian(V, rep, t=mid)
        U = propagator(Hk, dt, sigma) @ U  # later factors act on the left
    return U


def heisenberg_evolve(A: LatticeOperator, U: LatticeOperator) -> LatticeOperator:
    """Conjugation U* A U."""
    return U.dagger() @ A @ U


def commutator(A: LatticeOperator, B: LatticeOperator) -> LatticeOperator:
    return A @ B - B @ A


def _quantum_weight(rep: SpinRep) -> float:
    # Generator norms are <= 1 for s >= 1 but sqrt(2) at s = 1/2; the heavier
    # weight keeps the tail certificate valid there at the cost of a smaller
    # certified time radius.
    return math.e * (_SQRT2 if rep.two_s == 1 else 1.0)


def lie_schwinger_quantum(
    V: Potential,
    A: PolynomialObservable,
    t: float,
    tol: float,
    rep: SpinRep,
    cap: int = 64,
) -> LatticeOperator:
    """Commutator series sum_{l<=L} t^l/l! (i/scale)^l [H_hat, A_hat]^(l).

    The truncation order is certified exactly like the classical series,
    with the weight adjusted for spin 1/2 where generator norms reach sqrt 2.
    """
    if not V.static:
        raise ValueError("series propagation requires a static potential")
    weight = _quantum_weight(rep)
    vnorm = potential_norm(V, weight)
    rho = abs(t) * vnorm
    if rho >= 1.0:
        raise RadiusError(
            f"|t| = {abs(t)} is outside the certified quantum series radius "
            f"{1.0 / vnorm if vnorm else math.inf:.6g}"
        )
    prefactor = A.weighted_norm(weight)
    L = _series_order(prefactor, rho, tol, cap)
    H = quantize_hamiltonian(V, rep)
    C = quantize(A, rep)
    total = C.matrix.copy()
    sigma = 1.0 / rep.scale
    for l in range(1, L + 1):
        C = commutator(H, C).scaled(1j * sigma * t / l)
        total += C.matrix
    return LatticeOperator(V.lattice, rep, total)


def egorov_error(
    V: Potential,
    A: PolynomialObservable,
    t: float,
    s: float,
    tol: float = 1e-8,
    rep: SpinRep | None = None,
    evolved_classical: PolynomialObservable | None = None,
) -> float:
    """Operator-norm gap between evolved quantization and quantized evolution.

    Computes || U* A_hat U - (A(t))_hat || with the exact propagator for the
    quantized Hamiltonian and the certified series propagation for the
    classical side.  ``evolved_classical`` may carry a precomputed A(t) so
    sweeps over s reuse the classical work.
    """
    if rep is None:
        rep = SpinRep.large_spin(s)
    hilbert_dimension(rep, V.lattice)
    if evolved_classical is None:
        evolved_classical = propagate_observable(V, A, t, tol)
    H = quantize_hamiltonian(V, rep)
    U = propagator(H, t)
    A_hat = quantize(A, rep)
    lhs = heisenberg_evolve(A_hat, U)
    rhs = quantize(evolved_classical, rep)
    return operator_norm(lhs - rhs)
