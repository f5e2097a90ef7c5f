"""Spin coherent states, product states and semiclassical expectations.

The coherent state at the unit vector M with polar angles (theta, phi) is

    |M> = exp( (theta/sqrt 2) [e^{i phi} S_- - e^{-i phi} S_+] ) |s>,

built from the unscaled ladder operators S_pm = (S_1 +- i S_2)/sqrt 2 and
the highest-weight state |s>.  The rotation U = e^A conjugates the spin
triple like an SO(3) rotation by angle theta about the horizontal axis
(-sin phi, cos phi, 0); that rotation is the independent reference used by
``rotated_spin_residual``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import (
    PolynomialObservable,
    SpinConfiguration,
    Trajectory,
    evaluate,
    flow,
)
from .lattice import MINUS, PLUS, ZEE, Lattice, Potential
from .quantum import (
    LatticeOperator,
    SpinRep,
    _raw_matrices,
    heisenberg_evolve,
    hilbert_dimension,
    propagator,
    quantize,
    quantize_hamiltonian,
)

_SQRT2 = math.sqrt(2.0)


def angles_from_vector(m) -> tuple[float, float]:
    """Polar angles (theta, phi) of a unit vector, phi in [0, 2 pi).

    At the poles the azimuth is gauge; it is fixed to phi = 0 there.
    """
    m = np.asarray(m, dtype=float)
    norm = np.linalg.norm(m)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"expected a unit vector; |m| = {norm}")
    m = m / norm
    theta = math.acos(max(-1.0, min(1.0, m[2])))
    if math.sin(theta) < 1e-12:
        return (theta, 0.0)
    phi = math.atan2(m[1], m[0]) % (2.0 * math.pi)
    return (theta, phi)


def vector_from_angles(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


def rotation_generator(s: float, theta: float, phi: float) -> np.ndarray:
    """Anti-Hermitian A with |M> = e^A |s>, in the unscaled representation."""
    two_s = SpinRep._two_s(s)
    raise_op, _, lower_op = _raw_matrices(two_s)
    # (theta/sqrt2)(e^{i phi} S_- - e^{-i phi} S_+) with S_pm = raw_pm/sqrt2
    return (theta / 2.0) * (
        np.exp(1j * phi) * lower_op - np.exp(-1j * phi) * raise_op
    )


def coherent_rotation(s: float, theta: float, phi: float) -> np.ndarray:
    """Unitary U = e^A via the eigendecomposition of the Hermitian iA."""
    A = rotation_generator(s, theta, phi)
    evals, evecs = np.linalg.eigh(1j * A)
    return (evecs * np.exp(-1j * evals)) @ evecs.conj().T


def coherent_state(s: float, m) -> np.ndarray:
    """Coherent state vector at the unit vector m, dimension 2s + 1."""
    theta, phi = angles_from_vector(m)
    U = coherent_rotation(s, theta, phi)
    return np.ascontiguousarray(U[:, 0])


def rotated_spin_residual(s: float, theta: float, phi: float) -> float:
    """Largest operator-norm residual of the three U* S_a U expansions.

    The reference expansions in the ladder basis are::

        U* S_1 U = sin(th)cos(ph) S_z + (1/sqrt2) cos^2(th/2) (S_+ + S_-)
                   - (1/sqrt2) sin^2(th/2) (e^{-2i ph} S_+ + e^{2i ph} S_-)
        U* S_2 U = sin(th)sin(ph) S_z + (1/(sqrt2 i)) cos^2(th/2) (S_+ - S_-)
                   + (1/(sqrt2 i)) sin^2(th/2) (e^{-2i ph} S_+ - e^{2i ph} S_-)
        U* S_3 U = cos(th) S_z - (1/sqrt2) sin(th) (e^{-i ph} S_+ + e^{i ph} S_-)

    all in unscaled operators; they are the rows of the Rodrigues rotation by
    theta about (-sin ph, cos ph, 0).
    """
    two_s = SpinRep._two_s(s)
    raise_op, sz, lower_op = _raw_matrices(two_s)
    s_plus = raise_op / _SQRT2
    s_minus = lower_op / _SQRT2
    U = coherent_rotation(s, theta, phi)

    s1 = (raise_op + lower_op) / 2.0
    s2 = (raise_op - lower_op) / 2.0j
    s3 = sz

    c2 = math.cos(theta / 2.0) ** 2
    s2h = math.sin(theta / 2.0) ** 2
    e_p = np.exp(1j * phi)
    e_m = np.exp(-1j * phi)

    rhs1 = (
        math.sin(theta) * math.cos(phi) * sz
        + (c2 / _SQRT2) * (s_plus + s_minus)
        - (s2h / _SQRT2) * (e_m ** 2 * s_plus + e_p ** 2 * s_minus)
    )
    rhs2 = (
        math.sin(theta) * math.sin(phi) * sz
        + (c2 / (_SQRT2 * 1j)) * (s_plus - s_minus)
        + (s2h / (_SQRT2 * 1j)) * (e_m ** 2 * s_plus - e_p ** 2 * s_minus)
    )
    rhs3 = math.cos(theta) * sz - (math.sin(theta) / _SQRT2) * (
        e_m * s_plus + e_p * s_minus
    )

    Ud = U.conj().T
    residuals = [
        np.linalg.norm(Ud @ lhs @ U - rhs, 2)
        for lhs, rhs in ((s1, rhs1), (s2, rhs2), (s3, rhs3))
    ]
    return float(max(residuals))


def rodrigues_rotation(theta: float, phi: float) -> np.ndarray:
    """SO(3) matrix R with U* S_a U = sum_b R[a, b] S_b; R e_3 = M."""
    axis = np.array([-math.sin(phi), math.cos(phi), 0.0])
    K = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(theta) * K + (1.0 - math.cos(theta)) * (K @ K)


def spin_expectation(s: float, state: np.ndarray) -> np.ndarray:
    """Cartesian expectation of the scaled generators in a single-site state."""
    rep = SpinRep.large_spin(s)
    return np.array(
        [np.real(state.conj() @ rep.cartesian_matrix(a) @ state) for a in range(3)]
    )


def moment_gap(s: float, m, comps) -> tuple[float, float]:
    """Gap |<M| S_hat_{i1}...S_hat_{ip} |M> - M_{i1}...M_{ip}| and its bound.

    The bound is p sqrt(2/s) for a product of p scaled ladder generators.
    """
    rep = SpinRep.large_spin(s)
    state = coherent_state(s, m)
    mat = np.eye(rep.dim, dtype=complex)
    for comp in comps:
        mat = mat @ rep.ladder_matrix(comp)
    lhs = complex(state.conj() @ mat @ state)
    lad = {
        PLUS: (m[0] + 1j * m[1]) / _SQRT2,
        ZEE: complex(m[2]),
        MINUS: (m[0] - 1j * m[1]) / _SQRT2,
    }
    rhs = 1.0 + 0.0j
    for comp in comps:
        rhs *= lad[comp]
    p = len(tuple(comps))
    return (abs(lhs - rhs), p * math.sqrt(2.0 / s))


@dataclass
class ProductState:
    """Tensor product of one single-site vector per lattice site."""

    lattice: Lattice
    rep: SpinRep
    vector: np.ndarray

    @classmethod
    def coherent(cls, lattice: Lattice, s: float, config: SpinConfiguration) -> "ProductState":
        rep = SpinRep.large_spin(s)
        hilbert_dimension(rep, lattice)
        vec = np.ones(1, dtype=complex)
        for pos in range(lattice.n_sites):
            vec = np.kron(vec, coherent_state(s, config.cartesian[pos]))
        return cls(lattice, rep, vec)

    def expectation(self, op: LatticeOperator) -> complex:
        if op.lattice != self.lattice or op.rep != self.rep:
            raise ValueError("operator does not match the product state space")
        return complex(self.vector.conj() @ op.matrix @ self.vector)


def coherent_egorov_error(
    V: Potential,
    A: PolynomialObservable,
    M0: SpinConfiguration,
    t: float,
    s: float,
    tol: float = 1e-8,
    dt: float = 1e-3,
) -> float:
    """|rho_M(U* A_hat U) - A(M(t))| for the coherent product state at M0.

    The quantum side is exact; the classical side integrates the flow with
    fixed-step RK4 at step ``dt``, refined once if the result moves by more
    than ``tol``.
    """
    rep = SpinRep.large_spin(s)
    hilbert_dimension(rep, V.lattice)
    state = ProductState.coherent(V.lattice, s, M0)
    H = quantize_hamiltonian(V, rep)
    U = propagator(H, t)
    evolved = heisenberg_evolve(quantize(A, rep), U)
    qside = state.expectation(evolved)

    def classical_value(step: float) -> complex:
        traj: Trajectory = flow(V, M0, t, dt=step)
        return evaluate(A, traj.final)

    c1 = classical_value(dt)
    c2 = classical_value(dt / 2.0)
    cside = c2 if abs(c2 - c1) > tol else c1
    return abs(qside - cside)
