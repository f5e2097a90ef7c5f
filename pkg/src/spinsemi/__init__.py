"""Numerical laboratory for semiclassical limits of lattice spin dynamics.

The package compares three descriptions of the same spin system and
measures how fast they converge to each other:

* classical Hamiltonian dynamics of polynomial observables on a finite
  lattice (``classical``), with a certified Lie series propagator;
* exact quantum dynamics of their normal-ordered quantizations at spin
  magnitude s (``quantum``), where the gap closes at rate 1/s;
* the continuum regime on shrinking grids of spacing h (``meanfield``),
  where generators carry the scale h^d/s and the gap closes at rate h^d.

Coherent product states (``coherent``) connect quantum expectations with
classical values at rate 1/sqrt(s), and ``bench`` turns all of it into
reproducible CLI experiments with fitted convergence rates.
"""

from .classical import (
    PolynomialObservable,
    SpinConfiguration,
    Trajectory,
    evaluate,
    flow,
    hamiltonian_observable,
    lie_schwinger_classical,
    poisson_bracket,
    propagate_observable,
    truncate_observable,
    vector_field,
)
from .coherent import (
    ProductState,
    angles_from_vector,
    coherent_egorov_error,
    coherent_rotation,
    coherent_state,
    moment_gap,
    rodrigues_rotation,
    rotated_spin_residual,
    spin_expectation,
    vector_from_angles,
)
from .errors import CapError, ConfigError, RadiusError
from .lattice import (
    MINUS,
    PLUS,
    ZEE,
    Lattice,
    MultiIndex,
    Potential,
    epsilon_tilde,
    heisenberg_potential,
    potential_from_json,
    potential_norm,
    potential_to_json,
)
from .meanfield import (
    MeanFieldPotential,
    SmearingFunction,
    SpinField,
    coherent_continuum_error,
    continuum_flow,
    cosine_bump,
    discretize,
    effective_lattice_potential,
    evaluate_observable,
    exchange_smearing,
    field_smearing,
    harpoon,
    heisenberg_meanfield,
    meanfield_egorov_error,
    meanfield_potential_norm,
    norm1_h,
    norm_inf1_h,
    observable_smearing,
    quantize_smeared,
    spin_wave_field,
    symmetrize,
)
from .quantum import (
    DIMENSION_CAP,
    LatticeOperator,
    SpinRep,
    commutator,
    egorov_error,
    heisenberg_evolve,
    hilbert_dimension,
    lie_schwinger_quantum,
    operator_norm,
    propagator,
    propagator_stepped,
    quantize,
    quantize_hamiltonian,
    site_operator,
)

__version__ = "0.1.0"

__all__ = [
    "CapError",
    "ConfigError",
    "DIMENSION_CAP",
    "Lattice",
    "LatticeOperator",
    "MINUS",
    "MeanFieldPotential",
    "MultiIndex",
    "PLUS",
    "PolynomialObservable",
    "Potential",
    "ProductState",
    "RadiusError",
    "SmearingFunction",
    "SpinConfiguration",
    "SpinField",
    "SpinRep",
    "Trajectory",
    "ZEE",
    "angles_from_vector",
    "coherent_continuum_error",
    "coherent_egorov_error",
    "coherent_rotation",
    "coherent_state",
    "commutator",
    "continuum_flow",
    "cosine_bump",
    "discretize",
    "effective_lattice_potential",
    "egorov_error",
    "epsilon_tilde",
    "evaluate",
    "evaluate_observable",
    "exchange_smearing",
    "field_smearing",
    "flow",
    "hamiltonian_observable",
    "harpoon",
    "heisenberg_evolve",
    "heisenberg_meanfield",
    "heisenberg_potential",
    "hilbert_dimension",
    "lie_schwinger_classical",
    "lie_schwinger_quantum",
    "meanfield_egorov_error",
    "meanfield_potential_norm",
    "moment_gap",
    "norm1_h",
    "norm_inf1_h",
    "observable_smearing",
    "operator_norm",
    "poisson_bracket",
    "potential_from_json",
    "potential_norm",
    "potential_to_json",
    "propagate_observable",
    "propagator",
    "propagator_stepped",
    "quantize",
    "quantize_hamiltonian",
    "quantize_smeared",
    "rodrigues_rotation",
    "rotated_spin_residual",
    "site_operator",
    "spin_expectation",
    "spin_wave_field",
    "symmetrize",
    "truncate_observable",
    "vector_field",
    "vector_from_angles",
    "__version__",
]
