import numpy as np
import pytest

from spinsemi import Lattice, heisenberg_potential

# Small tilted-field chain used across the suite: the tilt breaks the
# rotation symmetry that would otherwise make single-site probes trivial.
TILT_FIELD = (0.1, 0.0, 0.15)


@pytest.fixture
def chain2():
    return Lattice.chain(2)


@pytest.fixture
def chain3():
    return Lattice.chain(3)


@pytest.fixture
def tilted_potential(chain2):
    coupling = np.array([[0.0, 0.1], [0.1, 0.0]])
    return heisenberg_potential(chain2, field_vectors=TILT_FIELD, coupling=coupling)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
