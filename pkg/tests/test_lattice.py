"""Lattice geometry, multi-indices, potentials, and the weighted norm."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinsemi import (
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
from spinsemi.classical import (
    PolynomialObservable,
    SpinConfiguration,
    cartesian_to_ladder,
    evaluate,
)
from spinsemi.lattice import (
    CONJUGATE_COMPONENT,
    EPSILON_ENTRIES,
    PAIR_CONTRACTION,
    closed_box_points,
    conjugate_component,
)

from conftest import random_unit_vectors


# ---------------------------------------------------------------------------
# structure constants


def test_epsilon_nonzero_entries():
    assert epsilon_tilde(PLUS, MINUS, ZEE) == 1.0
    assert epsilon_tilde(MINUS, PLUS, ZEE) == -1.0
    assert epsilon_tilde(PLUS, ZEE, PLUS) == -1.0
    assert epsilon_tilde(MINUS, ZEE, MINUS) == 1.0
    assert epsilon_tilde(ZEE, PLUS, PLUS) == 1.0
    assert epsilon_tilde(ZEE, MINUS, MINUS) == -1.0


def test_epsilon_vanishes_off_table():
    listed = {(i, j, k) for (i, j, k, _) in EPSILON_ENTRIES}
    for i in range(3):
        for j in range(3):
            for k in range(3):
                if (i, j, k) not in listed:
                    assert epsilon_tilde(i, j, k) == 0.0


def test_epsilon_antisymmetric_in_first_two_slots():
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert epsilon_tilde(i, j, k) == -epsilon_tilde(j, i, k)


def test_pair_contraction_consistent_with_table():
    for (i, j), (k, v) in PAIR_CONTRACTION.items():
        assert epsilon_tilde(i, j, k) == v


def test_conjugation_swaps_ladder_components():
    assert CONJUGATE_COMPONENT[PLUS] == MINUS
    assert CONJUGATE_COMPONENT[MINUS] == PLUS
    assert CONJUGATE_COMPONENT[ZEE] == ZEE
    for c in (PLUS, ZEE, MINUS):
        assert conjugate_component(conjugate_component(c)) == c


# ---------------------------------------------------------------------------
# lattices


def test_chain_sites_sorted_unique():
    lat = Lattice.chain(4)
    assert lat.dim == 1
    assert lat.sites == ((0,), (1,), (2,), (3,))


def test_block_lattice():
    lat = Lattice.block((2, 2))
    assert lat.dim == 2
    assert len(lat.sites) == 4
    assert (1, 1) in lat


def test_open_box_grid_excludes_endpoints():
    lat = Lattice.open_box_grid(((0.0, 1.0),), 0.25)
    # interior points 0.25, 0.5, 0.75 only
    assert lat.sites == ((1,), (2,), (3,))
    assert lat.spacing == 0.25
    coords = lat.coordinates()
    np.testing.assert_allclose(coords[:, 0], [0.25, 0.5, 0.75])


def test_closed_box_points_includes_endpoints():
    pts = closed_box_points(((0.0, 1.0),), 0.5)
    assert pts == [(0,), (1,), (2,)]


def test_site_ordering_is_lexicographic():
    lat = Lattice(2, ((1, 0), (0, 1), (0, 0)))
    assert lat.sites == ((0, 0), (0, 1), (1, 0))


# ---------------------------------------------------------------------------
# multi-indices


def test_multiindex_merges_repeated_pairs():
    a = MultiIndex((((0,), PLUS), 1) for _ in range(3))
    assert a.degree() == 3
    assert a.pairs == ((((0,), PLUS), 3),)


def test_multiindex_product_adds_exponents():
    a = MultiIndex.single((0,), PLUS)
    b = MultiIndex.single((0,), PLUS, 2) * MultiIndex.single((1,), ZEE)
    c = a * b
    assert c.degree() == 4
    assert c.site_degree((0,)) == 3
    assert c.site_degree((1,)) == 1


def test_multiindex_conjugate_involution():
    a = MultiIndex.single((0,), PLUS, 2) * MultiIndex.single((1,), ZEE)
    conj = a.conjugate()
    assert conj != a
    assert conj.conjugate() == a
    assert conj.site_degree((0,)) == 2


def test_multiindex_rejects_negative_exponent():
    with pytest.raises(ValueError):
        MultiIndex(((((0,), PLUS), -1),))


def test_multiindex_rejects_unknown_component():
    with pytest.raises(ValueError):
        MultiIndex.single((0,), 7)


# ---------------------------------------------------------------------------
# weighted potential norm


def test_potential_norm_single_field_term():
    lat = Lattice.chain(1)
    V = Potential(lat, {MultiIndex.single((0,), ZEE): 0.5})
    # one degree-1 monomial touching one site: w^1 * 1 * |c|
    assert potential_norm(V) == pytest.approx(0.5 * math.e)
    assert potential_norm(V, weight=2.0) == pytest.approx(1.0)


def test_potential_norm_empty_is_zero():
    lat = Lattice.chain(2)
    assert potential_norm(Potential(lat, {})) == 0.0


def test_potential_norm_heisenberg_chain_frozen():
    # two sites, unit exchange, unit z field: e * 1 + e^2 * 3
    lat = Lattice.chain(2)
    coupling = np.array([[0.0, 1.0], [1.0, 0.0]])
    V = heisenberg_potential(lat, field_vectors=(0.0, 0.0, 1.0), coupling=coupling)
    assert potential_norm(V) == pytest.approx(24.885450125250994, rel=1e-14)
    assert potential_norm(V) == pytest.approx(math.e + 3 * math.e**2, rel=1e-14)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_potential_norm_absolute_homogeneity(factor):
    lat = Lattice.chain(2)
    coupling = np.array([[0.0, 0.7], [0.7, 0.0]])
    V = heisenberg_potential(lat, field_vectors=(0.3, 0.1, 0.2), coupling=coupling)
    base = potential_norm(V)
    assert potential_norm(V.scaled(factor)) == pytest.approx(factor * base, rel=1e-12)


def test_potential_norm_ignores_constant_terms():
    lat = Lattice.chain(1)
    V = Potential(lat, {MultiIndex.single((0,), ZEE): 1.0, MultiIndex(): 5.0})
    W = Potential(lat, {MultiIndex.single((0,), ZEE): 1.0})
    assert potential_norm(V) == potential_norm(W)


# ---------------------------------------------------------------------------
# Heisenberg potentials


def test_heisenberg_reality(tilted_potential):
    for alpha, c in tilted_potential.terms.items():
        assert tilted_potential.terms[alpha.conjugate()] == pytest.approx(
            complex(c).conjugate()
        )


def test_heisenberg_evaluates_real(tilted_potential, rng):
    H = PolynomialObservable(tilted_potential.lattice, dict(tilted_potential.terms))
    for m in random_unit_vectors(rng, 20).reshape(10, 2, 3):
        M = SpinConfiguration(tilted_potential.lattice, m)
        val = evaluate(H, M)
        assert abs(val.imag) < 1e-12


def test_ladder_pair_expansion_matches_cartesian_dot(rng):
    # M+(x)M-(y) + M-(x)M+(y) + Mz(x)Mz(y) equals the cartesian dot product
    lat = Lattice.chain(2)
    terms = {
        MultiIndex.single((0,), PLUS) * MultiIndex.single((1,), MINUS): 1.0,
        MultiIndex.single((0,), MINUS) * MultiIndex.single((1,), PLUS): 1.0,
        MultiIndex.single((0,), ZEE) * MultiIndex.single((1,), ZEE): 1.0,
    }
    dot = PolynomialObservable(lat, terms)
    for m in random_unit_vectors(rng, 200).reshape(100, 2, 3):
        M = SpinConfiguration(lat, m)
        want = float(np.dot(m[0], m[1]))
        assert evaluate(dot, M).real == pytest.approx(want, abs=1e-12)
        assert abs(evaluate(dot, M).imag) < 1e-14


def test_heisenberg_exchange_coefficients(chain2):
    coupling = np.array([[0.0, 0.25], [0.25, 0.0]])
    V = heisenberg_potential(chain2, coupling=coupling)
    pp = MultiIndex.single((0,), PLUS) * MultiIndex.single((1,), MINUS)
    mm = MultiIndex.single((0,), MINUS) * MultiIndex.single((1,), PLUS)
    zz = MultiIndex.single((0,), ZEE) * MultiIndex.single((1,), ZEE)
    assert V.terms[pp] == pytest.approx(-0.25)
    assert V.terms[mm] == pytest.approx(-0.25)
    assert V.terms[zz] == pytest.approx(-0.25)
    assert len(V.terms) == 3


def test_heisenberg_field_ladder_coefficients(chain2):
    V = heisenberg_potential(chain2, field_vectors=(1.0, 2.0, 3.0))
    plus = MultiIndex.single((0,), PLUS)
    zee = MultiIndex.single((0,), ZEE)
    assert V.terms[plus] == pytest.approx(-(1.0 - 2.0j) / math.sqrt(2))
    assert V.terms[zee] == pytest.approx(-3.0)


def test_heisenberg_rejects_asymmetric_coupling(chain2):
    bad = np.array([[0.0, 1.0], [0.5, 0.0]])
    with pytest.raises(ValueError):
        heisenberg_potential(chain2, coupling=bad)


def test_heisenberg_rejects_self_coupling(chain2):
    bad = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        heisenberg_potential(chain2, coupling=bad)


def test_potential_rejects_offlattice_site(chain2):
    with pytest.raises(ValueError):
        Potential(chain2, {MultiIndex.single((5,), ZEE): 1.0})


def test_potential_rejects_nonreal_table(chain2):
    # a lone M+ term has no conjugate partner
    with pytest.raises(ValueError):
        Potential(chain2, {MultiIndex.single((0,), PLUS): 1.0})


# ---------------------------------------------------------------------------
# serialization


def test_potential_json_roundtrip(tilted_potential):
    text = potential_to_json(tilted_potential)
    back = potential_from_json(text)
    assert back.lattice == tilted_potential.lattice
    assert back.terms == tilted_potential.terms
    payload = json.loads(text)
    assert payload["format"] == "spin-potential-v1"


def test_potential_json_rejects_foreign_payload():
    with pytest.raises(ValueError):
        potential_from_json(json.dumps({"format": "something-else"}))


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=3),
            st.sampled_from([PLUS, ZEE, MINUS]),
            st.integers(min_value=1, max_value=3),
        ),
        max_size=4,
    ),
    st.floats(min_value=-2, max_value=2),
    st.floats(min_value=-2, max_value=2),
)
def test_json_roundtrip_preserves_arbitrary_real_tables(pairs, re, im):
    lat = Lattice.chain(4)
    alpha = MultiIndex((((s,), c), e) for s, c, e in pairs)
    c = complex(re, im)
    terms = {}
    if c != 0:
        terms[alpha] = terms.get(alpha, 0) + c
        conj = alpha.conjugate()
        terms[conj] = terms.get(conj, 0) + c.conjugate()
        if not terms[conj]:
            terms = {}
    V = Potential(lat, terms)
    assert potential_from_json(potential_to_json(V)).terms == V.terms
