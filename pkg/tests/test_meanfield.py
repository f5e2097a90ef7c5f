"""Continuum spin systems: smearing kernels, discrete norms, grid limits."""

import math

import numpy as np
import pytest

from spinsemi import ConfigError, Lattice, MINUS, PLUS, ZEE, MultiIndex
from spinsemi.classical import evaluate, poisson_bracket
from spinsemi.meanfield import (
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
    exchange_taylor_residual,
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
from spinsemi.quantum import SpinRep, operator_norm, quantize

BOX = ((0.0, 1.0),)


def sine_probe(comp=ZEE):
    return observable_smearing(1, BOX, comp, weight=lambda x: math.sin(math.pi * x[0]) ** 2)


def tilted_meanfield():
    return heisenberg_meanfield(
        1, BOX, field_vector=(0.1, 0.0, 0.15), exchange_radius=0.45, exchange_amplitude=0.1
    )


# ---------------------------------------------------------------------------
# kernels and discrete norms


def test_smearing_function_validates_arity_and_box():
    with pytest.raises(ValueError):
        SmearingFunction(0, 1, lambda c, p: 0.0, BOX)
    with pytest.raises(ValueError):
        SmearingFunction(1, 2, lambda c, p: 0.0, BOX)


def test_norm1_h_uniform_probe_frozen():
    # closed grid on [0,1] has 1/h + 1 points: h (1/h + 1) = 1 + h
    f = observable_smearing(1, BOX, ZEE)
    for h in (0.5, 0.25, 0.2, 0.125):
        assert norm1_h(f, h) == pytest.approx(1.0 + h, rel=1e-12)


def test_norm1_h_converges_to_integral():
    f = sine_probe()
    # int sin^2(pi x) dx = 1/2; the closed-grid quadrature tends to it
    vals = [norm1_h(f, h) for h in (0.25, 0.125, 0.0625)]
    for v, w in zip(vals, vals[1:]):
        assert abs(w - 0.5) <= abs(v - 0.5) + 1e-12
    assert vals[-1] == pytest.approx(0.5, abs=1e-3)


def test_norm_inf1_h_field_kernel():
    b = (0.3, 0.0, 0.4)
    f = field_smearing(1, BOX, b)
    # arity 1: sup over single points of the component sum, no h weight
    want = (2 * 0.3 / math.sqrt(2)) + 0.4
    assert norm_inf1_h(f, 0.25) == pytest.approx(want, rel=1e-12)


def test_meanfield_norm_combines_kernels():
    V = tilted_meanfield()
    h = 0.25
    total = sum(k.arity * math.exp(k.arity) * norm_inf1_h(k, h) for k in V.kernels)
    assert meanfield_potential_norm(V, h) == pytest.approx(total, rel=1e-12)


def test_symmetrize_is_idempotent(rng):
    ex = exchange_smearing(1, BOX, 0.4, 0.3)

    def asym_func(comps, pts):
        return ex(comps, pts) * (1.0 + 0.5 * float(pts[0][0] - pts[1][0]))

    f = SmearingFunction(2, 1, asym_func, BOX)
    once = symmetrize(f)
    twice = symmetrize(once)
    for _ in range(20):
        pts = rng.uniform(0.0, 1.0, size=(2, 1))
        comps = tuple(int(c) for c in rng.integers(0, 3, size=2))
        assert once(comps, pts) == pytest.approx(twice(comps, pts), abs=1e-13)


def test_symmetrize_refuses_large_arity():
    f = SmearingFunction(7, 1, lambda c, p: 0.0, BOX)
    with pytest.raises(ValueError):
        symmetrize(f)


# ---------------------------------------------------------------------------
# the harpoon contraction


def test_harpoon_bracket_identity(rng):
    # {M_h(f), M_h(g)} = h^d p q M_h(f harpoon g) on every grid state
    h = 0.2
    lat = Lattice.open_box_grid(BOX, h)
    cases = [
        (field_smearing(1, BOX, (0.2, 0.1, 0.3)), sine_probe()),
        (exchange_smearing(1, BOX, 0.4, 0.35), sine_probe(PLUS)),
        (exchange_smearing(1, BOX, 0.4, 0.35), sine_probe()),
    ]
    for f, g in cases:
        lhs_poly = poisson_bracket(discretize(f, lat), discretize(g, lat))
        rhs_poly = discretize(harpoon(f, g), lat)
        factor = (h ** lat.dim) * f.arity * g.arity
        for _ in range(6):
            theta0 = float(rng.uniform(0.2, 2.0))
            M = spin_wave_field(BOX, theta0=theta0).sample(lat)
            lhs = evaluate(lhs_poly, M)
            rhs = factor * evaluate(rhs_poly, M)
            assert lhs == pytest.approx(rhs, abs=1e-10)


def test_harpoon_uniform_probe_commutes_with_exchange():
    # isotropic exchange conserves every total spin component
    ex = exchange_smearing(1, BOX, 0.4, 0.35)
    uniform = observable_smearing(1, BOX, ZEE)
    hg = harpoon(ex, uniform)
    assert norm1_h(hg, 0.2) == pytest.approx(0.0, abs=1e-14)


def test_harpoon_norm_inequality():
    f = exchange_smearing(1, BOX, 0.4, 0.35)
    cases = [
        (field_smearing(1, BOX, (0.2, 0.1, 0.3)), sine_probe()),
        (f, sine_probe(PLUS)),
        (f, sine_probe(MINUS)),
    ]
    h = 0.2
    for f, g in cases:
        lhs = norm1_h(harpoon(f, g), h)
        rhs = f.arity * g.arity * norm_inf1_h(f, h) * norm1_h(g, h)
        assert lhs <= rhs * (1 + 1e-12)


def test_harpoon_adds_interaction_ranges():
    a = exchange_smearing(1, BOX, 0.3, 0.5)
    b = exchange_smearing(1, BOX, 0.2, 0.5)
    assert harpoon(a, b).range_radius == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# potentials, discretization, quadrature


def test_meanfield_potential_rejects_nonreal_kernel():
    def complex_probe(comps, pts):
        return 1.0j if comps[0] == ZEE else 0.0

    bad = SmearingFunction(1, 1, complex_probe, BOX)
    with pytest.raises(ValueError):
        MeanFieldPotential(1, (bad,))


def test_heisenberg_meanfield_requires_some_kernel():
    with pytest.raises(ConfigError):
        heisenberg_meanfield(1, BOX)


def test_discretize_needs_spacing():
    lat = Lattice.chain(3)
    with pytest.raises(ValueError):
        discretize(sine_probe(), lat)


def test_discretize_weighted_quadrature():
    f = sine_probe()
    h = 0.25
    lat = Lattice.open_box_grid(BOX, h)
    A = discretize(f, lat)
    # one term per interior grid point, coefficient h sin^2(pi x)
    assert A.n_terms() == lat.n_sites
    for site in lat.sites:
        alpha = MultiIndex.single(site, ZEE)
        x = site[0] * h
        assert A.coefficient(alpha) == pytest.approx(h * math.sin(math.pi * x) ** 2)


def test_evaluate_observable_bounded_by_norm(rng):
    f = sine_probe()
    h = 0.125
    for theta0 in rng.uniform(0.2, 2.5, size=5):
        M = spin_wave_field(BOX, theta0=float(theta0))
        val = evaluate_observable(f, M, h)
        assert abs(val) <= norm1_h(f, h) + 1e-12


def test_effective_potential_carries_grid_delta_scale():
    V = tilted_meanfield()
    h = 0.2
    lat = Lattice.open_box_grid(BOX, h)
    W = effective_lattice_potential(V, lat)
    direct = {}
    for k in V.kernels:
        for alpha, c in discretize(k, lat).terms.items():
            direct[alpha] = direct.get(alpha, 0.0) + c / h
    assert set(W.terms) == set(direct)
    for alpha, c in direct.items():
        assert W.terms[alpha] == pytest.approx(c, rel=1e-12)


# ---------------------------------------------------------------------------
# quantization on the grid


def test_quantize_smeared_matches_weighted_quantization():
    f = sine_probe()
    h, s = 0.25, 1.5
    lat = Lattice.open_box_grid(BOX, h)
    rep_mf = SpinRep.mean_field(s, h, dim=1)
    lhs = quantize_smeared(f, rep_mf, lat)
    rhs = quantize(discretize(f, lat), SpinRep.large_spin(s))
    np.testing.assert_allclose(lhs.matrix, rhs.matrix, atol=1e-13)


def test_quantized_probe_norm_bounded_by_discrete_norm():
    f = sine_probe()
    h = 0.2
    lat = Lattice.open_box_grid(BOX, h)
    for s in (1.0, 2.0):
        rep = SpinRep.mean_field(s, h, dim=1)
        op = quantize_smeared(f, rep, lat)
        assert operator_norm(op) <= norm1_h(f, h) + 1e-12


def test_quantized_probe_norm_spin_half_degrades_by_sqrt2():
    f = sine_probe(PLUS)
    h = 0.25
    lat = Lattice.open_box_grid(BOX, h)
    rep = SpinRep.mean_field(0.5, h, dim=1)
    op = quantize_smeared(f, rep, lat)
    assert operator_norm(op) <= math.sqrt(2.0) * norm1_h(f, h) + 1e-12


# ---------------------------------------------------------------------------
# dynamics and the continuum gap


def test_continuum_flow_conserves_site_norms():
    V = tilted_meanfield()
    traj = continuum_flow(V, spin_wave_field(BOX), h=0.2, t=2.0, dt=1e-3)
    assert traj.norm_drift() < 1e-9


def test_meanfield_gap_scales_linearly_in_h():
    V = tilted_meanfield()
    f = sine_probe()
    errs = {h: meanfield_egorov_error(V, f, t=0.4, h=h, s=1.0, tol=1e-6) for h in (0.5, 0.25)}
    assert errs[0.25] < errs[0.5]
    ratio = errs[0.5] / errs[0.25]
    assert 1.6 < ratio < 2.4


def test_meanfield_gap_scales_inversely_in_s():
    V = tilted_meanfield()
    f = sine_probe()
    e1 = meanfield_egorov_error(V, f, t=0.4, h=0.5, s=0.5, tol=1e-6)
    e2 = meanfield_egorov_error(V, f, t=0.4, h=0.5, s=1.0, tol=1e-6)
    assert 1.6 < e1 / e2 < 2.4


def test_coherent_continuum_error_small_and_shrinking():
    V = tilted_meanfield()
    f = sine_probe()
    M0 = spin_wave_field(BOX)
    errs = {s: coherent_continuum_error(V, f, M0, t=0.3, h=0.5, s=s) for s in (1.0, 4.0)}
    assert errs[4.0] < errs[1.0]


# ---------------------------------------------------------------------------
# narrow-kernel reduction of the exchange field


def test_exchange_taylor_residual_second_order():
    field = spin_wave_field(BOX)
    rows = []
    for radius in (0.2, 0.1, 0.05):
        kernel = cosine_bump(radius, 1.0)
        residual, scale = exchange_taylor_residual(kernel, radius, field)
        assert scale > 0
        rows.append(residual / scale)
    # relative residual falls roughly like radius^2
    assert rows[1] < rows[0] / 2
    assert rows[2] < rows[1] / 2
    assert rows[-1] < 1e-3


def test_cosine_bump_support_and_positivity():
    k = cosine_bump(0.3, 2.0)
    assert k(0.0) == pytest.approx(2.0)
    assert k(0.29) > 0.0
    assert k(0.3) == 0.0
    assert k(5.0) == 0.0
    with pytest.raises(ConfigError):
        cosine_bump(-1.0, 1.0)


def test_spin_wave_field_unit_vectors(rng):
    field = spin_wave_field(BOX, theta0=0.7, theta1=1.3, phi0=0.2, phi1=2.1)
    for x in rng.uniform(0.0, 1.0, size=10):
        assert np.linalg.norm(field(np.array([x]))) == pytest.approx(1.0, abs=1e-12)


def test_spin_field_sample_matches_pointwise():
    field = spin_wave_field(BOX)
    lat = Lattice.open_box_grid(BOX, 0.25)
    sampled = field.sample(lat)
    for k, x in enumerate(lat.coordinates()):
        np.testing.assert_allclose(sampled.cartesian[k], field(x), atol=1e-14)
