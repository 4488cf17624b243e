import numpy as np
import pytest

from dvbgk import (
    DistributionField,
    FieldKind,
    GridConfig,
    MacroFields,
    build_grid,
    compute_moments,
    local_maxwellian,
    project,
)
from dvbgk.diagnostics import (
    DiagnosticsContext,
    coercivity_measure,
    conservation_totals,
    csv_header,
    energy_norm,
    field_bound_check,
    fit_decay_rate,
    h_functional,
    phase_l2,
    read_csv,
    record_to_row,
    spatial_derivative,
    twin_distance,
    velocity_derivative,
)
from dvbgk.errors import (
    GridMismatch,
    InvalidConfig,
    NegativeDensityValue,
    NonPositiveValue,
    OrderTooHighForGrid,
    ZeroField,
)
from dvbgk.phase_grid import equilibrium_field, zero_perturbation


def test_totals_of_equilibrium(default_grid):
    tot = conservation_totals(equilibrium_field(default_grid))
    assert tot.mass == pytest.approx(1.0, abs=1e-8)  # unit torus volume
    assert np.abs(tot.momentum).max() < 1e-14
    assert tot.energy == pytest.approx(3.0, abs=1e-6)


def test_perturbation_totals_are_weighted(small_grid, small_basis):
    # a purely microscopic perturbation carries no invariant content
    rng = np.random.default_rng(7)
    vals = rng.standard_normal((small_grid.n_cells, small_grid.n_velocity))
    f = DistributionField(small_grid, vals, FieldKind.PERTURBATION)
    pf = project(f, small_basis)
    micro = DistributionField(small_grid, vals - pf.values, FieldKind.PERTURBATION)
    tot = conservation_totals(micro)
    assert abs(tot.mass) < 1e-12
    assert np.abs(tot.momentum).max() < 1e-12
    assert abs(tot.energy) < 1e-12


def test_h_of_equilibrium(default_grid):
    # analytic Gaussian entropy: integral of m log m = -(3/2)(1 + log 2 pi)
    expect = -1.5 * (1.0 + np.log(2.0 * np.pi))
    assert h_functional(equilibrium_field(default_grid)) == pytest.approx(expect, abs=1e-6)


def test_h_scaling_identity(default_grid):
    F = equilibrium_field(default_grid)
    doubled = DistributionField(default_grid, 2.0 * F.values, FieldKind.ABSOLUTE)
    h1 = h_functional(F)
    mass = conservation_totals(F).mass
    h2 = h_functional(doubled)
    assert h2 == pytest.approx(2.0 * h1 + 2.0 * np.log(2.0) * mass, rel=1e-12)


def test_h_gibbs_inequality(small_grid):
    # the Maxwellian with the same discrete moments has no larger entropy
    rng = np.random.default_rng(3)
    g = small_grid
    x = g.x_axis
    bump = 1.0 + 0.25 * np.sin(2 * np.pi * x)
    noise = 1.0 + 0.2 * rng.random((g.n_cells, g.n_velocity))
    F = DistributionField(
        g, bump[:, None] * g.background_maxwellian[None, :] * noise, FieldKind.ABSOLUTE
    )
    M = local_maxwellian(compute_moments(F), g, mode="conservative")
    assert h_functional(M) <= h_functional(F) + 1e-12 * abs(h_functional(F))


def test_h_negative_floor(small_grid):
    F = equilibrium_field(small_grid)
    F.values[0, 0] = -1e-15  # tolerated roundoff
    h_functional(F)
    F.values[0, 0] = -1e-10
    with pytest.raises(NegativeDensityValue):
        h_functional(F)


def test_energy_norm_zero_and_l2(small_grid, rng):
    assert energy_norm(zero_perturbation(small_grid)) == 0.0
    f = DistributionField(
        small_grid,
        rng.standard_normal((small_grid.n_cells, small_grid.n_velocity)),
        FieldKind.PERTURBATION,
    )
    assert energy_norm(f, 0, 0) == pytest.approx(phase_l2(f), rel=1e-13)


def test_energy_norm_spectral_derivative(default_grid, default_basis):
    g = default_grid
    x = g.x_axis
    vals = np.sin(2 * np.pi * x)[:, None] * default_basis.vectors[:, 4][None, :]
    f = DistributionField(g, vals, FieldKind.PERTURBATION)
    # |||f||| with orders (1,0) = ||f|| + ||df/dx|| = (1 + 2 pi) ||f||
    assert energy_norm(f, 1, 0) == pytest.approx((1 + 2 * np.pi) * phase_l2(f), rel=1e-10)


def test_energy_norm_matches_derivative_arrays(small_grid, rng):
    # dual route: the Fourier-side norms equal explicit derivative arrays
    g = small_grid
    f = DistributionField(
        g, rng.standard_normal((g.n_cells, g.n_velocity)), FieldKind.PERTURBATION
    )
    total = 0.0
    w = g.cell_volume * g.weights
    for beta in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        vb = velocity_derivative(f.values, g, beta)
        for alpha in [(0,), (1,), (2,)]:
            d = spatial_derivative(vb, g, alpha)
            total += np.sqrt(np.einsum("nq,q->", d * d, w))
    assert energy_norm(f, 2, 1) == pytest.approx(total, rel=1e-10)


def test_energy_norm_order_guard(small_grid):
    with pytest.raises(OrderTooHighForGrid):
        energy_norm(zero_perturbation(small_grid), 2, 14)


def test_field_bounds_background():
    g = build_grid(GridConfig(spatial_points=8, velocity_points=8, quadrature_tolerance=2e-3))
    mac = MacroFields(np.ones(8), np.zeros((8, 3)), np.ones(8))
    rep = field_bound_check(mac, 0.0, g)
    assert rep.rho_low_margin == 0.0
    assert rep.rho_high_margin == 0.0
    assert rep.speed_margin == 0.0
    assert rep.temp_low_margin == 0.5
    assert rep.temp_high_margin == 0.5
    assert rep.ok


def test_field_bounds_boundary_case():
    g = build_grid(GridConfig(spatial_points=8, velocity_points=8, quadrature_tolerance=2e-3))
    rho = np.full(8, 1.01)
    rep = field_bound_check(MacroFields(rho, np.zeros((8, 3)), np.ones(8)), 1e-4, g)
    assert abs(rep.rho_high_margin) < 1e-15
    assert rep.rho_low_margin > 0


def test_fit_decay_exact_exponential():
    t = np.linspace(0, 10, 100)
    rate, r2 = fit_decay_rate(t, np.exp(-0.5 * t))
    assert abs(rate - 0.5) < 1e-9
    assert r2 > 1 - 1e-12


def test_fit_decay_constant_series():
    t = np.linspace(0, 5, 50)
    rate, r2 = fit_decay_rate(t, np.ones(50))
    assert rate == 0.0
    assert r2 == 1.0


def test_fit_decay_guards():
    t = np.linspace(0, 5, 50)
    with pytest.raises(NonPositiveValue):
        fit_decay_rate(t, np.linspace(1, -1, 50))
    with pytest.raises(InvalidConfig):
        fit_decay_rate(t[:5], np.ones(5))


def test_coercivity_measure_microscopic(small_grid, small_basis, rng):
    vals = rng.standard_normal((small_grid.n_cells, small_grid.n_velocity))
    f = DistributionField(small_grid, vals, FieldKind.PERTURBATION)
    pf = project(f, small_basis)
    micro = DistributionField(small_grid, vals - pf.values, FieldKind.PERTURBATION)
    nu_c = 1.7
    [(_, delta)] = coercivity_measure([(0.0, micro)], small_basis, nu_c)
    assert abs(delta - nu_c) < 1e-12

    # dual route: delta must equal nu_c ||(I-P)f||^2 / ||f||^2 from project()
    [(_, delta_f)] = coercivity_measure([(0.0, f)], small_basis, nu_c)
    expect = nu_c * phase_l2(micro) ** 2 / phase_l2(f) ** 2
    assert abs(delta_f - expect) < 1e-12


def test_coercivity_measure_hydrodynamic(small_grid, small_basis):
    e1 = DistributionField(
        small_grid,
        np.tile(small_basis.vectors[:, 0], (small_grid.n_cells, 1)),
        FieldKind.PERTURBATION,
    )
    [(_, delta)] = coercivity_measure([(0.0, e1)], small_basis, 1.0)
    assert abs(delta) < 1e-12


def test_coercivity_zero_field(small_grid, small_basis):
    with pytest.raises(ZeroField):
        coercivity_measure([(0.0, zero_perturbation(small_grid))], small_basis, 1.0)


def test_twin_distance(small_grid, small_basis, rng):
    vals = rng.standard_normal((small_grid.n_cells, small_grid.n_velocity))
    f = DistributionField(small_grid, vals, FieldKind.PERTURBATION)
    assert twin_distance(f, f) == 0.0
    x = small_grid.x_axis
    bump_vals = np.sin(2 * np.pi * x)[:, None] * small_basis.vectors[:, 0][None, :]
    bump = DistributionField(small_grid, bump_vals, FieldKind.PERTURBATION)
    eps = 1e-4
    fbar = DistributionField(small_grid, vals + eps * bump_vals, FieldKind.PERTURBATION)
    assert twin_distance(f, fbar) == pytest.approx(eps * phase_l2(bump), rel=1e-12)
    other = zero_perturbation(build_grid(GridConfig(spatial_points=16, velocity_points=16)))
    with pytest.raises(GridMismatch):
        twin_distance(f, other)


def test_record_roundtrip_through_csv(tmp_path, small_grid, small_basis):
    ctx = DiagnosticsContext(small_grid, small_basis, mode="nonlinear", nu_c=1.0)
    rec = ctx.make_record(0.0, 0, equilibrium_field(small_grid))
    path = tmp_path / "diag.csv"
    path.write_text(csv_header() + "\n" + record_to_row(rec) + "\n")
    cols = read_csv(path)
    assert cols["t"][0] == 0.0
    assert cols["mass"][0] == rec.mass  # 17 significant digits round-trip
    assert np.isnan(cols["twin_distance"][0])
    assert cols["field_bounds_ok"][0] == 1.0


def test_context_drifts_start_at_zero(small_grid, small_basis):
    ctx = DiagnosticsContext(small_grid, small_basis, mode="nonlinear", nu_c=1.0)
    rec = ctx.make_record(0.0, 0, equilibrium_field(small_grid))
    assert rec.mass_drift == 0.0
    assert rec.energy_drift == 0.0
    assert rec.e_accum == pytest.approx(0.5 * rec.energy_norm**2, rel=1e-12)


def test_context_e_accum_monotone_integral(small_grid, small_basis):
    ctx = DiagnosticsContext(small_grid, small_basis, mode="nonlinear", nu_c=2.0)
    F = equilibrium_field(small_grid)
    recs = [ctx.make_record(0.1 * i, i, F) for i in range(4)]
    # stationary field: E(t) = 0.5 q + nu_c * q * t with q = |||f|||^2
    q = recs[0].energy_norm ** 2
    for i, rec in enumerate(recs):
        assert rec.e_accum == pytest.approx(0.5 * q + 2.0 * q * 0.1 * i, rel=1e-10)
