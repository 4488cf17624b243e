import numpy as np
import pytest

from dvbgk import (
    DistributionField,
    FieldKind,
    GridConfig,
    apply_L,
    build_basis,
    build_grid,
    linearization_remainder,
    micro_macro_split,
    project,
)
from dvbgk.diagnostics import phase_inner, phase_l2
from dvbgk.errors import DegenerateState, GridMismatch, InvalidConfig
from dvbgk.linearized import hydrodynamic_functions


def _tile(grid, row):
    return DistributionField(
        grid, np.tile(row, (grid.n_cells, 1)), FieldKind.PERTURBATION
    )


def _random_pert(grid, rng):
    return DistributionField(
        grid, rng.standard_normal((grid.n_cells, grid.n_velocity)), FieldKind.PERTURBATION
    )


def test_gram_is_identity(default_basis):
    err = np.abs(default_basis.gram - np.eye(default_basis.size)).max()
    assert err < 1e-12


def test_raw_gram_nearly_orthonormal(default_basis):
    # before re-orthonormalization the density/energy pairing carries the
    # ~5e-8 quadrature tail of the |v|^2 moment
    raw = default_basis.raw_gram
    off = raw - np.diag(np.diag(raw))
    assert np.abs(off).max() < 1e-7
    assert abs(off[0, 4]) < 1e-7
    assert np.abs(np.diag(raw) - 1.0).max() < 1e-6


def test_basis_size_by_velocity_dims(small_basis):
    assert small_basis.size == 5
    g1 = build_grid(GridConfig(spatial_points=8, velocity_dims=1))
    assert build_basis(g1).size == 3


def test_projection_fixes_basis_vectors(small_grid, small_basis):
    for i in range(small_basis.size):
        e = _tile(small_grid, small_basis.vectors[:, i])
        pe = project(e, small_basis)
        assert np.abs(pe.values - e.values).max() < 1e-13


def test_projection_of_velocity_square(default_grid, default_basis):
    # v1^2 sqrt(m) decomposes into the density and energy directions with
    # analytic coefficients 1 and 2/sqrt(6)
    g = default_grid
    row = g.V[:, 0] ** 2 * g.sqrt_maxwellian
    f = _tile(g, row)
    pf = project(f, default_basis)
    expect = default_basis.vectors[:, 0] + (2 / np.sqrt(6)) * default_basis.vectors[:, 4]
    assert np.abs(pf.values - expect[None, :]).max() < 1e-6


def test_projection_idempotent(small_grid, small_basis, rng):
    f = _random_pert(small_grid, rng)
    pf = project(f, small_basis)
    ppf = project(pf, small_basis)
    assert np.abs(ppf.values - pf.values).max() < 1e-12 * max(1.0, np.abs(pf.values).max())


def test_projection_is_contraction(small_grid, small_basis, rng):
    for _ in range(5):
        f = _random_pert(small_grid, rng)
        assert phase_l2(project(f, small_basis)) <= phase_l2(f) * (1 + 1e-14)


def test_projection_orthogonality(small_grid, small_basis, rng):
    f = _random_pert(small_grid, rng)
    pf = project(f, small_basis)
    rest = DistributionField(small_grid, f.values - pf.values, FieldKind.PERTURBATION)
    n2 = phase_l2(f) ** 2
    assert abs(phase_inner(pf, rest)) < 1e-12 * n2


def test_kernel_of_L(small_grid, small_basis):
    for i in range(small_basis.size):
        e = _tile(small_grid, small_basis.vectors[:, i])
        assert phase_l2(apply_L(e, small_basis, 1.0)) < 1e-12


def test_coercivity_identity(small_grid, small_basis, rng):
    nu_c = 1.3
    for _ in range(20):
        f = _random_pert(small_grid, rng)
        lf = apply_L(f, small_basis, nu_c)
        pf = project(f, small_basis)
        micro = DistributionField(small_grid, f.values - pf.values, FieldKind.PERTURBATION)
        lhs = phase_inner(lf, f)
        rhs = -nu_c * phase_l2(micro) ** 2
        assert abs(lhs - rhs) < 1e-12 * phase_l2(f) ** 2
        assert lhs <= 0.0


def test_L_microscopic_field(small_grid, small_basis, rng):
    f = _random_pert(small_grid, rng)
    pf = project(f, small_basis)
    micro = DistributionField(small_grid, f.values - pf.values, FieldKind.PERTURBATION)
    nu_c = 0.7
    lf = apply_L(micro, small_basis, nu_c)
    assert abs(phase_inner(lf, micro) + nu_c * phase_l2(micro) ** 2) < 1e-12 * phase_l2(micro) ** 2


def test_L_self_adjoint(small_grid, small_basis, rng):
    f = _random_pert(small_grid, rng)
    g = _random_pert(small_grid, rng)
    lf, lg = apply_L(f, small_basis, 1.0), apply_L(g, small_basis, 1.0)
    scale = phase_l2(f) * phase_l2(g)
    assert abs(phase_inner(lf, g) - phase_inner(f, lg)) < 1e-12 * scale


def test_grid_mismatch_rejected(small_grid, default_basis, rng):
    f = _random_pert(small_grid, rng)
    with pytest.raises(GridMismatch):
        project(f, default_basis)


def test_split_of_invariant_direction(small_grid, small_basis):
    e1 = _tile(small_grid, small_basis.vectors[:, 0])
    split = micro_macro_split(e1, small_grid)
    assert np.abs(split.hydro.values - e1.values).max() < 1e-12
    assert np.abs(split.micro.values).max() < 1e-12


def test_split_of_microscopic_field(small_grid, small_basis, rng):
    f = _random_pert(small_grid, rng)
    micro0 = micro_macro_split(f, small_grid).micro
    split = micro_macro_split(micro0, small_grid)
    scale = np.abs(micro0.values).max()
    assert np.abs(split.a).max() < 1e-12 * scale
    assert np.abs(split.b).max() < 1e-12 * scale
    assert np.abs(split.c).max() < 1e-12 * scale
    assert np.abs(split.hydro.values).max() < 1e-12 * scale


def test_split_reconstructs_and_is_orthogonal(small_grid, rng):
    f = _random_pert(small_grid, rng)
    split = micro_macro_split(f, small_grid)
    recon_err = np.abs((split.hydro.values + split.micro.values) - f.values).max()
    assert recon_err < 1e-14 * np.abs(f.values).max()
    funcs = hydrodynamic_functions(small_grid) * small_grid.weights[:, None]
    residual = split.micro.values @ funcs
    assert np.abs(residual).max() < 1e-12 * np.abs(f.values).max()


def test_split_agrees_with_projection(small_grid, small_basis, rng):
    # the hydrodynamic span equals the invariant span, so the Gram-solve
    # split and the orthonormal projection are the same operator; the
    # measured equivalence constant between the two microscopic norms is 1
    f = _random_pert(small_grid, rng)
    split = micro_macro_split(f, small_grid)
    pf = project(f, small_basis)
    micro_p = DistributionField(small_grid, f.values - pf.values, FieldKind.PERTURBATION)
    ratio = phase_l2(split.micro) / phase_l2(micro_p)
    assert abs(ratio - 1.0) < 1e-10


def test_remainder_zero_field(small_grid, small_basis):
    f = DistributionField(
        small_grid, np.zeros((small_grid.n_cells, small_grid.n_velocity)), FieldKind.PERTURBATION
    )
    rows = linearization_remainder(f, [1e-1, 1e-2], small_basis)
    for _, r, _ in rows:
        assert r < 1e-12


def test_remainder_energy_mode_plateau(small_grid, small_basis):
    f = _tile(small_grid, small_basis.vectors[:, 4])
    rows = linearization_remainder(f, [1e-1, 1e-2, 1e-3], small_basis)
    ratios = [row[2] for row in rows]
    assert max(ratios) / min(ratios) - 1.0 < 0.10
    assert ratios[-1] > 1e-3  # genuinely quadratic, not noise


def test_remainder_density_mode_vanishes(small_grid, small_basis):
    # the Maxwellian is exactly linear in the density direction, so the
    # remainder sits at the Newton noise floor for every epsilon
    f = _tile(small_grid, small_basis.vectors[:, 0])
    rows = linearization_remainder(f, [1e-1, 1e-2, 1e-3], small_basis)
    for _, r, _ in rows:
        assert r < 1e-10


def test_remainder_rejects_degenerate_epsilon(small_grid, small_basis):
    f = _tile(small_grid, small_basis.vectors[:, 1])  # momentum direction
    with pytest.raises(DegenerateState):
        linearization_remainder(f, [2.0], small_basis)


def test_remainder_quadratic_bound(small_grid, small_basis):
    # r(eps)/eps^2 stays within a factor 2 of its smallest-eps value
    f = _tile(
        small_grid,
        (small_basis.vectors[:, 0] + small_basis.vectors[:, 1] + small_basis.vectors[:, 4])
        / np.sqrt(3.0),
    )
    rows = linearization_remainder(f, [1e-1, 3e-2, 1e-2, 3e-3, 1e-3], small_basis)
    ratios = [row[2] for row in rows]
    assert max(ratios) <= 2.0 * ratios[-1]


def test_split_requires_perturbation(small_grid):
    from dvbgk.phase_grid import equilibrium_field

    with pytest.raises(InvalidConfig):
        micro_macro_split(equilibrium_field(small_grid), small_grid)
