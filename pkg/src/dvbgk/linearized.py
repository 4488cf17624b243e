"""Collision-invariant projection, linearized relaxation operator, micro-macro split.

The five invariant directions (density, bulk velocity, energy) are sampled on
the velocity grid and re-orthonormalized against the *discrete* inner product,
so projection identities hold at machine precision rather than quadrature
precision.  For velocity_dims == 1 the basis degenerates to three functions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GramSingular, GridMismatch, InvalidConfig, RankDeficiency
from .maxwellian import compute_moments, local_maxwellian
from .phase_grid import DistributionField, FieldKind, PhaseGrid


class ProjectionBasis:
    """Discretely orthonormal basis of the collision-invariant subspace.

    vectors:   (n_velocity, k) orthonormalized columns
    weighted:  vectors scaled by quadrature weights, so that
               coefficients = values @ weighted
    raw_gram:  Gram matrix of the sampled (pre-orthonormalization) functions
    """

    def __init__(self, grid: PhaseGrid):
        sq = grid.sqrt_maxwellian
        d = grid.velocity_dims
        if d == 3:
            funcs = [sq] + [grid.V[:, a] * sq for a in range(3)]
            funcs.append((grid.V2 - 3.0) / np.sqrt(6.0) * sq)
        else:
            # 1-D analogue: density, velocity, scaled energy directions
            funcs = [sq, grid.V[:, 0] * sq, (grid.V2 - 1.0) / np.sqrt(2.0) * sq]
        raw = np.stack(funcs, axis=1)
        w = grid.weights
        self.raw_gram = (raw * w[:, None]).T @ raw

        # modified Gram-Schmidt in the weighted inner product
        vecs = raw.copy()
        k = vecs.shape[1]
        for i in range(k):
            for j in range(i):
                vecs[:, i] -= (w @ (vecs[:, i] * vecs[:, j])) * vecs[:, j]
            nrm = np.sqrt(w @ vecs[:, i] ** 2)
            if nrm < 1e-8:
                raise RankDeficiency(
                    f"sampled invariant {i} is numerically dependent (norm {nrm:.3e})"
                )
            vecs[:, i] /= nrm

        self.grid = grid
        self.vectors = vecs
        self.weighted = vecs * w[:, None]
        self.gram = self.weighted.T @ vecs
        self.orthonormalized = True
        self.size = k
        for arr in (self.vectors, self.weighted, self.raw_gram, self.gram):
            arr.flags.writeable = False

    def coefficients(self, values: np.ndarray) -> np.ndarray:
        """Per-cell inner products of rows of ``values`` with each basis vector."""
        return values @ self.weighted


def build_basis(grid: PhaseGrid) -> ProjectionBasis:
    return ProjectionBasis(grid)


def _check_grids(field_: DistributionField, basis: ProjectionBasis):
    if not field_.grid.same_as(basis.grid):
        raise GridMismatch("field and basis live on different grids")


def project(field_: DistributionField, basis: ProjectionBasis) -> DistributionField:
    """Orthogonal projection onto the invariant subspace, cell by cell."""
    _check_grids(field_, basis)
    coeffs = field_.values @ basis.weighted
    return DistributionField(field_.grid, coeffs @ basis.vectors.T, field_.kind)


def apply_L(field_: DistributionField, basis: ProjectionBasis, nu_c: float) -> DistributionField:
    """Linearized relaxation operator nu_c (P - I) applied to a perturbation."""
    _check_grids(field_, basis)
    coeffs = field_.values @ basis.weighted
    values = nu_c * (coeffs @ basis.vectors.T - field_.values)
    return DistributionField(field_.grid, values, field_.kind)


@dataclass
class MicroMacroSplit:
    """Hydrodynamic/microscopic decomposition of a perturbation.

    The hydrodynamic part is the orthogonal projection of f onto
    span{sqrt(m), v sqrt(m), |v|^2 sqrt(m)}, written with coefficients
    (a, b, c).  hydro + micro reproduces f exactly by construction.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    hydro: DistributionField
    micro: DistributionField


def hydrodynamic_functions(grid: PhaseGrid) -> np.ndarray:
    """Non-orthogonal span {sqrt m, v_i sqrt m, |v|^2 sqrt m}, shape (Nq, d+2)."""
    sq = grid.sqrt_maxwellian
    cols = [sq] + [grid.V[:, a] * sq for a in range(grid.velocity_dims)]
    cols.append(grid.V2 * sq)
    return np.stack(cols, axis=1)


def micro_macro_split(field_: DistributionField, grid: PhaseGrid) -> MicroMacroSplit:
    """Split f into hydrodynamic and microscopic parts via the Gram system.

    The spanning functions are not mutually orthogonal, so the coefficients
    solve the Gram system; that is what makes the microscopic remainder
    discretely orthogonal to the whole span.
    """
    if not field_.grid.same_as(grid):
        raise GridMismatch("field and grid disagree")
    if field_.kind is not FieldKind.PERTURBATION:
        raise InvalidConfig("micro_macro_split expects a perturbation field")
    funcs = hydrodynamic_functions(grid)
    w = grid.weights
    gram = (funcs * w[:, None]).T @ funcs
    rhs = field_.values @ (funcs * w[:, None])
    try:
        coef = np.linalg.solve(gram, rhs.T).T
    except np.linalg.LinAlgError as exc:
        raise GramSingular(f"hydrodynamic Gram system singular: {exc}") from exc
    d = grid.velocity_dims
    hydro_vals = coef @ funcs.T
    hydro = DistributionField(grid, hydro_vals, FieldKind.PERTURBATION)
    micro = DistributionField(grid, field_.values - hydro_vals, FieldKind.PERTURBATION)
    return MicroMacroSplit(
        a=coef[:, 0], b=coef[:, 1 : 1 + d], c=coef[:, -1], hydro=hydro, micro=micro
    )


def linearization_remainder(
    field_: DistributionField,
    epsilons,
    basis: ProjectionBasis | None = None,
    maxwellian_mode: str = "conservative",
):
    """Measure how fast M(m + eps sqrt(m) f) - m - eps sqrt(m) Pf shrinks.

    Returns a list of (eps, r, r/eps^2) rows; a stabilizing third column as
    eps -> 0 evidences the quadratic-order remainder.  The conservative
    Maxwellian is used by default so the eps-independent quadrature bias of
    plain sampling does not pollute the small-eps rows.

    Raises DegenerateState (via compute_moments) when eps is large enough to
    break positivity of the moments.
    """
    grid = field_.grid
    if basis is None:
        basis = build_basis(grid)
    _check_grids(field_, basis)
    m = grid.background_maxwellian[None, :]
    sq = grid.sqrt_maxwellian[None, :]
    pf = project(field_, basis).values
    rows = []
    vol_w = grid.cell_volume * grid.weights
    for eps in epsilons:
        absolute = DistributionField(grid, m + eps * sq * field_.values, FieldKind.ABSOLUTE)
        macro = compute_moments(absolute)
        maxw = local_maxwellian(macro, grid, mode=maxwellian_mode)
        rem = maxw.values - m - eps * sq * pf
        r = float(np.sqrt(np.einsum("nq,q->", rem * rem, vol_w)))
        rows.append((float(eps), r, r / eps**2))
    return rows
