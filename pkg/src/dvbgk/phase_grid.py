"""Discrete phase space: periodic spatial grid x truncated uniform velocity grid.

Storage convention for all distribution fields is spatial-major: an array of
shape (n_cells, n_velocity) whose rows are contiguous velocity blocks, one per
spatial cell.  Velocity nodes are midpoint-centered (no node at v=0), so the
quadrature weights are the uniform midpoint weights dv^d and odd moments of
symmetric functions cancel pairwise.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .errors import CutoffTooSmall, InvalidConfig


@dataclass(frozen=True)
class GridConfig:
    spatial_dims: int = 1
    spatial_points: int = 64
    domain_length: float = 1.0
    velocity_dims: int = 3
    velocity_points: int = 16
    velocity_cutoff: float = 6.0
    quadrature_tolerance: float = 1e-8


class PhaseGrid:
    """Immutable discretization of the torus x truncated velocity box.

    Attributes of note:
      dx, dv              uniform spacings
      spatial_shape       tuple of points per spatial dim
      n_cells, n_velocity flattened sizes
      V                   (n_velocity, velocity_dims) node coordinates
      V2                  |v|^2 per node
      weights             midpoint quadrature weights (all equal to dv^d)
      background_maxwellian  global equilibrium sampled on the nodes
    """

    def __init__(self, config: GridConfig):
        problems = []
        if config.spatial_dims not in (1, 2, 3):
            problems.append(f"spatial_dims must be 1, 2 or 3, got {config.spatial_dims}")
        if config.velocity_dims not in (1, 3):
            problems.append(f"velocity_dims must be 1 or 3, got {config.velocity_dims}")
        if config.spatial_points < 8:
            problems.append(f"spatial_points must be >= 8, got {config.spatial_points}")
        if config.velocity_points < 8:
            problems.append(f"velocity_points must be >= 8, got {config.velocity_points}")
        if not config.domain_length > 0:
            problems.append(f"domain_length must be positive, got {config.domain_length}")
        if not config.velocity_cutoff > 0:
            problems.append(f"velocity_cutoff must be positive, got {config.velocity_cutoff}")
        if not problems and config.spatial_dims > config.velocity_dims:
            problems.append(
                "spatial_dims cannot exceed velocity_dims "
                f"({config.spatial_dims} > {config.velocity_dims})"
            )
        if problems:
            raise InvalidConfig("; ".join(problems))

        self.config = config
        self.spatial_dims = config.spatial_dims
        self.velocity_dims = config.velocity_dims
        self.domain_length = float(config.domain_length)
        self.velocity_cutoff = float(config.velocity_cutoff)
        self.quadrature_tolerance = float(config.quadrature_tolerance)

        self.spatial_shape = (config.spatial_points,) * config.spatial_dims
        self.n_cells = int(np.prod(self.spatial_shape))
        self.dx = self.domain_length / config.spatial_points
        self.x_axis = np.arange(config.spatial_points) * self.dx

        nv = config.velocity_points
        self.dv = 2.0 * self.velocity_cutoff / nv
        self.v_axis = -self.velocity_cutoff + (np.arange(nv) + 0.5) * self.dv
        self.velocity_shape = (nv,) * config.velocity_dims
        self.n_velocity = nv**config.velocity_dims

        axes = np.meshgrid(*([self.v_axis] * config.velocity_dims), indexing="ij")
        self.V = np.stack([a.reshape(-1) for a in axes], axis=1)
        self.V2 = np.einsum("qd,qd->q", self.V, self.V)
        self.weights = np.full(self.n_velocity, self.dv**config.velocity_dims)
        self.cell_volume = self.dx**config.spatial_dims

        d = config.velocity_dims
        self.background_maxwellian = np.exp(-0.5 * self.V2) / (2.0 * np.pi) ** (0.5 * d)
        self.sqrt_maxwellian = np.sqrt(self.background_maxwellian)
        self.background_mass = float(self.weights @ self.background_maxwellian)

        defect = abs(self.background_mass - 1.0)
        if defect > self.quadrature_tolerance:
            raise CutoffTooSmall(
                f"discrete equilibrium mass {self.background_mass:.12g} deviates from 1 "
                f"by {defect:.3e} (> quadrature_tolerance {self.quadrature_tolerance:g}); "
                "increase velocity_cutoff or velocity_points"
            )

        for arr in (self.x_axis, self.v_axis, self.V, self.V2, self.weights,
                    self.background_maxwellian, self.sqrt_maxwellian):
            arr.flags.writeable = False

    @property
    def weight_sum(self):
        return float(np.sum(self.weights))

    def same_as(self, other) -> bool:
        return self is other or (
            isinstance(other, PhaseGrid) and self.config == other.config
        )

    def __repr__(self):
        return (
            f"PhaseGrid({self.spatial_dims}D x {self.velocity_dims}V, "
            f"{self.config.spatial_points}^{self.spatial_dims} cells, "
            f"{self.config.velocity_points}^{self.velocity_dims} nodes, "
            f"v_max={self.velocity_cutoff:g})"
        )


class FieldKind(Enum):
    ABSOLUTE = "absolute"
    PERTURBATION = "perturbation"


@dataclass
class DistributionField:
    """Distribution values on the phase grid, shape (n_cells, n_velocity).

    kind ABSOLUTE stores the distribution F itself; kind PERTURBATION stores
    f = (F - m) / sqrt(m) relative to the global equilibrium m.
    """

    grid: PhaseGrid
    values: np.ndarray
    kind: FieldKind = FieldKind.ABSOLUTE

    def __post_init__(self):
        expected = (self.grid.n_cells, self.grid.n_velocity)
        if self.values.shape != expected:
            raise InvalidConfig(
                f"field shape {self.values.shape} does not match grid {expected}"
            )
        if self.values.dtype != np.float64:
            self.values = self.values.astype(np.float64)

    def copy(self) -> "DistributionField":
        return DistributionField(self.grid, self.values.copy(), self.kind)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


def build_grid(config: GridConfig) -> PhaseGrid:
    """Build and validate a phase grid; the equilibrium mass check runs here."""
    return PhaseGrid(config)


def equilibrium_field(grid: PhaseGrid) -> DistributionField:
    """Global equilibrium sampled on every cell (kind ABSOLUTE)."""
    values = np.tile(grid.background_maxwellian, (grid.n_cells, 1))
    return DistributionField(grid, values, FieldKind.ABSOLUTE)


def zero_perturbation(grid: PhaseGrid) -> DistributionField:
    return DistributionField(
        grid, np.zeros((grid.n_cells, grid.n_velocity)), FieldKind.PERTURBATION
    )


def convert(field_: DistributionField, target_kind: FieldKind) -> DistributionField:
    """Map between F and f = (F - m)/sqrt(m); round trip is exact to roundoff."""
    if field_.kind == target_kind:
        return field_.copy()
    g = field_.grid
    m = g.background_maxwellian[None, :]
    sq = g.sqrt_maxwellian[None, :]
    if target_kind == FieldKind.ABSOLUTE:
        values = m + sq * field_.values
    else:
        values = (field_.values - m) / sq
    return DistributionField(g, values, target_kind)


def truncated_gaussian_mass_1d(cutoff: float) -> float:
    """Analytic mass of the unit Gaussian restricted to [-cutoff, cutoff]."""
    return math.erf(cutoff / math.sqrt(2.0))
