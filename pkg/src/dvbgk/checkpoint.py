"""Flat binary checkpoints for restart and twin-run seeding.

Layout (all little-endian):
  8 bytes   magic  b"DVBGKCK1"
  int32     spatial_dims
  int32     spatial_points (per dim)
  float64   domain_length
  int32     velocity_dims
  int32     velocity_points (per dim)
  float64   velocity_cutoff
  float64   quadrature_tolerance
  int32     kind (0 = absolute, 1 = perturbation)
  payload   n_cells * n_velocity float64 values, spatial-major C order

No finiteness filtering happens on load; a corrupted state is caught by the
solver's NonFiniteState guard at step 0.
"""

import struct

import numpy as np

from .errors import CheckpointError
from .phase_grid import DistributionField, FieldKind, GridConfig, PhaseGrid, build_grid

_MAGIC = b"DVBGKCK1"
_HEADER = struct.Struct("<ii d ii d d i")


def save_checkpoint(field_: DistributionField, path):
    g = field_.grid.config
    kind = 0 if field_.kind is FieldKind.ABSOLUTE else 1
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(
            _HEADER.pack(
                g.spatial_dims, g.spatial_points, g.domain_length,
                g.velocity_dims, g.velocity_points, g.velocity_cutoff,
                g.quadrature_tolerance, kind,
            )
        )
        fh.write(np.ascontiguousarray(field_.values, dtype="<f8").tobytes())


def load_checkpoint(path, grid: PhaseGrid | None = None) -> DistributionField:
    """Read a checkpoint; if a grid is given its config must match the header."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise CheckpointError(f"{path}: truncated header")
        (sd, sp, dl, vd, vp, vc, qt, kind) = _HEADER.unpack(raw)
        config = GridConfig(
            spatial_dims=sd, spatial_points=sp, domain_length=dl,
            velocity_dims=vd, velocity_points=vp, velocity_cutoff=vc,
            quadrature_tolerance=qt,
        )
        if grid is None:
            grid = build_grid(config)
        elif grid.config != config:
            raise CheckpointError(
                f"{path}: checkpoint grid {config} does not match the scenario grid "
                f"{grid.config}"
            )
        payload = fh.read(grid.n_cells * grid.n_velocity * 8)
        values = np.frombuffer(payload, dtype="<f8")
        if values.size != grid.n_cells * grid.n_velocity:
            raise CheckpointError(f"{path}: truncated payload")
    values = values.astype(np.float64).reshape(grid.n_cells, grid.n_velocity)
    return DistributionField(
        grid, values, FieldKind.ABSOLUTE if kind == 0 else FieldKind.PERTURBATION
    )
