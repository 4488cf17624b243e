"""Discrete-velocity BGK relaxation solver with a physics verification harness."""

from .backend import BACKEND
from .phase_grid import (
    DistributionField,
    FieldKind,
    GridConfig,
    PhaseGrid,
    build_grid,
    convert,
    equilibrium_field,
    zero_perturbation,
)
from .maxwellian import (
    CollisionFrequencySpec,
    MacroFields,
    collision_frequency,
    compute_moments,
    conserved_jacobian,
    conserved_map,
    jacobian_fd_check,
    local_maxwellian,
    resolve_nu_c,
)
from .linearized import (
    MicroMacroSplit,
    ProjectionBasis,
    apply_L,
    build_basis,
    linearization_remainder,
    micro_macro_split,
    project,
)
from .solver import (
    RunResult,
    SolverConfig,
    linearized_step,
    relaxation_step,
    run,
    transport_step,
)
from .checkpoint import load_checkpoint, save_checkpoint
from . import diagnostics, errors

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CollisionFrequencySpec",
    "DistributionField",
    "FieldKind",
    "GridConfig",
    "MacroFields",
    "MicroMacroSplit",
    "PhaseGrid",
    "ProjectionBasis",
    "RunResult",
    "SolverConfig",
    "apply_L",
    "build_basis",
    "build_grid",
    "collision_frequency",
    "compute_moments",
    "conserved_jacobian",
    "conserved_map",
    "convert",
    "diagnostics",
    "equilibrium_field",
    "errors",
    "jacobian_fd_check",
    "linearization_remainder",
    "linearized_step",
    "load_checkpoint",
    "local_maxwellian",
    "micro_macro_split",
    "project",
    "relaxation_step",
    "resolve_nu_c",
    "run",
    "save_checkpoint",
    "transport_step",
    "zero_perturbation",
    "__version__",
]
