"""Velocity moments, local Maxwellians, collision frequency, conserved variables.

The conservative Maxwellian mode fits the Gaussian parameters per cell with a
damped Newton iteration so that the *discrete* moments reproduce the requested
(rho, U, T) to near machine precision, which is what makes the global
conservation checks meaningful beyond quadrature accuracy.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import newton_conservative, sample_maxwellian_rows
from .errors import DegenerateState, InvalidConfig, NewtonDivergence
from .phase_grid import DistributionField, FieldKind, PhaseGrid

SQRT6 = np.sqrt(6.0)


@dataclass
class MacroFields:
    """Per-cell macroscopic fields rho, U, T and the shifted energy variable.

    g = (rho |U|^2 + 3 rho T - 3 rho)/sqrt(6) completes (rho, rho U, g) as the
    conserved-variable vector; it is defined for velocity_dims == 3 only.
    """

    rho: np.ndarray
    U: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        self.rho = np.atleast_1d(np.asarray(self.rho, dtype=np.float64))
        self.T = np.atleast_1d(np.asarray(self.T, dtype=np.float64))
        self.U = np.asarray(self.U, dtype=np.float64)
        if self.U.ndim == 1:
            self.U = self.U.reshape(self.rho.shape[0], -1)

    @property
    def velocity_dims(self) -> int:
        return self.U.shape[1]

    @property
    def g(self) -> np.ndarray:
        if self.velocity_dims != 3:
            raise InvalidConfig("conserved variable g is defined for velocity_dims=3")
        usq = np.einsum("nd,nd->n", self.U, self.U)
        return (self.rho * usq + 3.0 * self.rho * self.T - 3.0 * self.rho) / SQRT6

    def as_matrix(self) -> np.ndarray:
        """(n_cells, d+2) rows [rho, U_1..U_d, T]."""
        return np.concatenate(
            [self.rho[:, None], self.U, self.T[:, None]], axis=1
        )

    def is_positive(self) -> bool:
        return bool((self.rho > 0).all() and (self.T > 0).all())


@dataclass(frozen=True)
class CollisionFrequencySpec:
    """Exponents of the density/temperature power-law frequency rho^eta T^omega.

    nu_c is the frozen rate used by the linearized operator.
    """

    eta: float = 0.0
    omega: float = 0.0
    nu_c: float = 1.0

    def __post_init__(self):
        if not self.nu_c > 0:
            raise InvalidConfig(f"nu_c must be positive, got {self.nu_c}")


def resolve_nu_c(eta: float, omega: float, mode: str = "background") -> float:
    """Background rate for the linearized operator.

    mode 'background' evaluates rho^eta T^omega at the equilibrium state
    (rho, T) = (1, 1), i.e. 1 for every exponent pair.  mode 'three_halves'
    uses (3/2)^omega instead; both are supported because the two conventions
    disagree whenever omega != 0.
    """
    if mode == "background":
        return 1.0
    if mode == "three_halves":
        return (1.5) ** omega
    raise InvalidConfig(f"unknown nu_c mode {mode!r}")


def compute_moments(field: DistributionField) -> MacroFields:
    """Discrete (rho, U, T) of an absolute field; raises on degenerate cells."""
    if field.kind is not FieldKind.ABSOLUTE:
        raise InvalidConfig("compute_moments expects an absolute field")
    g = field.grid
    d = g.velocity_dims
    F = field.values
    w = g.weights
    rho = F @ w
    bad = np.nonzero(~(rho > 0))[0]
    if bad.size:
        raise DegenerateState(
            f"non-positive density {rho[bad[0]]:.3e} in cell {bad[0]}", cell=int(bad[0])
        )
    mom = F @ (w[:, None] * g.V)
    U = mom / rho[:, None]
    e2 = F @ (w * g.V2)
    usq = np.einsum("nd,nd->n", U, U)
    T = (e2 - rho * usq) / (d * rho)
    bad = np.nonzero(~(T > 0))[0]
    if bad.size:
        raise DegenerateState(
            f"non-positive temperature {T[bad[0]]:.3e} in cell {bad[0]}", cell=int(bad[0])
        )
    return MacroFields(rho, U, T)


def local_maxwellian(
    macro: MacroFields,
    grid: PhaseGrid,
    mode: str = "sampled",
    conservative_tolerance: float = 1e-12,
    max_iter: int = 50,
) -> DistributionField:
    """Maxwellian field with the given per-cell moments.

    mode 'sampled' evaluates the closed-form Gaussian at the velocity nodes, so
    its discrete moments carry the quadrature truncation error.  mode
    'conservative' adjusts the Gaussian parameters by a damped Newton iteration
    until the discrete moments match (rho, U, T) to conservative_tolerance.
    """
    if not macro.is_positive():
        bad = int(np.argmin(np.minimum(macro.rho, macro.T)))
        raise DegenerateState("non-positive rho or T in local_maxwellian", cell=bad)
    if macro.velocity_dims != grid.velocity_dims:
        raise InvalidConfig("macro fields and grid disagree on velocity_dims")
    if mode == "sampled":
        values = sample_maxwellian_rows(macro.as_matrix(), grid.V, grid.V2)
        return DistributionField(grid, values, FieldKind.ABSOLUTE)
    if mode != "conservative":
        raise InvalidConfig(f"unknown maxwellian mode {mode!r}")
    params, values, _iters, resid, ok = newton_conservative(
        macro.as_matrix(), grid.V, grid.V2, grid.weights,
        tol=conservative_tolerance, max_iter=max_iter,
    )
    if not ok.all():
        worst = int(np.argmax(resid))
        raise NewtonDivergence(
            f"moment matching failed in cell {worst} "
            f"(scaled residual {resid[worst]:.3e} after {max_iter} iterations)",
            cell=worst, residual=float(resid[worst]),
        )
    return DistributionField(grid, values, FieldKind.ABSOLUTE)


def collision_frequency(macro: MacroFields, spec: CollisionFrequencySpec) -> np.ndarray:
    """Per-cell relaxation rate rho^eta T^omega."""
    if not macro.is_positive():
        bad = int(np.argmin(np.minimum(macro.rho, macro.T)))
        raise DegenerateState("collision frequency needs rho > 0 and T > 0", cell=bad)
    return macro.rho**spec.eta * macro.T**spec.omega


# ---------------------------------------------------------------------------
# Conserved-variable map (rho, U, T) -> (rho, rho U, g) and its Jacobian
# ---------------------------------------------------------------------------


def conserved_map(rho: float, U, T: float) -> np.ndarray:
    """Conserved vector (rho, rho U, g) for a single 3-velocity state."""
    U = np.asarray(U, dtype=np.float64)
    if U.shape != (3,):
        raise InvalidConfig("conserved_map expects a 3-component bulk velocity")
    usq = float(U @ U)
    g = (rho * usq + 3.0 * rho * T - 3.0 * rho) / SQRT6
    return np.array([rho, rho * U[0], rho * U[1], rho * U[2], g])


def conserved_jacobian(rho: float, U, T: float) -> np.ndarray:
    """Closed-form Jacobian of (rho, U, T) -> (rho, rho U, g).

    The last row is the gradient of g; all three bulk-velocity entries carry
    the factor 2 rho U_i / sqrt(6) (the finite-difference oracle in the test
    suite pins this down, see tests/test_maxwellian.py).
    """
    U = np.asarray(U, dtype=np.float64)
    usq = float(U @ U)
    J = np.zeros((5, 5))
    J[0, 0] = 1.0
    for i in range(3):
        J[1 + i, 0] = U[i]
        J[1 + i, 1 + i] = rho
        J[4, 1 + i] = 2.0 * rho * U[i] / SQRT6
    J[4, 0] = (usq + 3.0 * T - 3.0) / SQRT6
    J[4, 4] = 3.0 * rho / SQRT6
    return J


def jacobian_fd_check(rho: float, U, T: float, rel_step: float = 1e-6):
    """Central finite-difference Jacobian and its deviation from the closed form.

    Returns (J_fd, max_dev) with max_dev the largest entrywise deviation scaled
    by max(1, |closed-form entry|).
    """
    U = np.asarray(U, dtype=np.float64)
    state = np.array([rho, U[0], U[1], U[2], T])
    J_fd = np.empty((5, 5))
    for j in range(5):
        h = rel_step * max(1.0, abs(state[j]))
        sp = state.copy()
        sm = state.copy()
        sp[j] += h
        sm[j] -= h
        fp = conserved_map(sp[0], sp[1:4], sp[4])
        fm = conserved_map(sm[0], sm[1:4], sm[4])
        J_fd[:, j] = (fp - fm) / (2.0 * h)
    J_cf = conserved_jacobian(rho, U, T)
    dev = np.abs(J_fd - J_cf) / np.maximum(1.0, np.abs(J_cf))
    return J_fd, float(dev.max())
