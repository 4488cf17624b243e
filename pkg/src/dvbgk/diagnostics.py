"""Measured quantities: conservation totals, entropy, norms, bounds, decay fits.

Everything here is a pure function of a field snapshot (plus a small running
context for drift references and the time-integrated energy), so records can
be recomputed offline from checkpoints.  CSV output uses 17 significant digits
and a fixed column order; byte-identical configs produce byte-identical files.
"""

import itertools
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np
import scipy.fft as sfft

from .errors import (
    GridMismatch,
    InvalidConfig,
    NegativeDensityValue,
    NonPositiveValue,
    OrderTooHighForGrid,
    ZeroField,
)
from .linearized import ProjectionBasis, apply_L, micro_macro_split, project
from .maxwellian import MacroFields, compute_moments
from .phase_grid import DistributionField, FieldKind, PhaseGrid

NEGATIVE_FLOOR = -1e-14


# ---------------------------------------------------------------------------
# Inner products and norms on phase space
# ---------------------------------------------------------------------------


def phase_inner(f: DistributionField, g: DistributionField) -> float:
    if not f.grid.same_as(g.grid):
        raise GridMismatch("inner product of fields on different grids")
    w = f.grid.cell_volume * f.grid.weights
    return float(np.einsum("nq,q,nq->", f.values, w, g.values))


def phase_l2(f: DistributionField) -> float:
    w = f.grid.cell_volume * f.grid.weights
    return float(np.sqrt(np.einsum("nq,q->", f.values * f.values, w)))


def twin_distance(f: DistributionField, f_bar: DistributionField) -> float:
    """Phase-space L2 distance between two same-grid fields."""
    if not f.grid.same_as(f_bar.grid):
        raise GridMismatch("twin fields live on different grids")
    diff = DistributionField(f.grid, f.values - f_bar.values, f.kind)
    return phase_l2(diff)


# ---------------------------------------------------------------------------
# Conservation totals
# ---------------------------------------------------------------------------


@dataclass
class Totals:
    mass: float
    momentum: np.ndarray  # always length 3, unused components zero
    energy: float


def conservation_totals(field_: DistributionField) -> Totals:
    """Phase-space quadrature of the collision invariants.

    Absolute fields integrate F (1, v, |v|^2); perturbation fields integrate
    f sqrt(m) (1, v, |v|^2), the quantities that the linearized dynamics
    conserves exactly.
    """
    g = field_.grid
    vals = field_.values
    if field_.kind is FieldKind.PERTURBATION:
        vals = vals * g.sqrt_maxwellian[None, :]
    w = g.cell_volume * g.weights
    mass = float(np.einsum("nq,q->", vals, w))
    momentum = np.zeros(3)
    momentum[: g.velocity_dims] = vals.sum(axis=0) @ (w[:, None] * g.V)
    energy = float(vals.sum(axis=0) @ (w * g.V2))
    return Totals(mass=mass, momentum=momentum, energy=energy)


def drifts(now: Totals, ref: Totals, kind: FieldKind) -> np.ndarray:
    """Relative drifts of (mass, momentum, energy) against the t=0 totals.

    Components whose reference is (numerically) zero are scaled by the initial
    mass for absolute fields and reported as absolute deviations for
    perturbations, whose conserved integrals are all zero by construction.
    """
    base = abs(ref.mass) if kind is FieldKind.ABSOLUTE else 1.0
    if base == 0.0:
        base = 1.0
    out = np.empty(5)
    for i, (a, b) in enumerate(
        [(now.mass, ref.mass)]
        + list(zip(now.momentum, ref.momentum))
        + [(now.energy, ref.energy)]
    ):
        denom = abs(b) if abs(b) > 1e-8 * base else base
        out[i] = (a - b) / denom
    return out


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------


def h_functional(field_: DistributionField) -> float:
    """Discrete integral of F log F with the convention 0 log 0 = 0.

    Values in (NEGATIVE_FLOOR, 0) are clipped as transport roundoff; anything
    below the floor raises NegativeDensityValue.
    """
    if field_.kind is not FieldKind.ABSOLUTE:
        raise InvalidConfig("h_functional expects an absolute field")
    vals = field_.values
    worst = float(vals.min())
    if worst < NEGATIVE_FLOOR:
        raise NegativeDensityValue(f"distribution value {worst:.3e} below {NEGATIVE_FLOOR:g}")
    g = field_.grid
    w = g.cell_volume * g.weights
    pos = np.maximum(vals, 0.0)
    flogf = np.where(pos > 0.0, pos * np.log(np.where(pos > 0.0, pos, 1.0)), 0.0)
    return float(np.einsum("nq,q->", flogf, w))


# ---------------------------------------------------------------------------
# Energy norm (sum of L2 norms of mixed derivatives)
# ---------------------------------------------------------------------------


def _multi_indices(dims: int, max_order: int):
    out = [
        idx
        for idx in itertools.product(range(max_order + 1), repeat=dims)
        if sum(idx) <= max_order
    ]
    out.sort(key=lambda idx: (sum(idx), idx))
    return out


def _diff_1d(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second-order first derivative, centered inside, one-sided at the edges."""
    b = np.moveaxis(arr, axis, -1)
    out = np.empty_like(b)
    out[..., 1:-1] = (b[..., 2:] - b[..., :-2]) / (2.0 * h)
    out[..., 0] = (-3.0 * b[..., 0] + 4.0 * b[..., 1] - b[..., 2]) / (2.0 * h)
    out[..., -1] = (3.0 * b[..., -1] - 4.0 * b[..., -2] + b[..., -3]) / (2.0 * h)
    return np.moveaxis(out, -1, axis)


def velocity_derivative(values: np.ndarray, grid: PhaseGrid, beta) -> np.ndarray:
    arr = values.reshape(values.shape[0], *grid.velocity_shape)
    for j, order in enumerate(beta):
        for _ in range(order):
            arr = _diff_1d(arr, 1 + j, grid.dv)
    return arr.reshape(values.shape)


def _spectral_multiplier(n: int, length: float, order: int) -> np.ndarray:
    k = 2.0 * np.pi * sfft.rfftfreq(n, length / n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[-1] = 0.0  # odd derivative of the Nyquist mode vanishes at nodes
    return mult


def spatial_derivative(values: np.ndarray, grid: PhaseGrid, alpha) -> np.ndarray:
    """Mixed spatial derivative by Fourier differentiation on the torus."""
    n = grid.config.spatial_points
    arr = values.reshape(*grid.spatial_shape, grid.n_velocity)
    for a, order in enumerate(alpha):
        if order == 0:
            continue
        moved = np.ascontiguousarray(np.moveaxis(arr, a, -1))
        ft = sfft.rfft(moved, axis=-1)
        ft *= _spectral_multiplier(n, grid.domain_length, order)
        moved = sfft.irfft(ft, n=n, axis=-1)
        arr = np.moveaxis(moved, -1, a)
    return np.ascontiguousarray(arr).reshape(values.shape)


def _parseval_spatial_norms_1d(values, grid, orders):
    """||d_x^a g||^2 for each a via the Fourier side, one transform total."""
    n = grid.config.spatial_points
    ft = sfft.rfft(np.ascontiguousarray(values.T), axis=-1)  # (Nq, K)
    power = ft.real**2 + ft.imag**2
    mult = np.ones(ft.shape[-1])
    mult[1:] = 2.0
    if n % 2 == 0:
        mult[-1] = 1.0
    k = 2.0 * np.pi * sfft.rfftfreq(n, grid.dx)
    w = grid.cell_volume * grid.weights
    out = []
    base = (w @ power) / n  # (K,) weighted over velocity
    for a in orders:
        factor = mult * k ** (2 * a)
        if a % 2 == 1 and n % 2 == 0:
            factor[-1] = 0.0
        out.append(float(base @ factor))
    return out


def energy_norm(
    field_: DistributionField,
    max_spatial_order: int = 2,
    max_velocity_order: int = 1,
) -> float:
    """Sum of L2 norms of the mixed derivatives d_x^alpha d_v^beta f.

    Spatial derivatives are spectral (periodic); velocity derivatives are
    second-order finite differences, one-sided at the grid edges.  All index
    pairs with |alpha| <= max_spatial_order and |beta| <= max_velocity_order
    are included.  Time-derivative slots are not part of the discrete norm.
    """
    g = field_.grid
    nv = g.config.velocity_points
    if max_spatial_order < 0 or max_velocity_order < 0:
        raise InvalidConfig("derivative orders must be nonnegative")
    if max_velocity_order > nv - 3:
        raise OrderTooHighForGrid(
            f"velocity order {max_velocity_order} needs more than {nv} nodes per axis"
        )
    if max_spatial_order >= g.config.spatial_points // 2:
        raise OrderTooHighForGrid(
            f"spatial order {max_spatial_order} exceeds resolvable modes"
        )
    spatial_idx = _multi_indices(g.spatial_dims, max_spatial_order)
    velocity_idx = _multi_indices(g.velocity_dims, max_velocity_order)
    total = 0.0
    w = g.cell_volume * g.weights
    for beta in velocity_idx:
        vb = velocity_derivative(field_.values, g, beta)
        if g.spatial_dims == 1:
            orders = [a[0] for a in spatial_idx]
            for n2 in _parseval_spatial_norms_1d(vb, g, orders):
                total += np.sqrt(max(n2, 0.0))
        else:
            for alpha in spatial_idx:
                d = spatial_derivative(vb, g, alpha)
                total += float(np.sqrt(np.einsum("nq,q->", d * d, w)))
    return float(total)


# ---------------------------------------------------------------------------
# Macroscopic field bounds
# ---------------------------------------------------------------------------


@dataclass
class FieldBoundReport:
    rho_low_margin: float
    rho_high_margin: float
    speed_margin: float
    temp_low_margin: float
    temp_high_margin: float
    grad_rho_margin: float
    du_ratio: float
    dtemp_ratio: float
    ok: bool


def _max_spatial_gradient(cellwise: np.ndarray, grid: PhaseGrid) -> float:
    """max over cells and axes of |d q / d x_a| for a per-cell scalar q."""
    arr = cellwise.reshape(grid.spatial_shape)
    n = grid.config.spatial_points
    worst = 0.0
    for a in range(grid.spatial_dims):
        moved = np.ascontiguousarray(np.moveaxis(arr, a, -1))
        ft = sfft.rfft(moved, axis=-1)
        ft *= _spectral_multiplier(n, grid.domain_length, 1)
        deriv = sfft.irfft(ft, n=n, axis=-1)
        worst = max(worst, float(np.abs(deriv).max()))
    return worst


def field_bound_check(macro: MacroFields, e_now: float, grid: PhaseGrid) -> FieldBoundReport:
    """Margins of the macroscopic-field bounds at energy level E = e_now.

    Constant-free bounds (the ones that gate `ok`):
        1 - sqrt(E) <= rho <= 1 + sqrt(E),  |U| <= 3 sqrt(E),  1/2 <= T <= 3/2.
    The gradient bound sqrt(E) - max|grad rho| is reported as a margin, and the
    gradient sizes of U and T are reported as measured ratios against E (their
    bounds carry unspecified constants).  Report-only: nothing raises.

    Margins are reported raw; the `ok` verdict tolerates the quadrature bias
    of the discrete equilibrium (its density sits ~1e-9 below 1 on the default
    grid, which would otherwise fail the E = 0 boundary case).
    """
    if e_now < 0:
        raise InvalidConfig("field_bound_check needs E >= 0")
    root = np.sqrt(e_now)
    speed = np.sqrt(np.einsum("nd,nd->n", macro.U, macro.U))
    rep = FieldBoundReport(
        rho_low_margin=float(macro.rho.min() - (1.0 - root)),
        rho_high_margin=float((1.0 + root) - macro.rho.max()),
        speed_margin=float(3.0 * root - speed.max()),
        temp_low_margin=float(macro.T.min() - 0.5),
        temp_high_margin=float(1.5 - macro.T.max()),
        grad_rho_margin=float(root - _max_spatial_gradient(macro.rho, grid)),
        du_ratio=np.nan,
        dtemp_ratio=np.nan,
        ok=False,
    )
    if e_now > 0:
        du = max(_max_spatial_gradient(macro.U[:, a], grid) for a in range(macro.velocity_dims))
        dT = _max_spatial_gradient(macro.T, grid)
        rep.du_ratio = du / e_now
        rep.dtemp_ratio = dT / e_now
    slack = 10.0 * grid.quadrature_tolerance
    rep.ok = bool(
        rep.rho_low_margin >= -slack
        and rep.rho_high_margin >= -slack
        and rep.speed_margin >= -slack
        and rep.temp_low_margin >= -slack
        and rep.temp_high_margin >= -slack
    )
    return rep


# ---------------------------------------------------------------------------
# Decay fitting and coercivity
# ---------------------------------------------------------------------------


def fit_decay_rate(t, values, window=None):
    """Least-squares slope of log(values) over t in the window.

    Returns (rate, r_squared) with rate = -slope.  Requires at least 10
    strictly positive samples inside the window.
    """
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1])
        t, values = t[mask], values[mask]
    if t.size < 10:
        raise InvalidConfig(f"decay fit needs >= 10 samples in the window, got {t.size}")
    if not (values > 0).all():
        raise NonPositiveValue("decay fit needs strictly positive values")
    y = np.log(values)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(-slope), float(r2)


def coercivity_measure(f_series, basis: ProjectionBasis, nu_c: float):
    """delta(t) = -<L f, f> / ||f||^2 for each sampled perturbation."""
    out = []
    for t, f in f_series:
        n2 = phase_l2(f) ** 2
        if n2 <= 0.0:
            raise ZeroField(f"zero perturbation at t={t}")
        lf = apply_L(f, basis, nu_c)
        out.append((float(t), float(-phase_inner(lf, f) / n2)))
    return out


# ---------------------------------------------------------------------------
# Per-sample records and CSV
# ---------------------------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    t: float
    step: int
    mass: float
    momentum_x: float
    momentum_y: float
    momentum_z: float
    energy: float
    mass_drift: float
    momentum_x_drift: float
    momentum_y_drift: float
    momentum_z_drift: float
    energy_drift: float
    h: float
    l2_f: float
    energy_norm: float
    e_accum: float
    min_f: float
    rho_low_margin: float
    rho_high_margin: float
    speed_margin: float
    temp_low_margin: float
    temp_high_margin: float
    grad_rho_margin: float
    du_ratio: float
    dtemp_ratio: float
    field_bounds_ok: bool | None
    hydro_norm: float
    micro_norm: float
    coercivity_delta: float
    twin_distance: float | None


CSV_COLUMNS = [f.name for f in dataclass_fields(DiagnosticsRecord)]


def _format_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def record_to_row(rec: DiagnosticsRecord) -> str:
    return ",".join(_format_value(getattr(rec, name)) for name in CSV_COLUMNS)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def read_csv(path):
    """Read a diagnostics CSV back into a dict of float arrays ('' -> nan)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    out = {}
    for j, name in enumerate(header):
        out[name] = np.array(
            [float(r[j]) if r[j] != "" else np.nan for r in rows], dtype=np.float64
        )
    return out


class DiagnosticsContext:
    """Carries the t=0 references and the running energy integral of one run."""

    def __init__(
        self,
        grid: PhaseGrid,
        basis: ProjectionBasis,
        mode: str = "nonlinear",
        nu_c: float = 1.0,
        energy_orders=(2, 1),
        compute_energy_norm: bool = True,
    ):
        self.grid = grid
        self.basis = basis
        self.mode = mode
        self.nu_c = nu_c
        self.energy_orders = tuple(energy_orders)
        self.compute_energy_norm = compute_energy_norm
        self._ref = None
        self._integral = 0.0
        self._prev_t = None
        self._prev_q = None

    def _perturbation(self, field_: DistributionField) -> DistributionField:
        if field_.kind is FieldKind.PERTURBATION:
            return field_
        g = self.grid
        vals = (field_.values - g.background_maxwellian[None, :]) / g.sqrt_maxwellian[None, :]
        return DistributionField(g, vals, FieldKind.PERTURBATION)

    def make_record(self, t, step, field_: DistributionField, twin_field=None):
        g = self.grid
        totals = conservation_totals(field_)
        if self._ref is None:
            self._ref = totals
        dr = drifts(totals, self._ref, field_.kind)

        pert = self._perturbation(field_)
        l2f = phase_l2(pert)
        pf = project(pert, self.basis)
        n2 = l2f**2
        if n2 > 0.0:
            lf = apply_L(pert, self.basis, self.nu_c)
            delta = -phase_inner(lf, pert) / n2
        else:
            delta = np.nan
        split = micro_macro_split(pert, g)
        hydro_n = phase_l2(split.hydro)
        micro_n = phase_l2(split.micro)

        if self.compute_energy_norm:
            enorm = energy_norm(pert, *self.energy_orders)
        else:
            enorm = np.nan
        q = enorm**2 if np.isfinite(enorm) else 0.0
        if self._prev_t is not None:
            self._integral += 0.5 * (self._prev_q + q) * (t - self._prev_t)
        self._prev_t, self._prev_q = t, q
        e_accum = 0.5 * q + self.nu_c * self._integral

        if field_.kind is FieldKind.ABSOLUTE:
            h = h_functional(field_)
            macro = compute_moments(field_)
            rep = field_bound_check(macro, e_accum, g)
            bounds = rep
        else:
            h = np.nan
            bounds = None

        tw = None
        if twin_field is not None:
            tw = twin_distance(self._perturbation(twin_field), pert)

        return DiagnosticsRecord(
            t=float(t),
            step=int(step),
            mass=totals.mass,
            momentum_x=float(totals.momentum[0]),
            momentum_y=float(totals.momentum[1]),
            momentum_z=float(totals.momentum[2]),
            energy=totals.energy,
            mass_drift=float(dr[0]),
            momentum_x_drift=float(dr[1]),
            momentum_y_drift=float(dr[2]),
            momentum_z_drift=float(dr[3]),
            energy_drift=float(dr[4]),
            h=float(h),
            l2_f=float(l2f),
            energy_norm=float(enorm),
            e_accum=float(e_accum),
            min_f=float(field_.values.min()),
            rho_low_margin=bounds.rho_low_margin if bounds else np.nan,
            rho_high_margin=bounds.rho_high_margin if bounds else np.nan,
            speed_margin=bounds.speed_margin if bounds else np.nan,
            temp_low_margin=bounds.temp_low_margin if bounds else np.nan,
            temp_high_margin=bounds.temp_high_margin if bounds else np.nan,
            grad_rho_margin=bounds.grad_rho_margin if bounds else np.nan,
            du_ratio=bounds.du_ratio if bounds else np.nan,
            dtemp_ratio=bounds.dtemp_ratio if bounds else np.nan,
            field_bounds_ok=bounds.ok if bounds else None,
            hydro_norm=float(hydro_n),
            micro_norm=float(micro_n),
            coercivity_delta=float(delta),
            twin_distance=tw,
        )
