"""Scenario runner: config parsing, initial data, dispatch, CSV/checkpoint output.

Config files are INI-style key/value documents.  Top-level keys (no section
header needed) name the scenario; [grid], [solver], [frequency], [initial] and
[twin] sections hold the physics.  Every default is filled in and echoed back
to <output_dir>/resolved_config, which re-parses to the identical scenario.

Exit status: 0 = run finished and all hard invariants held; 1 = run finished
but an invariant (conservation / positivity / entropy or norm monotonicity)
was violated; 2 = the run aborted with an error.  summary.json always records
the verdicts or the failure in machine-readable form.
"""

import argparse
import configparser
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics
from .backend import BACKEND
from .checkpoint import load_checkpoint, save_checkpoint
from .errors import DvbgkError, NonFiniteState, ParseError, PositivityViolation, ValidationError
from .linearized import build_basis
from .maxwellian import CollisionFrequencySpec, resolve_nu_c
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
from ._kernels import sample_maxwellian_rows
from .solver import SolverConfig, run

logger = logging.getLogger(__name__)

INITIAL_FAMILIES = (
    "equilibrium",
    "density_wave",
    "temperature_wave",
    "microscopic_mode",
    "from_checkpoint",
)
POSITIVITY_MARGIN = 0.1


@dataclass(frozen=True)
class InitialSpec:
    family: str = "equilibrium"
    amplitude: float = 0.0
    wavenumber: int = 1
    path: str = ""


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: GridConfig
    solver: SolverConfig
    eta: float
    omega: float
    nu_c_mode: str
    initial: InitialSpec
    twin: InitialSpec | None
    sample_interval: float
    output_dir: str

    @property
    def nu_c(self) -> float:
        return resolve_nu_c(self.eta, self.omega, self.nu_c_mode)

    def frequency_spec(self) -> CollisionFrequencySpec:
        return CollisionFrequencySpec(eta=self.eta, omega=self.omega, nu_c=self.nu_c)


_SCHEMA = {
    "scenario": {
        "name": str,
        "initial": str,
        "sample_interval": float,
        "output_dir": str,
    },
    "grid": {
        "spatial_dims": int,
        "spatial_points": int,
        "domain_length": float,
        "velocity_dims": int,
        "velocity_points": int,
        "velocity_cutoff": float,
        "quadrature_tolerance": float,
    },
    "solver": {
        "dt": float,
        "t_end": float,
        "mode": str,
        "transport": str,
        "maxwellian_mode": str,
        "relaxation": str,
        "splitting": str,
        "cfl_guard": float,
        "conservative_tolerance": float,
        "workers": int,
    },
    "frequency": {"eta": float, "omega": float, "nu_c_mode": str},
    "initial": {"family": str, "amplitude": float, "wavenumber": int, "path": str},
    "twin": {"family": str, "amplitude": float, "wavenumber": int, "path": str},
}


def _read_sections(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    # top-level keys live in an implicit [scenario] section; only inject the
    # header when the file does not open with one of its own
    stripped = "\n".join(
        ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith(("#", ";"))
    )
    if not stripped.lstrip().startswith("["):
        text = "[scenario]\n" + text
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc

    out = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ParseError(f"{path}: unknown section [{section}]")
        schema = _SCHEMA[section]
        values = {}
        for key, raw in parser.items(section):
            if key not in schema:
                raise ParseError(f"{path}: unknown key '{key}' in [{section}]")
            typ = schema[key]
            try:
                values[key] = typ(raw) if typ is not str else raw.strip()
            except ValueError as exc:
                raise ParseError(
                    f"{path}: key '{key}' in [{section}]: cannot parse {raw!r} as {typ.__name__}"
                ) from exc
        out[section] = values
    return out


def _initial_from_sections(sections, section_name, shorthand=None) -> InitialSpec | None:
    data = sections.get(section_name)
    if data is None and shorthand is None:
        return None
    data = dict(data or {})
    if shorthand is not None and "family" not in data:
        data["family"] = shorthand
    return InitialSpec(
        family=data.get("family", "equilibrium"),
        amplitude=data.get("amplitude", 0.0),
        wavenumber=data.get("wavenumber", 1),
        path=data.get("path", ""),
    )


def _validate_initial(tag: str, ispec: InitialSpec, grid_points: int, viol: list):
    if ispec.family not in INITIAL_FAMILIES:
        viol.append(f"{tag}: unknown family {ispec.family!r} (allowed: {INITIAL_FAMILIES})")
        return
    if ispec.family in ("density_wave", "temperature_wave"):
        floor = 1.0 - abs(ispec.amplitude)
        label = "rho" if ispec.family == "density_wave" else "T"
        if not floor > POSITIVITY_MARGIN:
            viol.append(
                f"{tag}: amplitude {ispec.amplitude} drives min {label} to {floor:.3g}, "
                f"at or below the positivity margin {POSITIVITY_MARGIN}"
            )
        if ispec.wavenumber < 1:
            viol.append(f"{tag}: wavenumber must be >= 1, got {ispec.wavenumber}")
        elif ispec.wavenumber >= grid_points // 2:
            viol.append(
                f"{tag}: wavenumber {ispec.wavenumber} is not resolvable on "
                f"{grid_points} spatial points"
            )
    if ispec.family == "from_checkpoint" and not ispec.path:
        viol.append(f"{tag}: from_checkpoint needs a path")


def parse_config(path) -> Scenario:
    """Parse and validate a scenario file; every violation is reported at once."""
    sections = _read_sections(path)
    root = sections.get("scenario", {})
    gsec = sections.get("grid", {})
    ssec = sections.get("solver", {})
    fsec = sections.get("frequency", {})

    name = root.get("name", Path(path).stem)
    sample_interval = root.get("sample_interval", 0.1)
    output_dir = root.get("output_dir", f"{name}_out")

    grid_kwargs = dict(
        spatial_dims=gsec.get("spatial_dims", 1),
        spatial_points=gsec.get("spatial_points", 64),
        domain_length=gsec.get("domain_length", 1.0),
        velocity_dims=gsec.get("velocity_dims", 3),
        velocity_points=gsec.get("velocity_points", 16),
        velocity_cutoff=gsec.get("velocity_cutoff", 6.0),
        quadrature_tolerance=gsec.get("quadrature_tolerance", 1e-8),
    )
    solver_kwargs = dict(
        dt=ssec.get("dt", 0.01),
        t_end=ssec.get("t_end", 1.0),
        mode=ssec.get("mode", "nonlinear"),
        transport=ssec.get("transport", "spectral_shift"),
        maxwellian_mode=ssec.get("maxwellian_mode", "conservative"),
        relaxation=ssec.get("relaxation", "exponential"),
        splitting=ssec.get("splitting", "strang"),
        cfl_guard=ssec.get("cfl_guard", 2.0),
        conservative_tolerance=ssec.get("conservative_tolerance", 1e-12),
        workers=ssec.get("workers", 1),
    )
    eta = fsec.get("eta", 0.0)
    omega = fsec.get("omega", 0.0)
    nu_c_mode = fsec.get("nu_c_mode", "background")

    initial = _initial_from_sections(sections, "initial", shorthand=root.get("initial"))
    if initial is None:
        initial = InitialSpec()
    twin = _initial_from_sections(sections, "twin")

    viol = []
    if grid_kwargs["spatial_dims"] not in (1, 2, 3):
        viol.append(f"grid: spatial_dims must be 1, 2 or 3, got {grid_kwargs['spatial_dims']}")
    if grid_kwargs["velocity_dims"] not in (1, 3):
        viol.append(f"grid: velocity_dims must be 1 or 3, got {grid_kwargs['velocity_dims']}")
    if grid_kwargs["spatial_points"] < 8:
        viol.append(f"grid: spatial_points must be >= 8, got {grid_kwargs['spatial_points']}")
    if grid_kwargs["velocity_points"] < 8:
        viol.append(f"grid: velocity_points must be >= 8, got {grid_kwargs['velocity_points']}")
    for key in ("domain_length", "velocity_cutoff", "quadrature_tolerance"):
        if not grid_kwargs[key] > 0:
            viol.append(f"grid: {key} must be positive, got {grid_kwargs[key]}")
    if (
        grid_kwargs["spatial_dims"] in (1, 2, 3)
        and grid_kwargs["velocity_dims"] in (1, 3)
        and grid_kwargs["spatial_dims"] > grid_kwargs["velocity_dims"]
    ):
        viol.append("grid: spatial_dims cannot exceed velocity_dims")

    if not solver_kwargs["dt"] > 0:
        viol.append(f"solver: dt must be positive, got {solver_kwargs['dt']}")
    if solver_kwargs["t_end"] < 0:
        viol.append(f"solver: t_end must be >= 0, got {solver_kwargs['t_end']}")
    elif solver_kwargs["t_end"] > 0 and solver_kwargs["dt"] > solver_kwargs["t_end"]:
        viol.append("solver: dt exceeds t_end")
    for key, allowed in (
        ("mode", ("nonlinear", "linearized")),
        ("transport", ("spectral_shift", "semi_lagrangian_spline")),
        ("maxwellian_mode", ("sampled", "conservative")),
        ("relaxation", ("exponential", "semi_implicit")),
        ("splitting", ("strang", "lie")),
    ):
        if solver_kwargs[key] not in allowed:
            viol.append(f"solver: {key} must be one of {allowed}, got {solver_kwargs[key]!r}")
    if solver_kwargs["workers"] < 1:
        viol.append(f"solver: workers must be >= 1, got {solver_kwargs['workers']}")
    if not sample_interval > 0:
        viol.append(f"sample_interval must be positive, got {sample_interval}")
    if nu_c_mode not in ("background", "three_halves"):
        viol.append(f"frequency: nu_c_mode must be 'background' or 'three_halves', got {nu_c_mode!r}")

    _validate_initial("initial", initial, grid_kwargs["spatial_points"], viol)
    if twin is not None:
        _validate_initial("twin", twin, grid_kwargs["spatial_points"], viol)

    if viol:
        raise ValidationError(viol)

    return Scenario(
        name=name,
        grid=GridConfig(**grid_kwargs),
        solver=SolverConfig(**solver_kwargs),
        eta=eta,
        omega=omega,
        nu_c_mode=nu_c_mode,
        initial=initial,
        twin=twin,
        sample_interval=sample_interval,
        output_dir=output_dir,
    )


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def scenario_to_ini(s: Scenario) -> str:
    """Echo a scenario with every default made explicit (round-trips exactly)."""
    lines = [
        "[scenario]",
        f"name = {s.name}",
        f"sample_interval = {_fmt(s.sample_interval)}",
        f"output_dir = {s.output_dir}",
        "",
        "[grid]",
    ]
    for key in _SCHEMA["grid"]:
        lines.append(f"{key} = {_fmt(getattr(s.grid, key))}")
    lines += ["", "[solver]"]
    for key in _SCHEMA["solver"]:
        lines.append(f"{key} = {_fmt(getattr(s.solver, key))}")
    lines += ["", "[frequency]",
              f"eta = {_fmt(s.eta)}", f"omega = {_fmt(s.omega)}", f"nu_c_mode = {s.nu_c_mode}"]
    for tag, ispec in (("initial", s.initial), ("twin", s.twin)):
        if ispec is None:
            continue
        lines += ["", f"[{tag}]",
                  f"family = {ispec.family}",
                  f"amplitude = {_fmt(ispec.amplitude)}",
                  f"wavenumber = {ispec.wavenumber}",
                  f"path = {ispec.path}"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------


def _first_axis_coordinate(grid: PhaseGrid) -> np.ndarray:
    n = grid.config.spatial_points
    idx = np.arange(grid.n_cells) // n ** (grid.spatial_dims - 1)
    return grid.x_axis[idx]


def _microscopic_profile(grid: PhaseGrid) -> np.ndarray:
    """Fixed smooth velocity profile with no component along the invariants."""
    sq = grid.sqrt_maxwellian
    if grid.velocity_dims == 3:
        raw = (grid.V[:, 0] ** 2 - grid.V[:, 1] ** 2) * sq
    else:
        v = grid.V[:, 0]
        raw = (v**3 - 3.0 * v) * sq
    basis = build_basis(grid)
    micro = raw - basis.vectors @ (basis.weighted.T @ raw)
    nrm = np.sqrt(grid.weights @ micro**2)
    return micro / nrm


def _field_from_spec(ispec: InitialSpec, grid: PhaseGrid, mode: str) -> DistributionField:
    want = FieldKind.ABSOLUTE if mode == "nonlinear" else FieldKind.PERTURBATION
    m = grid.background_maxwellian
    sq = grid.sqrt_maxwellian

    if ispec.family == "equilibrium":
        return equilibrium_field(grid) if want is FieldKind.ABSOLUTE else zero_perturbation(grid)

    if ispec.family == "density_wave":
        x = _first_axis_coordinate(grid)
        rho = 1.0 + ispec.amplitude * np.sin(
            2.0 * np.pi * ispec.wavenumber * x / grid.domain_length
        )
        if want is FieldKind.ABSOLUTE:
            values = rho[:, None] * m[None, :]
            return DistributionField(grid, values, FieldKind.ABSOLUTE)
        values = (rho - 1.0)[:, None] * sq[None, :]
        return DistributionField(grid, values, FieldKind.PERTURBATION)

    if ispec.family == "temperature_wave":
        x = _first_axis_coordinate(grid)
        T = 1.0 + ispec.amplitude * np.sin(
            2.0 * np.pi * ispec.wavenumber * x / grid.domain_length
        )
        params = np.zeros((grid.n_cells, grid.velocity_dims + 2))
        params[:, 0] = 1.0
        params[:, -1] = T
        values = sample_maxwellian_rows(params, grid.V, grid.V2)
        fld = DistributionField(grid, values, FieldKind.ABSOLUTE)
        return fld if want is FieldKind.ABSOLUTE else convert(fld, FieldKind.PERTURBATION)

    if ispec.family == "microscopic_mode":
        row = ispec.amplitude * _microscopic_profile(grid)
        values = np.tile(row, (grid.n_cells, 1))
        pert = DistributionField(grid, values, FieldKind.PERTURBATION)
        if want is FieldKind.PERTURBATION:
            return pert
        fld = convert(pert, FieldKind.ABSOLUTE)
        if fld.values.min() < 0:
            raise PositivityViolation(
                f"microscopic amplitude {ispec.amplitude} drives the distribution "
                f"negative (min {fld.values.min():.3e})"
            )
        return fld

    if ispec.family == "from_checkpoint":
        fld = load_checkpoint(ispec.path, grid)
        if fld.kind is not want:
            fld = convert(fld, want)
        return fld

    raise ValidationError([f"unknown initial family {ispec.family!r}"])


def make_initial(scenario: Scenario, grid: PhaseGrid) -> DistributionField:
    """Primary initial condition; positivity is re-checked for nonlinear runs."""
    fld = _field_from_spec(scenario.initial, grid, scenario.solver.mode)
    if fld.kind is FieldKind.ABSOLUTE and np.isfinite(fld.values).all() and fld.values.min() < 0:
        raise PositivityViolation(
            f"initial data has negative values (min {fld.values.min():.3e})"
        )
    return fld


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------


def _verdicts(cols: dict, perturbation_mode: bool) -> dict:
    out = {}
    if perturbation_mode:
        scale = max(1.0, float(cols["l2_f"][0]))
        worst = max(
            float(np.abs(cols[c]).max())
            for c in ("mass", "momentum_x", "momentum_y", "momentum_z", "energy")
        )
        out["conservation_ok"] = bool(worst < 1e-12 * scale)
        out["max_conserved_integral"] = worst
        l2 = cols["l2_f"]
        out["l2_monotone_ok"] = bool(np.all(l2[1:] <= l2[:-1] * (1.0 + 1e-13)))
    else:
        worst = max(
            float(np.abs(cols[c]).max())
            for c in (
                "mass_drift",
                "momentum_x_drift",
                "momentum_y_drift",
                "momentum_z_drift",
                "energy_drift",
            )
        )
        out["conservation_ok"] = bool(worst < 1e-10)
        out["max_drift"] = worst
        out["positivity_ok"] = bool(float(cols["min_f"].min()) >= 0.0)
        out["min_f"] = float(cols["min_f"].min())
        h = cols["h"]
        slack = 1e-12 * abs(h[0])
        out["h_monotone_ok"] = bool(np.all(h[1:] <= h[:-1] + slack))
        out["field_bounds_ok"] = bool(np.all(cols["field_bounds_ok"] == 1.0))
    return out


def _fit_if_possible(t, v, window):
    try:
        rate, r2 = diagnostics.fit_decay_rate(t, v, window)
        return {"rate": rate, "r_squared": r2}
    except DvbgkError as exc:
        return {"error": str(exc)}


def run_scenario(scenario: Scenario, use_twin: bool = False) -> int:
    """Execute one scenario, writing diagnostics.csv, checkpoints and summary.json."""
    outdir = Path(scenario.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "resolved_config").write_text(scenario_to_ini(scenario), encoding="utf-8")
    summary = {"name": scenario.name, "backend": BACKEND, "nu_c": scenario.nu_c}
    csv_path = outdir / "diagnostics.csv"

    try:
        if use_twin and scenario.twin is None:
            raise ValidationError(["--twin requested but the config has no [twin] section"])
        grid = build_grid(scenario.grid)
        basis = build_basis(grid)
        spec = scenario.frequency_spec()
        initial = make_initial(scenario, grid)
        twin_initial = (
            _field_from_spec(scenario.twin, grid, scenario.solver.mode) if use_twin else None
        )
        with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(diagnostics.csv_header() + "\n")

            def sink(rec):
                fh.write(diagnostics.record_to_row(rec) + "\n")

            result = run(
                initial,
                scenario.solver,
                spec,
                diagnostics_sink=sink,
                sample_interval=scenario.sample_interval,
                twin_initial=twin_initial,
                basis=basis,
            )
        save_checkpoint(result.final, outdir / "final_state.ckpt")
        if result.twin_final is not None:
            save_checkpoint(result.twin_final, outdir / "final_state_twin.ckpt")
    except DvbgkError as exc:
        summary["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, NonFiniteState):
            summary["error"]["step"] = exc.step
        (outdir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        logger.error("scenario %s failed: %s", scenario.name, exc)
        return 2

    cols = diagnostics.read_csv(csv_path)
    perturbation_mode = scenario.solver.mode == "linearized"
    verdicts = _verdicts(cols, perturbation_mode)
    summary["verdicts"] = verdicts
    summary["samples"] = int(cols["t"].size)
    summary["t_end"] = float(cols["t"][-1])

    t_skip = min(5.0 / scenario.nu_c, 0.5 * scenario.solver.t_end)
    window = (t_skip, scenario.solver.t_end)
    summary["l2_decay"] = _fit_if_possible(cols["t"], cols["l2_f"], window)
    if use_twin:
        tw = cols["twin_distance"]
        summary["twin_decay"] = _fit_if_possible(cols["t"], tw, window)
        summary["twin_bounded_ok"] = bool(np.all(tw <= tw[0] * (1.0 + 1e-13)))

    ok = all(v for k, v in verdicts.items() if k.endswith("_ok"))
    summary["exit_status"] = 0 if ok else 1
    (outdir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Grid self-test
# ---------------------------------------------------------------------------


def check_grid(config_path) -> int:
    """Run grid/basis/quadrature self-tests only; prints one line per check."""
    scenario = parse_config(config_path)
    try:
        grid = build_grid(scenario.grid)
    except DvbgkError as exc:
        print(f"FAIL grid construction: {exc}")
        return 2
    checks = []
    d = grid.velocity_dims
    checks.append(
        ("weight sum matches box volume",
         abs(grid.weight_sum - (2.0 * grid.velocity_cutoff) ** d), 1e-10)
    )
    checks.append(
        ("equilibrium mass within tolerance",
         abs(grid.background_mass - 1.0), grid.quadrature_tolerance)
    )
    w, m = grid.weights, grid.background_maxwellian
    checks.append(("mean velocity moment", float(np.abs((w * m) @ grid.V).max()), 1e-12))
    checks.append(
        ("second moment vs d", abs(float((w * m) @ grid.V2) - d), 200 * grid.quadrature_tolerance)
    )
    basis = build_basis(grid)
    gram_err = float(np.abs(basis.gram - np.eye(basis.size)).max())
    checks.append(("orthonormalized Gram = identity", gram_err, 1e-12))
    raw_off = basis.raw_gram - np.diag(np.diag(basis.raw_gram))
    checks.append(("raw Gram off-diagonals small", float(np.abs(raw_off).max()), 1e-6))

    rng = np.random.default_rng(0)
    f = DistributionField(
        grid, rng.standard_normal((grid.n_cells, grid.n_velocity)), FieldKind.PERTURBATION
    )
    back = convert(convert(f, FieldKind.ABSOLUTE), FieldKind.PERTURBATION)
    checks.append(
        ("perturbation round trip", float(np.abs(back.values - f.values).max()), 1e-12)
    )

    status = 0
    for label, value, bound in checks:
        good = value <= bound
        print(f"{'PASS' if good else 'FAIL'} {label}: {value:.3e} (bound {bound:.1e})")
        if not good:
            status = 1
    return status


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dvbgk", description="Discrete-velocity BGK relaxation solver"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None)
    p_run.add_argument("--mode", choices=("nonlinear", "linearized"), default=None)
    p_run.add_argument("--twin", action="store_true", help="run the configured twin pair")
    p_run.add_argument("--workers", type=int, default=None)

    p_check = sub.add_parser("check-grid", help="grid/basis/quadrature self-tests")
    p_check.add_argument("config")

    p_fit = sub.add_parser("fit", help="offline decay-rate fit on a diagnostics CSV")
    p_fit.add_argument("csv")
    p_fit.add_argument("--column", default="l2_f")
    p_fit.add_argument("--start", type=float, default=None)
    p_fit.add_argument("--end", type=float, default=None)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "run":
            scenario = parse_config(args.config)
            updates = {}
            if args.output_dir is not None:
                updates["output_dir"] = args.output_dir
            if args.mode is not None:
                updates["solver"] = dataclasses.replace(scenario.solver, mode=args.mode)
            if args.workers is not None:
                solver = updates.get("solver", scenario.solver)
                updates["solver"] = dataclasses.replace(solver, workers=args.workers)
            if updates:
                scenario = dataclasses.replace(scenario, **updates)
            return run_scenario(scenario, use_twin=args.twin)
        if args.command == "check-grid":
            return check_grid(args.config)
        if args.command == "fit":
            cols = diagnostics.read_csv(args.csv)
            if args.column not in cols:
                raise ParseError(f"column {args.column!r} not in {args.csv}")
            t = cols["t"]
            window = (
                args.start if args.start is not None else float(t[0]),
                args.end if args.end is not None else float(t[-1]),
            )
            rate, r2 = diagnostics.fit_decay_rate(t, cols[args.column], window)
            print(f"column={args.column} window=({window[0]:g},{window[1]:g}) "
                  f"rate={rate:.10g} r_squared={r2:.10g}")
            return 0
    except DvbgkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
