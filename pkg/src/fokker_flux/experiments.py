"""Experiment configurations, presets and artifact writers.

A run is described by a JSON-friendly configuration, executed with the
transient solver, and emits CSV/JSON/SVG artifacts. Identical
configurations produce bit-identical CSV and JSON files; wall-clock
timing is therefore reported on stdout, never inside the artifacts.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .domain import (
    DensityField,
    Grid,
    InitialSpec,
    ModelSpec,
    PotentialSpec,
    build_grid,
    build_initial,
)
from .entropy import (
    RateReport,
    default_fit_window,
    fit_exponential_rate,
    mass,
    mass_node_average,
    predicted_rate,
)
from .errors import ConfigError, FitError, FokkerFluxError
from .spectral import EigenResult, friedrichs_k, symmetric_k
from .stationary import stationary_closed, stationary_numeric
from .svg import line_chart
from .transient import SolverConfig, Trajectory, cfl_max_dt, run_transient

EMIT_CHOICES = ("snapshots", "entropy", "mass", "summary", "svg")
DEFAULT_EMIT = ("snapshots", "entropy", "summary")
THREADS_ENV = "FOKKER_FLUX_THREADS"


def _fmt(x: float) -> str:
    """Full double precision, '.' decimal separator."""
    return f"{x:.17g}"


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; ``raw`` echoes the exact input mapping."""

    model: str
    alpha: float
    beta: float
    gamma: float = 1.0
    potential: str = "linear"
    potential_values: Optional[tuple] = None
    initial: dict = dataclass_field(default_factory=lambda: {"kind": "affine", "a": -0.1, "b": 1.2})
    n: int = 200
    dt: object = "auto"  # float or the string "auto" (half the stability bound)
    t_end: float = 1.0
    snapshot_times: tuple = ()
    observe_every: int = 1000
    scheme: str = "explicit"
    outputs: str = "out"
    emit: tuple = DEFAULT_EMIT
    raw: dict = dataclass_field(default_factory=dict)

    def potential_spec(self) -> PotentialSpec:
        if self.potential == "tabulated":
            return PotentialSpec("tabulated", values=np.asarray(self.potential_values))
        if self.potential == "scaled-linear":
            return PotentialSpec("scaled-linear", gamma=self.gamma)
        return PotentialSpec(self.potential)

    def model_spec(self) -> ModelSpec:
        return ModelSpec(self.model, self.alpha, self.beta, self.potential_spec())

    def grid(self) -> Grid:
        return build_grid(self.n)

    def initial_spec(self) -> InitialSpec:
        d = self.initial
        kind = d["kind"]
        if kind == "affine":
            return InitialSpec("affine", a=float(d.get("a", -0.1)), b=float(d.get("b", 1.2)))
        if kind == "tabulated":
            return InitialSpec("tabulated", values=np.asarray(d["values"], dtype=float))
        return InitialSpec(kind)

    def resolve_dt(self, model: ModelSpec, grid: Grid) -> float:
        if self.dt == "auto":
            return 0.5 * cfl_max_dt(model, grid)
        return float(self.dt)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def config_from_dict(data: dict) -> RunConfig:
    """Validate a JSON mapping into a RunConfig (raises ConfigError)."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {
        "model", "alpha", "beta", "gamma", "potential", "initial", "n", "dt",
        "t_end", "snapshot_times", "observe_every", "scheme", "outputs", "emit",
    }
    unknown = set(data) - known
    _require(not unknown, f"unknown configuration fields: {sorted(unknown)}")
    _require("model" in data, "missing field 'model'")
    model = data["model"]
    _require(model in ("A", "B", "C"), f"model must be A, B or C, got {model!r}")

    def fnum(name: str, default=None, positive=False, nonnegative=False):
        if name not in data:
            _require(default is not None, f"missing field {name!r}")
            return default
        v = data[name]
        _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{name} must be a number")
        v = float(v)
        _require(math.isfinite(v), f"{name} must be finite")
        if positive:
            _require(v > 0.0, f"{name} must be positive (got {v})")
        if nonnegative:
            _require(v >= 0.0, f"{name} must be nonnegative (got {v})")
        return v

    alpha = fnum("alpha", positive=False)
    _require(alpha > 0.0, f"alpha must satisfy alpha >= alpha_0 > 0 (got {alpha})")
    beta = fnum("beta", positive=False)
    _require(beta > 0.0, f"beta must satisfy beta >= beta_0 > 0 (got {beta})")
    gamma = fnum("gamma", default=1.0)

    pot = data.get("potential", "linear")
    pot_values = None
    if isinstance(pot, dict):
        kind = pot.get("kind")
        _require(kind in ("linear", "zero", "scaled-linear", "tabulated"),
                 f"unknown potential kind {kind!r}")
        if kind == "tabulated":
            vals = pot.get("values")
            _require(isinstance(vals, (list, tuple)) and len(vals) > 0,
                     "tabulated potential needs a nonempty 'values' list")
            pot_values = tuple(float(v) for v in vals)
        pot = kind
    _require(pot in ("linear", "zero", "scaled-linear", "tabulated"),
             f"unknown potential kind {pot!r}")
    _require(pot == "scaled-linear" or gamma == 1.0 or "gamma" not in data,
             "gamma applies to the scaled-linear potential; set potential accordingly")

    initial = data.get("initial", {"kind": "affine", "a": -0.1, "b": 1.2})
    if isinstance(initial, str):
        initial = {"kind": initial}
    _require(isinstance(initial, dict) and "kind" in initial, "initial needs a 'kind'")
    _require(initial["kind"] in ("affine", "parabola", "mass1", "mass2", "tabulated"),
             f"unknown initial kind {initial['kind']!r}")
    if initial["kind"] == "affine":
        for key in ("a", "b"):
            value = initial.get(key, -0.1 if key == "a" else 1.2)
            _require(isinstance(value, (int, float)) and not isinstance(value, bool),
                     f"affine initial coefficient {key!r} must be a number")
    if initial["kind"] == "tabulated":
        vals = initial.get("values")
        _require(isinstance(vals, (list, tuple)) and len(vals) > 0,
                 "tabulated initial needs a nonempty 'values' list")

    n = data.get("n", 200)
    _require(isinstance(n, int) and not isinstance(n, bool) and n >= 3,
             f"n must be an integer >= 3, got {n!r}")

    dt = data.get("dt", "auto")
    if dt != "auto":
        _require(isinstance(dt, (int, float)) and not isinstance(dt, bool) and float(dt) > 0.0,
                 f"dt must be a positive number or 'auto', got {dt!r}")
        dt = float(dt)

    t_end = fnum("t_end", nonnegative=True)
    snaps = data.get("snapshot_times", [])
    _require(isinstance(snaps, (list, tuple)), "snapshot_times must be a list")
    for t_req in snaps:
        _require(isinstance(t_req, (int, float)) and 0.0 <= float(t_req) <= t_end,
                 f"snapshot time {t_req!r} must lie in [0, t_end]")

    observe = data.get("observe_every", 1000)
    _require(isinstance(observe, int) and not isinstance(observe, bool) and observe >= 1,
             "observe_every must be a positive integer")

    scheme = data.get("scheme", "explicit")
    _require(scheme in ("explicit", "implicit-entropy"), f"unknown scheme {scheme!r}")
    _require(scheme == "explicit" or model == "C",
             "the implicit-entropy scheme applies to model C only")

    emit = tuple(data.get("emit", DEFAULT_EMIT))
    bad = [e for e in emit if e not in EMIT_CHOICES]
    _require(not bad, f"unknown emit entries {bad}; choose from {EMIT_CHOICES}")

    return RunConfig(
        model=model, alpha=alpha, beta=beta, gamma=gamma,
        potential=pot, potential_values=pot_values, initial=dict(initial),
        n=n, dt=dt, t_end=t_end, snapshot_times=tuple(float(t) for t in snaps),
        observe_every=observe, scheme=scheme,
        outputs=str(data.get("outputs", "out")), emit=emit, raw=dict(data),
    )


@dataclass(frozen=True)
class RunSummary:
    """Headline numbers of one run; serialized to summary.json."""

    fitted_rate: Optional[float]
    fit: Optional[RateReport]
    predicted_rate: Optional[float]
    predicted_provenance: Optional[str]
    final_sup_distance: float
    final_mass: float
    final_mass_node_average: float
    stationary_mass_closed: float
    stationary_mass_numeric: float
    eigen: Optional[dict]
    steps: int
    dt: float
    min_value: float
    max_value: float
    config: dict
    wall_clock_seconds: float  # stdout only, never serialized


def _eigen_dict(result: EigenResult) -> dict:
    return {
        "k": result.k,
        "lambda": result.eigenvalue,
        "rate": result.rate,
        "equation_tag": result.equation_tag,
        "root_residual": result.root_residual,
    }


def summary_json_dict(summary: RunSummary) -> dict:
    """JSON view of a summary. Timing is excluded to keep runs bit-identical."""
    fit = summary.fit
    return {
        "config": summary.config,
        "fitted_rate": summary.fitted_rate,
        "fit_window": None if fit is None else list(fit.fit_window),
        "fit_r_squared": None if fit is None else fit.r_squared,
        "fit_intercept": None if fit is None else fit.intercept,
        "predicted_rate": summary.predicted_rate,
        "predicted_rate_provenance": summary.predicted_provenance,
        "final_sup_distance": summary.final_sup_distance,
        "final_mass": summary.final_mass,
        "final_mass_node_average": summary.final_mass_node_average,
        "stationary_mass_closed": summary.stationary_mass_closed,
        "stationary_mass_numeric": summary.stationary_mass_numeric,
        "eigen": summary.eigen,
        "steps": summary.steps,
        "dt": summary.dt,
        "min_value": summary.min_value,
        "max_value": summary.max_value,
    }


def execute(config: RunConfig, keep_fields: bool = False) -> tuple[RunSummary, Trajectory]:
    """Run a configuration without touching the filesystem."""
    started = time.perf_counter()
    model = config.model_spec()
    grid = config.grid()
    initial = build_initial(config.initial_spec(), grid, model)
    dt = config.resolve_dt(model, grid)
    solver = SolverConfig(
        dt=dt, t_end=config.t_end, observe_every=config.observe_every, scheme=config.scheme
    )
    reference = stationary_numeric(model, grid)
    trajectory = run_transient(
        model,
        initial,
        solver,
        reference=reference,
        snapshot_times=config.snapshot_times,
        keep_fields=keep_fields,
    )
    prediction = predicted_rate(model, reference.field, rho0=initial)
    fit: Optional[RateReport] = None
    try:
        window = default_fit_window(trajectory.times, trajectory.entropy)
        fit = fit_exponential_rate(trajectory.times, trajectory.entropy, window, prediction)
    except FitError:
        fit = None
    closed = stationary_closed(model, grid)
    eigen = None
    if model.model == "A":
        eigen = {
            "symmetric": _eigen_dict(symmetric_k(model.beta)),
            # boundary dissipation weights alpha/2 (inflow) and beta/2 (outflow)
            "friedrichs": _eigen_dict(friedrichs_k(0.5 * model.alpha, 0.5 * model.beta)),
        }
    summary = RunSummary(
        fitted_rate=None if fit is None else fit.fitted_slope,
        fit=fit,
        predicted_rate=prediction.value,
        predicted_provenance=prediction.provenance,
        final_sup_distance=float(
            np.max(np.abs(trajectory.final.values - reference.field.values))
        ),
        final_mass=mass(trajectory.final),
        final_mass_node_average=mass_node_average(trajectory.final),
        stationary_mass_closed=mass(closed.field),
        stationary_mass_numeric=mass(reference.field),
        eigen=eigen,
        steps=trajectory.steps,
        dt=dt,
        min_value=trajectory.min_value,
        max_value=trajectory.max_value,
        config=dict(config.raw) if config.raw else _config_dict(config),
        wall_clock_seconds=time.perf_counter() - started,
    )
    return summary, trajectory


def _config_dict(config: RunConfig) -> dict:
    d = {
        "model": config.model,
        "alpha": config.alpha,
        "beta": config.beta,
        "potential": config.potential,
        "initial": config.initial,
        "n": config.n,
        "dt": config.dt,
        "t_end": config.t_end,
        "snapshot_times": list(config.snapshot_times),
        "observe_every": config.observe_every,
        "scheme": config.scheme,
        "outputs": config.outputs,
        "emit": list(config.emit),
    }
    if config.potential == "scaled-linear":
        d["gamma"] = config.gamma
    if config.potential_values is not None:
        d["potential"] = {"kind": "tabulated", "values": list(config.potential_values)}
    return d


def _write_entropy_csv(path: Path, trajectory: Trajectory) -> None:
    rows = ["t,entropy,mass,l1,residual"]
    for i in range(trajectory.times.size):
        rows.append(
            ",".join(
                _fmt(v)
                for v in (
                    trajectory.times[i],
                    trajectory.entropy[i],
                    trajectory.mass[i],
                    trajectory.l1[i],
                    trajectory.residual[i],
                )
            )
        )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _write_mass_csv(path: Path, trajectory: Trajectory) -> None:
    rows = ["t,mass,node_average_mass"]
    for i in range(trajectory.times.size):
        rows.append(
            f"{_fmt(trajectory.times[i])},{_fmt(trajectory.mass[i])},"
            f"{_fmt(trajectory.node_mass[i])}"
        )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _write_snapshots_csv(path: Path, trajectory: Trajectory) -> None:
    grid = trajectory.final.grid
    columns: list[tuple[str, np.ndarray]] = [("x", grid.nodes)]
    for t_req, snap in trajectory.snapshots:
        columns.append((f"rho_t={t_req:g}", snap.values))
    columns.append(("rho_inf", trajectory.reference.field.values))
    rows = [",".join(name for name, _ in columns)]
    for i in range(grid.n):
        rows.append(",".join(_fmt(col[i]) for _, col in columns))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _write_svgs(out: Path, trajectory: Trajectory) -> None:
    grid = trajectory.final.grid
    series = [
        (f"t={t_req:g}", grid.nodes.tolist(), snap.values.tolist())
        for t_req, snap in trajectory.snapshots
    ]
    if not series:
        series = [("final", grid.nodes.tolist(), trajectory.final.values.tolist())]
    series.append(
        ("stationary", grid.nodes.tolist(), trajectory.reference.field.values.tolist())
    )
    (out / "density.svg").write_text(
        line_chart(series, "density snapshots", "x", "rho"), encoding="utf-8"
    )
    ent_series = [("entropy", trajectory.times.tolist(), trajectory.entropy.tolist())]
    (out / "entropy.svg").write_text(
        line_chart(ent_series, "relative entropy decay", "t", "log10 entropy", log_y=True),
        encoding="utf-8",
    )


def run(config: RunConfig, out_dir: Optional[str] = None) -> RunSummary:
    """Execute a configuration and write the requested artifacts."""
    summary, trajectory = execute(config)
    out = Path(out_dir if out_dir is not None else config.outputs)
    out.mkdir(parents=True, exist_ok=True)
    if "entropy" in config.emit:
        _write_entropy_csv(out / "entropy.csv", trajectory)
    if "mass" in config.emit:
        _write_mass_csv(out / "mass.csv", trajectory)
    if "snapshots" in config.emit:
        _write_snapshots_csv(out / "snapshots.csv", trajectory)
    if "summary" in config.emit:
        (out / "summary.json").write_text(
            json.dumps(summary_json_dict(summary), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    if "svg" in config.emit:
        _write_svgs(out, trajectory)
    return summary


# ---------------------------------------------------------------------------
# presets reproducing the reference experiments

_PAPER_DT = 5e-6

PRESETS: dict[str, dict] = {
    "evolution-A": {
        "model": "A", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "affine", "a": -0.1, "b": 1.2},
        "n": 200, "dt": _PAPER_DT, "t_end": 9.0,
        "snapshot_times": [0.0, 0.05, 1.5, 9.0],
        "emit": ["snapshots", "entropy", "summary", "svg"],
    },
    "entropy-A": {
        "model": "A", "alpha": 1.0, "beta": 1.0, "potential": "linear",
        "initial": {"kind": "affine", "a": -0.1, "b": 1.2},
        "n": 200, "dt": _PAPER_DT, "t_end": 6.0,
        "emit": ["entropy", "summary", "svg"],
    },
    "entropy-A-gamma0": {
        "model": "A", "alpha": 1.0, "beta": 1.0, "potential": "scaled-linear",
        "gamma": 0.0,
        "initial": {"kind": "affine", "a": -0.1, "b": 1.2},
        "n": 200, "dt": _PAPER_DT, "t_end": 6.0,
        "emit": ["entropy", "summary"],
    },
    "evolution-B": {
        "model": "B", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "affine", "a": -0.1, "b": 1.2},
        "n": 200, "dt": _PAPER_DT, "t_end": 20.0,
        "snapshot_times": [0.0, 0.05, 1.5, 20.0],
        "emit": ["snapshots", "entropy", "summary", "svg"],
    },
    "entropy-B": {
        "model": "B", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "affine", "a": -0.1, "b": 1.2},
        "n": 200, "dt": _PAPER_DT, "t_end": 15.0,
        "emit": ["entropy", "summary", "svg"],
    },
    "evolution-C": {
        "model": "C", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "parabola"},
        "n": 200, "dt": _PAPER_DT, "t_end": 3.7,
        "snapshot_times": [0.0, 0.05, 0.35, 3.7],
        "emit": ["snapshots", "entropy", "summary", "svg"],
    },
    "entropy-C": {
        "model": "C", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "parabola"},
        "n": 200, "dt": _PAPER_DT, "t_end": 3.7,
        "emit": ["entropy", "summary", "svg"],
    },
    "mass1": {
        "model": "A", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "mass1"},
        "n": 200, "dt": _PAPER_DT, "t_end": 6.0,
        "emit": ["entropy", "mass", "summary", "svg"],
    },
    "mass2": {
        "model": "A", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "mass2"},
        "n": 200, "dt": _PAPER_DT, "t_end": 6.0,
        "emit": ["entropy", "mass", "summary", "svg"],
    },
}


def preset_config(name: str, overrides: Optional[dict] = None) -> RunConfig:
    """Configuration of a named preset, optionally with overridden fields."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    data = dict(PRESETS[name])
    if overrides:
        data.update(overrides)
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# mass evolution

@dataclass(frozen=True)
class MassEvolutionReport:
    """Initial/final masses and the interior extremum of the mass series.

    Headline masses use the node-average quadrature (the convention of the
    reference tabulations); the trapezoid values are reported alongside.
    """

    preset: str
    initial_mass: float
    final_mass: float
    extremum_kind: str  # "maximum" or "minimum"
    extremum_time: float
    extremum_value: float
    initial_mass_trapezoid: float
    final_mass_trapezoid: float
    trajectory: Trajectory

    def json_dict(self) -> dict:
        def clean(x: float):
            return x if math.isfinite(x) else None

        return {
            "preset": self.preset,
            "initial_mass": self.initial_mass,
            "final_mass": self.final_mass,
            "extremum_kind": self.extremum_kind,
            "extremum_time": clean(self.extremum_time),
            "extremum_value": clean(self.extremum_value),
            "initial_mass_trapezoid": self.initial_mass_trapezoid,
            "final_mass_trapezoid": self.final_mass_trapezoid,
        }


def find_interior_extremum(times: np.ndarray, series: np.ndarray):
    """Interior extremum of a sampled series: (kind, time, value).

    Picks whichever of the interior global maximum/minimum escapes the
    band spanned by the first and last samples the furthest.
    """
    ends_lo = min(series[0], series[-1])
    ends_hi = max(series[0], series[-1])
    imax = int(np.argmax(series))
    imin = int(np.argmin(series))
    candidates = []
    if 0 < imax < series.size - 1 and series[imax] > ends_hi:
        candidates.append(("maximum", series[imax] - ends_hi, imax))
    if 0 < imin < series.size - 1 and series[imin] < ends_lo:
        candidates.append(("minimum", ends_lo - series[imin], imin))
    if not candidates:
        return None
    kind, _, idx = max(candidates, key=lambda c: c[1])
    return kind, float(times[idx]), float(series[idx])


def mass_evolution(
    preset: str,
    out_dir: Optional[str] = None,
    overrides: Optional[dict] = None,
) -> MassEvolutionReport:
    """Run the ``mass1`` or ``mass2`` preset and report the mass extremum."""
    if preset not in ("mass1", "mass2"):
        raise ConfigError(f"mass evolution presets are 'mass1' and 'mass2', got {preset!r}")
    config = preset_config(preset, overrides)
    summary, trajectory = execute(config)
    extremum = find_interior_extremum(trajectory.times, trajectory.node_mass)
    if extremum is None:
        kind, t_ext, v_ext = "none", math.nan, math.nan
    else:
        kind, t_ext, v_ext = extremum
    report = MassEvolutionReport(
        preset=preset,
        initial_mass=float(trajectory.node_mass[0]),
        final_mass=float(trajectory.node_mass[-1]),
        extremum_kind=kind,
        extremum_time=t_ext,
        extremum_value=v_ext,
        initial_mass_trapezoid=float(trajectory.mass[0]),
        final_mass_trapezoid=float(trajectory.mass[-1]),
        trajectory=trajectory,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_mass_csv(out / "mass.csv", trajectory)
        _write_entropy_csv(out / "entropy.csv", trajectory)
        payload = summary_json_dict(summary)
        payload["mass_evolution"] = report.json_dict()
        (out / "summary.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if "svg" in config.emit:
            (out / "mass.svg").write_text(
                line_chart(
                    [("node-average mass", trajectory.times.tolist(), trajectory.node_mass.tolist())],
                    "mass evolution", "t", "mass",
                ),
                encoding="utf-8",
            )
    return report


# ---------------------------------------------------------------------------
# gamma sweep

@dataclass(frozen=True)
class SweepRow:
    gamma: float
    fitted_rate: float
    r_squared: float


def _sweep_worker(payload: tuple[dict, float]) -> tuple[float, float, float]:
    base, gamma = payload
    data = dict(base)
    data["potential"] = "scaled-linear"
    data["gamma"] = gamma
    data.pop("outputs", None)
    data.pop("emit", None)
    config = config_from_dict(data)
    summary, _ = execute(config)
    if summary.fitted_rate is None:
        raise FitError(f"gamma={gamma}: entropy series could not be fitted")
    return gamma, summary.fitted_rate, summary.fit.r_squared


def _sweep_workers_cap(n_jobs: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ConfigError(f"{THREADS_ENV} must be at least 1")
        return min(cap, n_jobs)
    return min(os.cpu_count() or 1, n_jobs)


def gamma_sweep(
    base: RunConfig, gammas: Sequence[float], out_dir: Optional[str] = None
) -> list[SweepRow]:
    """One model-A run per drift scaling factor; returns rows sorted by gamma.

    Runs execute in parallel processes (capped by FOKKER_FLUX_THREADS); the
    merge order is deterministic. If a member fails, the completed rows are
    flushed to sweep.csv before the failure is re-raised.
    """
    if base.model != "A":
        raise ConfigError("the drift sweep is defined for model A")
    gs = [float(g) for g in gammas]
    if not gs:
        raise ConfigError("no gamma values given")
    for g in gs:
        if not math.isfinite(g):
            raise ConfigError(f"gamma values must be finite, got {g}")
    base_dict = _config_dict(base)
    payloads = [(base_dict, g) for g in sorted(gs)]
    rows: list[SweepRow] = []
    failure: Optional[BaseException] = None
    workers = _sweep_workers_cap(len(payloads))
    try:
        if workers <= 1:
            for payload in payloads:
                rows.append(SweepRow(*_sweep_worker(payload)))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for result in pool.map(_sweep_worker, payloads):
                    rows.append(SweepRow(*result))
    except FokkerFluxError as exc:
        failure = exc
    except Exception as exc:  # worker crash: surface after flushing partials
        failure = exc
    rows.sort(key=lambda r: r.gamma)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["gamma,fitted_rate,r_squared"]
        lines += [f"{_fmt(r.gamma)},{_fmt(r.fitted_rate)},{_fmt(r.r_squared)}" for r in rows]
        (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if failure is not None:
        raise failure
    return rows
