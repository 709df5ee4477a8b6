"""Explicit time stepping for the three models, plus the implicit
entropy-variable scheme for the crowded model.

Space is discretized in conservative flux form on the node-centered grid:
every node owns a cell of width dx (half cells at the two boundary nodes),
interior faces carry

    J_{i+1/2} = -(rho_{i+1} - rho_i)/dx + f(mean(rho_i, rho_{i+1})) V'_{i+1/2}

with f the identity (models A, B) or f(r) = r (1 - r) (model C), and the
two boundary faces carry the imposed fluxes (alpha and beta rho for model
A, zero otherwise). With the half cells, the trapezoid mass obeys the
discrete balance  M^{k+1} - M^k = dt (alpha - beta rho_{n-1})  exactly for
model A; this is the ghost-node construction written so that the balance
telescopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Sequence

import numpy as np

from .domain import DensityField, FloatArray, Grid, ModelSpec, eval_potential, trapezoid
from .entropy import default_kind, entropy, l1_distance
from .errors import (
    ConfigError,
    DivergenceError,
    InvalidInitialError,
    InvalidModelError,
    StabilityError,
    StepFailureError,
)
from .stationary import StationarySolution, stationary_numeric, steady_residual
from .tridiag import solve_tridiagonal


@dataclass(frozen=True)
class NewtonConfig:
    """Damped-Newton settings for the implicit entropy scheme."""

    max_iter: int = 50
    tolerance: float = 1e-10
    max_backtracks: int = 8


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters.

    ``observe_every`` is the step stride of the observer samples; the
    explicit scheme additionally requires ``dt <= cfl_max_dt``.
    """

    dt: float
    t_end: float
    observe_every: int = 1000
    scheme: str = "explicit"
    newton: NewtonConfig = dataclass_field(default_factory=NewtonConfig)

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"time step must be positive, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0.0):
            raise ConfigError(f"final time must be nonnegative, got {self.t_end}")
        if self.observe_every < 1:
            raise ConfigError("observer stride must be at least 1")
        if self.scheme not in ("explicit", "implicit-entropy"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class FluxField:
    """Face fluxes J_{i+1/2} for i = -1 .. n-1, boundary faces included."""

    values: FloatArray
    grid: Grid


@dataclass(frozen=True)
class Trajectory:
    """Sampled observables and snapshots of one run.

    ``times`` is strictly increasing with one row of observables per
    sample. ``min_value`` / ``max_value`` track every iterate, not just
    the sampled ones.
    """

    times: FloatArray
    entropy: FloatArray
    mass: FloatArray
    node_mass: FloatArray
    l1: FloatArray
    residual: FloatArray
    outflow_density: FloatArray
    snapshots: tuple
    sampled_fields: tuple
    final: DensityField
    reference: StationarySolution
    entropy_kind: str
    min_value: float
    max_value: float
    steps: int
    dt: float


def cfl_max_dt(model: ModelSpec, grid: Grid) -> float:
    """Stability bound dx^2 / (2 + dx sup|V'|) for the explicit scheme.

    The drift contribution is evaluated from the face slopes; the reaction
    terms only tighten the bound by O(dx^2) and are absorbed into it.
    """
    pv = eval_potential(model.potential, grid)
    return grid.dx**2 / (2.0 + grid.dx * pv.max_abs_slope)


def _mobility(model: ModelSpec, mean: FloatArray) -> FloatArray:
    return mean * (1.0 - mean) if model.crowded else mean


def face_flux(rho: DensityField, model: ModelSpec, face: int) -> float:
    """Flux through the interior face between nodes ``face`` and ``face + 1``."""
    grid = rho.grid
    if not 0 <= face <= grid.n - 2:
        raise IndexError(f"interior faces are 0 .. {grid.n - 2}, got {face}")
    pv = eval_potential(model.potential, grid)
    vals = rho.values
    mean = 0.5 * (vals[face] + vals[face + 1])
    mob = mean * (1.0 - mean) if model.crowded else mean
    return float(
        -(vals[face + 1] - vals[face]) / grid.dx + mob * pv.face_slope[face]
    )


def flux_field(rho: DensityField, model: ModelSpec) -> FluxField:
    """All face fluxes, with the imposed boundary values at the two ends."""
    grid = rho.grid
    pv = eval_potential(model.potential, grid)
    vals = rho.values
    mean = 0.5 * (vals[:-1] + vals[1:])
    faces = np.empty(grid.n + 1)
    faces[1:-1] = -(vals[1:] - vals[:-1]) / grid.dx + _mobility(model, mean) * pv.face_slope
    if model.model == "A":
        faces[0] = model.alpha
        faces[-1] = model.beta * vals[-1]
    else:
        faces[0] = faces[-1] = 0.0
    out = faces
    out.setflags(write=False)
    return FluxField(out, grid)


def residual_stationary(rho: DensityField, model: ModelSpec) -> float:
    """Sup-norm of the discrete steady-state equation at ``rho``.

    See :func:`fokker_flux.stationary.steady_residual` for the exact form
    (symmetrized fluxes, half-cell boundary rows).
    """
    return float(np.max(np.abs(steady_residual(rho, model))))


class _ExplicitStepper:
    """Preallocated one-step kernel shared by step_explicit and run_transient."""

    def __init__(self, model: ModelSpec, grid: Grid):
        self.model = model
        self.grid = grid
        pv = eval_potential(model.potential, grid)
        n = grid.n
        self.inv_dx = 1.0 / grid.dx
        self.vslope = pv.face_slope.copy()
        self.inv_vol = np.full(n, self.inv_dx)
        self.inv_vol[0] = self.inv_vol[-1] = 2.0 * self.inv_dx
        self.faces = np.zeros(n + 1)
        self.mean = np.empty(n - 1)
        self.tmp = np.empty(n - 1)
        self.div = np.empty(n)
        self.react = np.empty(n) if model.model in ("B", "C") else None
        if model.model == "B":
            self.decay = model.beta * np.exp(-pv.nodes)
        elif model.model == "C":
            self.decay = model.alpha + model.beta * np.exp(-pv.nodes)
        else:
            self.decay = None

    def step(self, rho: FloatArray, dt: float) -> None:
        """Advance ``rho`` in place by one explicit step."""
        faces = self.faces
        np.add(rho[:-1], rho[1:], out=self.mean)
        self.mean *= 0.5
        if self.model.crowded:
            np.multiply(self.mean, self.mean, out=self.tmp)
            np.subtract(self.mean, self.tmp, out=self.mean)
        np.multiply(self.mean, self.vslope, out=self.mean)
        np.subtract(rho[:-1], rho[1:], out=self.tmp)
        self.tmp *= self.inv_dx
        np.add(self.tmp, self.mean, out=faces[1:-1])
        if self.model.model == "A":
            faces[0] = self.model.alpha
            faces[-1] = self.model.beta * rho[-1]
        np.subtract(faces[1:], faces[:-1], out=self.div)
        self.div *= self.inv_vol
        self.div *= dt
        rho -= self.div
        if self.react is not None:
            np.multiply(rho, self.decay, out=self.react)
            np.subtract(np.float64(self.model.alpha), self.react, out=self.react)
            self.react *= dt
            rho += self.react


def step_explicit(rho: DensityField, model: ModelSpec, dt: float) -> DensityField:
    """One explicit step; requires ``dt <= cfl_max_dt(model, grid)``."""
    limit = cfl_max_dt(model, rho.grid)
    if dt > limit:
        raise StabilityError(f"dt={dt} exceeds the stability bound {limit:.6e}")
    stepper = _ExplicitStepper(model, rho.grid)
    work = rho.values.copy()
    stepper.step(work, dt)
    if not np.all(np.isfinite(work)):
        raise DivergenceError("non-finite values after one explicit step")
    return DensityField(work, rho.grid)


class _ImplicitStepper:
    """Backward Euler in the entropy variable u = log(rho/(1-rho)) - V.

    The density is recovered through the logistic rho = 1/(1 + e^{-(u+V)}),
    which keeps every iterate strictly inside (0, 1). Face fluxes are
    -f(mean rho) (u_{i+1} - u_i)/dx, reactions as in the crowded model, and
    the nonlinear system is solved by damped Newton on the cell balances.
    """

    def __init__(self, model: ModelSpec, grid: Grid, newton: NewtonConfig):
        if model.model != "C":
            raise InvalidModelError("the entropy-variable scheme applies to model C")
        self.model = model
        self.grid = grid
        self.newton = newton
        pv = eval_potential(model.potential, grid)
        self.v = pv.nodes.copy()
        self.emv = np.exp(-self.v)
        n = grid.n
        self.vol = np.full(n, grid.dx)
        self.vol[0] = self.vol[-1] = 0.5 * grid.dx

    @staticmethod
    def _logistic(z: FloatArray) -> FloatArray:
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out

    def _residual_jacobian(self, u: FloatArray, rho_old: FloatArray, dt: float):
        model, grid, vol = self.model, self.grid, self.vol
        n = grid.n
        dx = grid.dx
        rho = self._logistic(u + self.v)
        sig = rho * (1.0 - rho)
        mean = 0.5 * (rho[:-1] + rho[1:])
        mob = mean * (1.0 - mean)
        du = u[1:] - u[:-1]
        flux = -mob * du / dx
        div = np.empty(n)
        div[0] = flux[0]
        div[1:-1] = flux[1:] - flux[:-1]
        div[-1] = -flux[-1]
        react = model.alpha * (1.0 - rho) - model.beta * rho * self.emv
        G = vol * (rho - rho_old) / dt + div - vol * react
        # tridiagonal Jacobian in u
        dmob = 1.0 - 2.0 * mean
        dflux_left = (-dmob * 0.5 * sig[:-1] * du + mob) / dx
        dflux_right = (-dmob * 0.5 * sig[1:] * du - mob) / dx
        dreact = (-model.alpha - model.beta * self.emv) * sig
        diag = vol * sig / dt - vol * dreact
        lower = np.empty(n - 1)
        upper = np.empty(n - 1)
        diag[0] += dflux_left[0]
        upper[0] = dflux_right[0]
        diag[1:-1] += dflux_left[1:] - dflux_right[:-1]
        upper[1:] = dflux_right[1:]
        lower[:-1] = -dflux_left[:-1]
        diag[-1] += -dflux_right[-1]
        lower[-1] = -dflux_left[-1]
        return G, lower, diag, upper

    def step(self, rho_old: FloatArray, dt: float) -> FloatArray:
        cfg = self.newton
        u = np.log(rho_old / (1.0 - rho_old)) - self.v
        norm = math.inf
        for _ in range(cfg.max_iter):
            G, lower, diag, upper = self._residual_jacobian(u, rho_old, dt)
            norm = float(np.max(np.abs(G / self.vol)))
            if norm < cfg.tolerance:
                return self._logistic(u + self.v)
            delta = solve_tridiagonal(lower, diag, upper, -G)
            damping = 1.0
            for _ in range(cfg.max_backtracks):
                trial, *_ = self._residual_jacobian(u + damping * delta, rho_old, dt)
                if float(np.max(np.abs(trial / self.vol))) < norm:
                    break
                damping *= 0.5
            u = u + damping * delta
        G, *_ = self._residual_jacobian(u, rho_old, dt)
        norm = float(np.max(np.abs(G / self.vol)))
        if norm < cfg.tolerance:
            return self._logistic(u + self.v)
        raise StepFailureError(
            f"Newton did not reach {cfg.tolerance} within {cfg.max_iter} iterations "
            f"(residual {norm:.3e})",
            residual=norm,
        )


def step_implicit_entropy(
    rho: DensityField,
    model: ModelSpec,
    dt: float,
    newton: NewtonConfig | None = None,
) -> DensityField:
    """One backward-Euler step of the entropy-variable scheme (model C).

    The previous state must lie strictly inside (0, 1); the returned state
    does so by construction.
    """
    vals = rho.values
    if np.any(vals <= 0.0) or np.any(vals >= 1.0):
        raise InvalidInitialError("implicit scheme needs the state strictly inside (0, 1)")
    stepper = _ImplicitStepper(model, rho.grid, newton or NewtonConfig())
    return DensityField(stepper.step(vals, dt), rho.grid)


def run_transient(
    model: ModelSpec,
    initial: DensityField,
    config: SolverConfig,
    reference: Optional[StationarySolution] = None,
    snapshot_times: Sequence[float] = (),
    keep_fields: bool = False,
) -> Trajectory:
    """Step the model to ``t_end`` and sample observers along the way.

    Observers (model-appropriate relative entropy, trapezoid and
    node-average mass, L1 distance, steady residual) are computed against
    ``reference`` (the numeric stationary solution when omitted) at step 0,
    every ``observe_every`` steps, and at the final step. Snapshots are
    taken at the steps nearest the requested times; ``keep_fields``
    additionally retains the field at every observer sample. Step errors
    propagate with the failing time attached.
    """
    grid = initial.grid
    initial.validate_for_model(model, strict_box=config.scheme == "implicit-entropy")
    if reference is None:
        reference = stationary_numeric(model, grid)
    kind = default_kind(model)

    dt = config.dt
    steps = int(round(config.t_end / dt))
    if config.scheme == "explicit":
        limit = cfl_max_dt(model, grid)
        if dt > limit:
            raise StabilityError(
                f"dt={dt} exceeds the explicit stability bound {limit:.6e}; "
                "lower dt (run configurations accept dt='auto' for half the bound)"
            )
        explicit = _ExplicitStepper(model, grid)
        implicit = None
    else:
        explicit = None
        implicit = _ImplicitStepper(model, grid, config.newton)

    snap_lookup: dict[int, float] = {}
    for t_req in snapshot_times:
        if t_req < 0 or t_req > config.t_end + 1e-12:
            raise ConfigError(f"snapshot time {t_req} outside [0, {config.t_end}]")
        snap_lookup.setdefault(min(steps, int(round(t_req / dt))), float(t_req))

    rho = initial.values.copy()
    times, ent, mass_tz, mass_na, l1s, resid, outflow = [], [], [], [], [], [], []
    snapshots = []
    sampled_fields = []
    ref_field = reference.field

    def sample(step_index: int) -> None:
        t = step_index * dt
        if not np.all(np.isfinite(rho)):
            raise DivergenceError(f"non-finite values at t={t:.6g}")
        here = DensityField(rho.copy(), grid)
        times.append(t)
        ent.append(entropy(kind, here, ref_field))
        mass_tz.append(trapezoid(rho, grid.dx))
        mass_na.append(float(rho.mean()))
        l1s.append(l1_distance(here, ref_field))
        resid.append(residual_stationary(here, model))
        outflow.append(float(rho[-1]))
        if keep_fields:
            sampled_fields.append(here)

    def snapshot(step_index: int) -> None:
        if step_index in snap_lookup:
            snapshots.append((snap_lookup[step_index], DensityField(rho.copy(), grid)))

    min_value = float(rho.min())
    max_value = float(rho.max())
    sample(0)
    snapshot(0)
    for k in range(1, steps + 1):
        if explicit is not None:
            explicit.step(rho, dt)
        else:
            try:
                rho = implicit.step(rho, dt)
            except StepFailureError as err:
                raise StepFailureError(
                    f"implicit step failed at t={k * dt:.6g}: {err}",
                    residual=err.residual,
                    time=k * dt,
                ) from err
        lo = float(rho.min())
        hi = float(rho.max())
        min_value = lo if lo < min_value else min_value
        max_value = hi if hi > max_value else max_value
        snapshot(k)
        if k % config.observe_every == 0 or k == steps:
            sample(k)
    if not math.isfinite(min_value) or not math.isfinite(max_value):
        raise DivergenceError("non-finite values during the run")

    def sealed(seq) -> FloatArray:
        arr = np.asarray(seq, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    return Trajectory(
        times=sealed(times),
        entropy=sealed(ent),
        mass=sealed(mass_tz),
        node_mass=sealed(mass_na),
        l1=sealed(l1s),
        residual=sealed(resid),
        outflow_density=sealed(outflow),
        snapshots=tuple(snapshots),
        sampled_fields=tuple(sampled_fields),
        final=DensityField(rho.copy(), grid),
        reference=reference,
        entropy_kind=kind,
        min_value=min_value,
        max_value=max_value,
        steps=steps,
        dt=dt,
    )
