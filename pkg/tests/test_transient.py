import math

import numpy as np
import pytest

from fokker_flux import (
    DensityField,
    DivergenceError,
    InitialSpec,
    InvalidInitialError,
    InvalidModelError,
    ModelSpec,
    NewtonConfig,
    PotentialSpec,
    SolverConfig,
    StabilityError,
    build_grid,
    build_initial,
    cfl_max_dt,
    entropy,
    face_flux,
    flux_field,
    residual_stationary,
    run_transient,
    stationary_closed,
    stationary_numeric,
    step_explicit,
    step_implicit_entropy,
    trapezoid,
)

LINEAR = PotentialSpec("linear")
ZERO = PotentialSpec("zero")
MODEL_A = ModelSpec("A", 1.0, 0.9, LINEAR)
MODEL_B = ModelSpec("B", 1.0, 0.9, LINEAR)
MODEL_C = ModelSpec("C", 1.0, 0.9, LINEAR)


def constant_field(grid, c):
    return DensityField(np.full(grid.n, c), grid)


# ---------------------------------------------------------------- face flux

def test_face_flux_constant_density_drift_only():
    g = build_grid(50)
    f = constant_field(g, 0.7)
    for i in (0, 10, 48):
        assert face_flux(f, MODEL_A, i) == pytest.approx(0.7)


def test_face_flux_zero_potential():
    g = build_grid(50)
    f = constant_field(g, 0.7)
    m = ModelSpec("A", 1.0, 1.0, ZERO)
    assert face_flux(f, m, 5) == 0.0


def test_face_flux_crowded_mobility():
    g = build_grid(50)
    f = constant_field(g, 0.25)
    assert face_flux(f, MODEL_C, 3) == pytest.approx(0.25 * 0.75)


def test_face_flux_on_stationary_profile_is_influx_rate():
    # the steady flux is exactly alpha; the discrete face value differs by
    # a second-order truncation term, checked by grid refinement
    worst = []
    for n in (100, 200):
        g = build_grid(n)
        sol = stationary_closed(MODEL_A, g)
        ff = flux_field(sol.field, MODEL_A)
        worst.append(np.max(np.abs(ff.values[1:-1] - 1.0)))
    assert worst[0] < 25 * (1.0 / 99) ** 2
    assert 3.5 < worst[0] / worst[1] < 4.5


def test_face_flux_index_bounds():
    g = build_grid(10)
    f = constant_field(g, 1.0)
    with pytest.raises(IndexError):
        face_flux(f, MODEL_A, 9)
    with pytest.raises(IndexError):
        face_flux(f, MODEL_A, -1)


def test_flux_field_boundary_faces():
    g = build_grid(20)
    f = constant_field(g, 0.5)
    ff = flux_field(f, MODEL_A)
    assert ff.values[0] == MODEL_A.alpha
    assert ff.values[-1] == MODEL_A.beta * 0.5
    for m in (MODEL_B, MODEL_C):
        ffm = flux_field(f, m)
        assert ffm.values[0] == 0.0 and ffm.values[-1] == 0.0


# ------------------------------------------------------------------- CFL

def test_cfl_zero_potential():
    g = build_grid(200)
    m = ModelSpec("A", 1.0, 1.0, ZERO)
    assert cfl_max_dt(m, g) == pytest.approx(g.dx**2 / 2.0)
    assert cfl_max_dt(m, g) == pytest.approx(1.263e-5, rel=1e-3)


def test_cfl_linear_potential_and_reference_step():
    g = build_grid(200)
    bound = cfl_max_dt(MODEL_A, g)
    assert bound == pytest.approx(g.dx**2 / (2.0 + g.dx))
    assert 5e-6 < bound  # the reference time step passes the check


def test_cfl_empirical_no_blowup_at_half_bound():
    g = build_grid(60)
    m = ModelSpec("A", 1.0, 1.0, ZERO)
    init = build_initial(InitialSpec("affine", a=-0.1, b=1.2), g, m)
    cfg = SolverConfig(dt=0.5 * cfl_max_dt(m, g), t_end=0.05, observe_every=50)
    traj = run_transient(m, init, cfg)
    assert np.all(np.isfinite(traj.final.values))
    assert traj.max_value < 10.0


# ----------------------------------------------------------- explicit step

def test_step_explicit_rejects_unstable_dt():
    g = build_grid(100)
    f = constant_field(g, 1.0)
    with pytest.raises(StabilityError):
        step_explicit(f, MODEL_A, 1e-3)


def test_step_explicit_fixed_point_model_B():
    g = build_grid(200)
    sol = stationary_closed(MODEL_B, g)
    dt = 5e-6
    out = step_explicit(sol.field, MODEL_B, dt)
    dev = np.abs(out.values - sol.field.values)
    # interior truncation is O(dx^2); the half-cell boundary rows are O(dx)
    assert dev[1:-1].max() < dt * g.dx**2
    assert dev.max() < dt * g.dx


def test_step_explicit_divergence_detected():
    g = build_grid(10)
    bad = DensityField(np.array([1.0] * 9 + [np.inf]), g)
    with np.errstate(invalid="ignore", over="ignore"), pytest.raises(DivergenceError):
        step_explicit(bad, MODEL_A, 1e-5)


def test_discrete_mass_balance_per_step():
    # trapezoid mass obeys M' - M = dt (alpha - beta rho(1)) exactly
    g = build_grid(200)
    m = MODEL_A
    f = build_initial(InitialSpec("affine", a=-0.1, b=1.2), g, m)
    dt = 5e-6
    state = f
    worst = 0.0
    for _ in range(400):
        m_before = trapezoid(state.values, g.dx)
        out_density = state.values[-1]
        state = step_explicit(state, m, dt)
        m_after = trapezoid(state.values, g.dx)
        gap = abs((m_after - m_before) - dt * (m.alpha - m.beta * out_density))
        worst = max(worst, gap)
    assert worst < 1e-12


def test_positivity_preserved_for_linear_models():
    g = build_grid(200)
    m = MODEL_A
    f = build_initial(InitialSpec("mass2"), g, m)  # touches zero
    cfg = SolverConfig(dt=1e-5, t_end=0.02, observe_every=500)
    traj = run_transient(m, f, cfg)
    assert traj.min_value >= -1e-12


def test_box_preserved_for_crowded_model():
    g = build_grid(200)
    f = build_initial(InitialSpec("parabola"), g, MODEL_C)
    cfg = SolverConfig(dt=1e-5, t_end=0.05, observe_every=1000)
    traj = run_transient(MODEL_C, f, cfg)
    assert traj.min_value >= -1e-12
    assert traj.max_value <= 1.0 + 1e-12


# ----------------------------------------------------------- implicit step

def test_implicit_step_fixed_point():
    g = build_grid(200)
    sol = stationary_closed(MODEL_C, g)
    out = step_implicit_entropy(sol.field, MODEL_C, 1e-3)
    assert np.max(np.abs(out.values - sol.field.values)) < 1e-10


def test_implicit_step_stays_in_open_box():
    g = build_grid(100)
    rng = np.random.default_rng(3)
    vals = np.clip(rng.uniform(0.02, 0.98, g.n), 0.02, 0.98)
    out = step_implicit_entropy(DensityField(vals, g), MODEL_C, 5e-3)
    assert out.values.min() > 0.0 and out.values.max() < 1.0


def test_implicit_step_requires_open_box():
    g = build_grid(10)
    with pytest.raises(InvalidInitialError):
        step_implicit_entropy(constant_field(g, 1.0), MODEL_C, 1e-3)


def test_implicit_step_rejects_linear_models():
    g = build_grid(10)
    with pytest.raises(InvalidModelError):
        step_implicit_entropy(constant_field(g, 0.5), MODEL_B, 1e-3)


def test_implicit_entropy_dissipation_per_step():
    # discrete analogue of the entropy inequality: E(new) + dt D <= E(old)
    # with D the flux dissipation plus the sign-definite reaction part
    g = build_grid(200)
    ref = stationary_closed(MODEL_C, g)
    f = build_initial(InitialSpec("parabola"), g, MODEL_C)
    state = DensityField(np.clip(f.values, 0.01, 0.99), g)
    dt = 1e-3
    u_inf = math.log(MODEL_C.alpha / MODEL_C.beta)
    vol = np.full(g.n, g.dx)
    vol[0] = vol[-1] = 0.5 * g.dx
    e_prev = entropy("two-species", state, ref.field)
    for _ in range(25):
        state = step_implicit_entropy(state, MODEL_C, dt, NewtonConfig())
        e_new = entropy("two-species", state, ref.field)
        r = state.values
        u = np.log(r / (1.0 - r)) - g.nodes
        mean = 0.5 * (r[:-1] + r[1:])
        du = u[1:] - u[:-1]
        flux_part = float(np.sum(mean * (1.0 - mean) * du * du / g.dx))
        react_part = float(
            np.sum(vol * (u - u_inf) * (MODEL_C.beta * r * np.exp(-g.nodes) - MODEL_C.alpha * (1.0 - r)))
        )
        assert flux_part >= 0.0 and react_part >= -1e-12
        assert e_new <= e_prev + 1e-12
        assert e_new + dt * (flux_part + react_part) <= e_prev + 1e-10
        e_prev = e_new


# ------------------------------------------------------------ run_transient

def test_run_zero_time_returns_initial_only():
    g = build_grid(50)
    f = build_initial(InitialSpec("affine"), g, MODEL_A)
    traj = run_transient(MODEL_A, f, SolverConfig(dt=1e-5, t_end=0.0))
    assert traj.times.size == 1 and traj.times[0] == 0.0
    assert np.array_equal(traj.final.values, f.values)


def test_run_rejects_unstable_dt():
    g = build_grid(50)
    f = build_initial(InitialSpec("affine"), g, MODEL_A)
    with pytest.raises(StabilityError):
        run_transient(MODEL_A, f, SolverConfig(dt=1e-2, t_end=0.1))


def test_run_mass_balance_telescopes_across_samples():
    g = build_grid(100)
    f = build_initial(InitialSpec("affine", a=-0.1, b=1.2), g, MODEL_A)
    cfg = SolverConfig(dt=2e-5, t_end=0.002, observe_every=1)
    traj = run_transient(MODEL_A, f, cfg)
    gaps = np.diff(traj.mass) - cfg.dt * (
        MODEL_A.alpha - MODEL_A.beta * traj.outflow_density[:-1]
    )
    assert np.max(np.abs(gaps)) < 1e-12


def test_run_observer_layout_and_snapshots():
    g = build_grid(50)
    f = build_initial(InitialSpec("affine"), g, MODEL_A)
    cfg = SolverConfig(dt=1e-5, t_end=0.001, observe_every=20)
    traj = run_transient(MODEL_A, f, cfg, snapshot_times=[0.0, 0.0005, 0.001])
    assert np.all(np.diff(traj.times) > 0.0)
    assert traj.times.size == 6  # steps 0, 20, 40, 60, 80, 100
    assert [t for t, _ in traj.snapshots] == [0.0, 0.0005, 0.001]
    assert traj.entropy.size == traj.mass.size == traj.times.size


def test_run_snapshot_beyond_end_rejected():
    from fokker_flux import ConfigError

    g = build_grid(50)
    f = build_initial(InitialSpec("affine"), g, MODEL_A)
    with pytest.raises(ConfigError):
        run_transient(MODEL_A, f, SolverConfig(dt=1e-5, t_end=0.001), snapshot_times=[0.01])


def test_solver_config_validation():
    from fokker_flux import ConfigError

    with pytest.raises(ConfigError):
        SolverConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ConfigError):
        SolverConfig(dt=1e-5, t_end=-1.0)
    with pytest.raises(ConfigError):
        SolverConfig(dt=1e-5, t_end=1.0, observe_every=0)
    with pytest.raises(ConfigError):
        SolverConfig(dt=1e-5, t_end=1.0, scheme="magic")


def test_positivity_and_box_at_exact_stability_bound():
    # the invariants are stated for every dt up to the bound itself
    g = build_grid(200)
    f = build_initial(InitialSpec("mass2"), g, MODEL_A)
    traj = run_transient(
        MODEL_A, f, SolverConfig(dt=cfl_max_dt(MODEL_A, g), t_end=0.05, observe_every=1000)
    )
    assert traj.min_value >= -1e-12
    fc = build_initial(InitialSpec("parabola"), g, MODEL_C)
    trajc = run_transient(
        MODEL_C, fc, SolverConfig(dt=cfl_max_dt(MODEL_C, g), t_end=0.05, observe_every=1000)
    )
    assert trajc.min_value >= -1e-12 and trajc.max_value <= 1.0 + 1e-12


def test_run_keep_fields():
    g = build_grid(50)
    f = build_initial(InitialSpec("affine"), g, MODEL_A)
    cfg = SolverConfig(dt=1e-5, t_end=0.0005, observe_every=10)
    traj = run_transient(MODEL_A, f, cfg, keep_fields=True)
    assert len(traj.sampled_fields) == traj.times.size


def test_implicit_run_matches_stationary_long_time():
    g = build_grid(100)
    f = build_initial(InitialSpec("parabola"), g, MODEL_C)
    cfg = SolverConfig(dt=0.02, t_end=12.0, observe_every=10, scheme="implicit-entropy")
    traj = run_transient(MODEL_C, f, cfg)
    ref = stationary_closed(MODEL_C, g)
    assert np.max(np.abs(traj.final.values - ref.field.values)) < 5e-4
    assert np.all(np.diff(traj.entropy) <= 1e-12)


def test_implicit_run_failure_carries_time():
    from fokker_flux import StepFailureError

    g = build_grid(60)
    f = build_initial(InitialSpec("parabola"), g, MODEL_C)
    cfg = SolverConfig(
        dt=5.0, t_end=10.0, scheme="implicit-entropy",
        newton=NewtonConfig(max_iter=1, tolerance=1e-14, max_backtracks=1),
    )
    with pytest.raises(StepFailureError) as excinfo:
        run_transient(MODEL_C, f, cfg)
    assert excinfo.value.time == pytest.approx(5.0)
    assert excinfo.value.residual > 0.0


def test_residual_stationary_of_numeric_solution():
    g = build_grid(200)
    sol = stationary_numeric(MODEL_A, g)
    assert residual_stationary(sol.field, MODEL_A) < 1e-10


def test_transient_order_of_accuracy():
    # doubling n and quartering dt cuts the sup error against the closed
    # form by about 4 at a fixed time
    errs = []
    for n, dt in ((50, 1e-4), (100, 2.5e-5)):
        g = build_grid(n)
        closed = stationary_closed(MODEL_A, g)
        init = DensityField(closed.field.values.copy(), g)
        cfg = SolverConfig(dt=dt, t_end=2.0, observe_every=10**9)
        traj = run_transient(MODEL_A, init, cfg, reference=closed)
        errs.append(np.max(np.abs(traj.final.values - closed.field.values)))
    assert 3.5 < errs[0] / errs[1] < 4.5
