import json
import math

import numpy as np
import pytest

from fokker_flux import (
    ConfigError,
    FitError,
    config_from_dict,
    execute,
    gamma_sweep,
    mass_evolution,
    preset_config,
    run,
    stationary_closed,
)
from fokker_flux.cli import main

TINY = {
    "model": "A",
    "alpha": 1.0,
    "beta": 0.9,
    "potential": "linear",
    "initial": {"kind": "affine", "a": -0.1, "b": 1.2},
    "n": 60,
    "dt": 5e-5,
    "t_end": 0.05,
    "snapshot_times": [0.0, 0.05],
    "observe_every": 100,
    "emit": ["snapshots", "entropy", "mass", "summary", "svg"],
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


# ------------------------------------------------------------ validation

def test_config_requires_model():
    with pytest.raises(ConfigError, match="model"):
        config_from_dict({"alpha": 1.0, "beta": 1.0, "t_end": 1.0})


def test_config_beta_zero_cites_assumption():
    data = dict(TINY, beta=0.0)
    with pytest.raises(ConfigError, match="beta >= beta_0 > 0"):
        config_from_dict(data)


def test_config_rejects_unknown_fields():
    with pytest.raises(ConfigError, match="unknown configuration fields"):
        config_from_dict(dict(TINY, typo=1))


def test_config_snapshot_times_within_range():
    with pytest.raises(ConfigError, match="snapshot"):
        config_from_dict(dict(TINY, snapshot_times=[1.0]))


def test_config_gamma_needs_scaled_potential():
    with pytest.raises(ConfigError, match="scaled-linear"):
        config_from_dict(dict(TINY, gamma=0.5))
    cfg = config_from_dict(dict(TINY, gamma=0.5, potential="scaled-linear"))
    assert cfg.potential_spec().slope == 0.5


def test_config_validates_initial_payload():
    with pytest.raises(ConfigError, match="tabulated initial"):
        config_from_dict(dict(TINY, initial={"kind": "tabulated"}))
    with pytest.raises(ConfigError, match="coefficient"):
        config_from_dict(dict(TINY, initial={"kind": "affine", "a": "steep"}))
    cfg = config_from_dict(dict(TINY, initial={"kind": "tabulated", "values": [1.0] * 60}))
    assert cfg.initial_spec().values.shape == (60,)


def test_config_rejects_bad_emit_and_scheme():
    with pytest.raises(ConfigError, match="emit"):
        config_from_dict(dict(TINY, emit=["plots"]))
    with pytest.raises(ConfigError, match="implicit-entropy"):
        config_from_dict(dict(TINY, scheme="implicit-entropy"))


def test_config_auto_dt_resolves_to_half_bound():
    cfg = config_from_dict(dict(TINY, dt="auto"))
    model, grid = cfg.model_spec(), cfg.grid()
    from fokker_flux import cfl_max_dt

    assert cfg.resolve_dt(model, grid) == pytest.approx(0.5 * cfl_max_dt(model, grid))


# ------------------------------------------------------------- artifacts

def test_run_writes_artifacts_and_echoes_config(tmp_path):
    cfg = config_from_dict(TINY)
    out = tmp_path / "artifacts"
    summary = run(cfg, out_dir=str(out))
    for name in ("entropy.csv", "mass.csv", "snapshots.csv", "summary.json",
                 "density.svg", "entropy.svg"):
        assert (out / name).exists(), name

    payload = json.loads((out / "summary.json").read_text())
    assert payload["config"] == TINY  # exact echo round-trip
    assert payload["steps"] == summary.steps == 1000
    assert "wall_clock" not in json.dumps(payload)
    assert payload["eigen"]["symmetric"]["rate"] == pytest.approx(
        summary.eigen["symmetric"]["rate"]
    )

    header, *rows = (out / "entropy.csv").read_text().strip().split("\n")
    assert header == "t,entropy,mass,l1,residual"
    assert len(rows) == 11  # samples at steps 0, 100, ..., 1000
    first = [float(tok) for tok in rows[0].split(",")]
    assert first[0] == 0.0 and first[2] == pytest.approx(1.15)

    snap_header = (out / "snapshots.csv").read_text().split("\n", 1)[0]
    assert snap_header == "x,rho_t=0,rho_t=0.05,rho_inf"

    import xml.etree.ElementTree as ET

    for name in ("density.svg", "entropy.svg"):
        ET.fromstring((out / name).read_text())  # well-formed XML


def test_run_is_deterministic(tmp_path):
    cfg = config_from_dict(TINY)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run(cfg, out_dir=str(out1))
    run(cfg, out_dir=str(out2))
    for name in ("entropy.csv", "mass.csv", "snapshots.csv", "summary.json",
                 "density.svg", "entropy.svg"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_csv_full_precision_roundtrip(tmp_path):
    out = tmp_path / "o"
    run(config_from_dict(TINY), out_dir=str(out))
    rows = (out / "entropy.csv").read_text().strip().split("\n")[1:]
    masses = np.array([float(r.split(",")[2]) for r in rows])
    summary = json.loads((out / "summary.json").read_text())
    assert masses[-1] == summary["final_mass"]  # 17 significant digits survive


def test_summary_schema_keys(tmp_path):
    out = tmp_path / "o"
    run(config_from_dict(TINY), out_dir=str(out))
    payload = json.loads((out / "summary.json").read_text())
    expected = {
        "config", "fitted_rate", "fit_window", "fit_r_squared", "fit_intercept",
        "predicted_rate", "predicted_rate_provenance", "final_sup_distance",
        "final_mass", "final_mass_node_average", "stationary_mass_closed",
        "stationary_mass_numeric", "eigen", "steps", "dt", "min_value", "max_value",
    }
    assert set(payload) == expected
    assert payload["predicted_rate_provenance"] == "spectral"


def test_zero_length_run_has_no_fit():
    summary, trajectory = execute(config_from_dict(dict(TINY, t_end=0.0, snapshot_times=[])))
    assert trajectory.times.size == 1
    assert summary.fitted_rate is None and summary.fit is None
    assert summary.predicted_rate > 0


def test_summary_min_max_track_iterates():
    summary, trajectory = execute(config_from_dict(TINY))
    assert summary.min_value <= np.min(trajectory.final.values)
    assert summary.max_value >= np.max(trajectory.final.values)
    assert summary.fitted_rate is None or summary.fitted_rate > 0


# ---------------------------------------------------------------- presets

def test_all_presets_produce_valid_configs():
    from fokker_flux.experiments import PRESETS

    for name in PRESETS:
        cfg = preset_config(name)
        cfg.model_spec()
        cfg.grid()
        cfg.initial_spec()


def test_preset_names_and_overrides():
    cfg = preset_config("entropy-A", {"n": 80, "dt": 5e-5, "t_end": 0.1})
    assert cfg.model == "A" and cfg.alpha == 1.0 and cfg.beta == 1.0
    with pytest.raises(ConfigError):
        preset_config("nope")


def test_evolution_A_preset_reaches_equilibrium():
    # reference experiment: n = 200, dt = 5e-6, equilibrium by t = 9
    summary, trajectory = execute(preset_config("evolution-A"))
    closed = stationary_closed(
        preset_config("evolution-A").model_spec(), trajectory.final.grid
    )
    assert summary.final_sup_distance < 1e-3
    assert np.max(np.abs(trajectory.final.values - closed.field.values)) < 1e-3
    assert [t for t, _ in trajectory.snapshots] == [0.0, 0.05, 1.5, 9.0]
    assert summary.eigen is not None


def test_implicit_scheme_through_config():
    cfg = config_from_dict({
        "model": "C", "alpha": 1.0, "beta": 0.9, "potential": "linear",
        "initial": {"kind": "parabola"},
        "n": 80, "dt": 0.01, "t_end": 4.0, "observe_every": 20,
        "scheme": "implicit-entropy",
    })
    summary, trajectory = execute(cfg)
    assert 0.0 < summary.min_value and summary.max_value < 1.0
    assert np.all(np.diff(trajectory.entropy) <= 1e-12)
    assert summary.final_sup_distance < 5e-3


def test_mass_evolution_coarse_structure(tmp_path):
    report = mass_evolution(
        "mass2",
        out_dir=str(tmp_path / "m2"),
        overrides={"n": 60, "dt": 5e-5, "t_end": 0.6, "observe_every": 100},
    )
    assert report.extremum_kind == "minimum"
    assert 0.0 < report.extremum_time < 0.6
    assert report.extremum_value < min(report.initial_mass, report.final_mass)
    payload = json.loads((tmp_path / "m2" / "summary.json").read_text())
    assert payload["mass_evolution"]["extremum_kind"] == "minimum"
    header = (tmp_path / "m2" / "mass.csv").read_text().split("\n", 1)[0]
    assert header == "t,mass,node_average_mass"


def test_mass_evolution_rejects_other_presets():
    with pytest.raises(ConfigError):
        mass_evolution("entropy-A")


# ------------------------------------------------------------------ sweep

SWEEP_BASE = {
    "model": "A",
    "alpha": 1.0,
    "beta": 1.0,
    "potential": "scaled-linear",
    "gamma": 1.0,
    "initial": {"kind": "affine", "a": -0.1, "b": 1.2},
    "n": 100,
    "dt": 2e-5,
    "t_end": 3.0,
    "observe_every": 1000,
}


def test_gamma_sweep_serial(tmp_path, monkeypatch):
    monkeypatch.setenv("FOKKER_FLUX_THREADS", "1")
    base = config_from_dict(SWEEP_BASE)
    rows = gamma_sweep(base, [1.0, 0.5, 0.0], out_dir=str(tmp_path))
    assert [r.gamma for r in rows] == [0.0, 0.5, 1.0]  # deterministic merge order
    assert rows[0].fitted_rate == pytest.approx(1.4802, rel=0.05)
    assert rows[2].fitted_rate == pytest.approx(2.33, rel=0.05)
    # empirically the slope grows with the drift scaling (recorded, not theory)
    assert rows[0].fitted_rate <= rows[1].fitted_rate <= rows[2].fitted_rate
    text = (tmp_path / "sweep.csv").read_text()
    assert text.startswith("gamma,fitted_rate,r_squared\n")
    assert len(text.strip().split("\n")) == 4


def test_gamma_sweep_parallel(tmp_path, monkeypatch):
    monkeypatch.setenv("FOKKER_FLUX_THREADS", "2")
    base = config_from_dict(dict(SWEEP_BASE, n=60, dt=5e-5, t_end=1.0, observe_every=200))
    rows = gamma_sweep(base, [0.5, 0.0], out_dir=str(tmp_path))
    assert [r.gamma for r in rows] == [0.0, 0.5]
    assert all(r.fitted_rate > 0 for r in rows)


def test_gamma_sweep_flushes_partials_on_failure(tmp_path, monkeypatch):
    monkeypatch.setenv("FOKKER_FLUX_THREADS", "1")
    # a run too short to fit: every member fails, header still flushed
    base = config_from_dict(dict(SWEEP_BASE, t_end=0.001, dt=5e-5, n=60))
    with pytest.raises(FitError):
        gamma_sweep(base, [0.0], out_dir=str(tmp_path))
    assert (tmp_path / "sweep.csv").read_text().startswith("gamma,fitted_rate")


def test_gamma_sweep_requires_model_A():
    cfg = config_from_dict(dict(SWEEP_BASE, model="B", potential="linear"))
    with pytest.raises(ConfigError):
        gamma_sweep(cfg, [0.0, 1.0])


def test_gamma_sweep_rejects_bad_values():
    base = config_from_dict(SWEEP_BASE)
    with pytest.raises(ConfigError):
        gamma_sweep(base, [])
    with pytest.raises(ConfigError):
        gamma_sweep(base, [math.nan])


def test_threads_env_validated(monkeypatch):
    monkeypatch.setenv("FOKKER_FLUX_THREADS", "zero")
    base = config_from_dict(SWEEP_BASE)
    with pytest.raises(ConfigError):
        gamma_sweep(base, [0.0])


# -------------------------------------------------------------------- CLI

def test_cli_run_success(tmp_path, capsys):
    cfg_path = write_config(tmp_path, TINY)
    code = main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "out")])
    assert code == 0
    assert (tmp_path / "out" / "summary.json").exists()
    assert "wall clock" in capsys.readouterr().out


def test_cli_invalid_config_exits_2(tmp_path, capsys):
    cfg_path = write_config(tmp_path, dict(TINY, beta=0.0))
    assert main(["run", "--config", str(cfg_path)]) == 2
    assert "beta >= beta_0 > 0" in capsys.readouterr().err


def test_cli_missing_config_exits_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2


def test_cli_io_error_exits_4(tmp_path):
    cfg_path = write_config(tmp_path, TINY)
    clash = tmp_path / "file-not-dir"
    clash.write_text("x")
    assert main(["run", "--config", str(cfg_path), "--out", str(clash)]) == 4


def test_cli_eigen(capsys):
    assert main(["eigen", "--beta", "1.0", "--weights", "0.5,0.5"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["symmetric"]["k"] == pytest.approx(0.8603, abs=1e-3)
    assert payload["friedrichs"]["rate"] == pytest.approx(1.8439, abs=2e-3)


def test_cli_eigen_bad_weights(capsys):
    assert main(["eigen", "--beta", "1.0", "--weights", "oops"]) == 2


def test_cli_preset_with_overrides(tmp_path, capsys):
    code = main([
        "preset", "entropy-A", "--out", str(tmp_path / "p"),
        "--set", "n=60", "--set", "dt=5e-5", "--set", "t_end=0.05",
        "--set", "observe_every=100",
    ])
    assert code == 0
    assert (tmp_path / "p" / "summary.json").exists()


def test_cli_preset_bad_override_exits_2(tmp_path, capsys):
    code = main(["preset", "entropy-A", "--out", str(tmp_path / "x"),
                 "--set", "n=sixty"])
    assert code == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_cli_sweep(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("FOKKER_FLUX_THREADS", "1")
    cfg_path = write_config(tmp_path, dict(SWEEP_BASE, n=60, dt=5e-5, t_end=1.0,
                                           observe_every=200))
    code = main(["sweep", "--config", str(cfg_path), "--gamma", "0,0.5",
                 "--out", str(tmp_path / "sw")])
    assert code == 0
    assert (tmp_path / "sw" / "sweep.csv").exists()
    assert "gamma=0:" in capsys.readouterr().out
