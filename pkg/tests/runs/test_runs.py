"""
Tests for run files, the run engine, the runs API and the command line.
"""

import asyncio
import json

import pytest

import run as cli
from src.runs.config_loader import config_hash, load_run_config, prepare_run
from src.runs.engine import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, RunEngine
from src.shared.errors import ConfigError
from src.shared.schemas.runs import RunStatus


@pytest.fixture
def runs_dir(fixtures_dir):
    return fixtures_dir / "runs"


def execute(command, config_path, out, **kwargs):
    return asyncio.run(RunEngine().start_run(command, config_path, out=out, **kwargs))


def test_run_file_resolves_the_system_next_to_it(runs_dir):
    config = load_run_config(runs_dir / "scalar_entropy.run")
    assert config.system == runs_dir / ".." / "systems" / "scalar_a1.cfg"
    assert config.seed == 7 and config.workers == 1
    assert config.entropy.points_per_axis == 401
    assert config.spanning.switch_step == 0.5
    assert config.search.horizon == 20


def test_config_hash_is_stable_and_covers_the_system(runs_dir):
    path = runs_dir / "scalar_integrate.run"
    system = runs_dir / ".." / "systems" / "scalar_a1.cfg"
    assert config_hash(path, system) == config_hash(path, system)
    assert config_hash(path, system) != config_hash(path)


def test_prepare_run_rejects_unknown_commands_and_missing_sections(runs_dir, tmp_path):
    with pytest.raises(ConfigError):
        prepare_run("fly", runs_dir / "scalar_integrate.run")
    with pytest.raises(ConfigError, match="cocycle"):
        prepare_run("cocycle", runs_dir / "scalar_integrate.run")
    prepared = prepare_run("morse", runs_dir / "scalar_integrate.run", out=tmp_path)
    assert prepared.out_dir == tmp_path and prepared.config.morse is None


def test_prepare_run_reports_bad_keys_with_the_path(tmp_path, fixtures_dir):
    path = tmp_path / "bad.run"
    path.write_text(f"system = {fixtures_dir / 'systems' / 'scalar_a1.cfg'}\nintegrate.tau = -1\nintegrate.x0 = 0\n")
    with pytest.raises(ConfigError, match="bad.run"):
        prepare_run("integrate", path)


def test_integrate_run_writes_trajectory_and_manifest(runs_dir, tmp_path):
    outcome = execute("integrate", runs_dir / "scalar_integrate.run", tmp_path)
    assert outcome.exit_code == EXIT_OK and outcome.status == RunStatus.COMPLETED
    assert outcome.artifacts == ["trajectory.csv"]
    assert (tmp_path / "trajectory.csv").is_file()
    manifest = json.loads(outcome.manifest_path.read_text())
    assert manifest["command"] == "integrate"
    assert manifest["exit_code"] == 0 and manifest["status"] == "completed"
    assert manifest["artifacts"] == ["trajectory.csv"]
    assert len(manifest["config_hash"]) == 64
    assert "numpy" in manifest["versions"]
    assert outcome.summary["initial_state"] == [0.5]


def test_reruns_produce_identical_artifacts(runs_dir, tmp_path):
    first = execute("cocycle", runs_dir / "scalar_cocycle.run", tmp_path / "a")
    second = execute("cocycle", runs_dir / "scalar_cocycle.run", tmp_path / "b")
    assert first.artifacts == second.artifacts == ["alpha.csv", "det.csv"]
    for name in first.artifacts:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cocycle_run_on_the_scalar_system(runs_dir, tmp_path):
    summary = execute("cocycle", runs_dir / "scalar_cocycle.run", tmp_path).summary
    assert summary["alpha"] == pytest.approx(2.0, abs=1e-6)
    assert summary["log_det"] == pytest.approx(2.0, abs=1e-6)


def test_floquet_run_on_a_periodic_orbit(runs_dir, tmp_path):
    outcome = execute("floquet", runs_dir / "scalar_floquet.run", tmp_path)
    assert outcome.exit_code == EXIT_OK
    assert outcome.summary["positive_sum"] == pytest.approx(1.0, abs=1e-6)
    assert outcome.summary["defect"] <= 1e-8
    assert (tmp_path / "floquet.json").is_file()


def test_floquet_run_without_newton_needs_a_closed_orbit(fixtures_dir, tmp_path):
    path = tmp_path / "open.run"
    path.write_text(f"system = {fixtures_dir / 'systems' / 'scalar_a1.cfg'}\n"
                    "floquet.x0 = 0.3\nfloquet.control = 0.5; -0.5\nfloquet.newton = false\n")
    outcome = execute("floquet", path, tmp_path / "out")
    assert outcome.exit_code == EXIT_NUMERICAL
    assert outcome.error["type"] == "ClosureError"
    assert outcome.error["details"]["defect"] > 1e-8


def test_gramian_run_on_the_double_integrator(runs_dir, tmp_path):
    outcome = execute("gramian", runs_dir / "double_integrator_gramian.run", tmp_path)
    assert outcome.summary == {"rank": 2, "regular": True}


def test_splitting_run_on_the_hyperbolic_equilibrium(runs_dir, tmp_path):
    outcome = execute("splitting", runs_dir / "diag_splitting.run", tmp_path)
    assert outcome.exit_code == EXIT_OK
    assert outcome.summary["dims"] == [1, 1]
    assert outcome.summary["hyperbolic"] is True
    assert set(outcome.artifacts) == {"splitting.csv", "hyperbolicity.json"}


def test_chainsets_run_finds_one_control_set(runs_dir, tmp_path):
    outcome = execute("chainsets", runs_dir / "scalar_chainsets.run", tmp_path)
    assert outcome.summary["sets"] == 1
    report = json.loads((tmp_path / "chainsets.json").read_text())
    assert report["sets"][0]["lo"][0] <= -0.9 and report["sets"][0]["hi"][0] >= 0.9


def test_shadow_run_on_a_chain_file(runs_dir, tmp_path):
    outcome = execute("shadow", runs_dir / "shadow_chain.run", tmp_path)
    assert outcome.exit_code == EXIT_OK
    assert outcome.summary["within_bound"] is True
    assert (tmp_path / "shadow.csv").read_text().startswith("step,deviation,bound,eta_1")


def test_morse_run_on_the_coordinate_cocycle(runs_dir, tmp_path):
    summary = execute("morse", runs_dir / "scalar_morse.run", tmp_path).summary
    assert summary["periodic_minimum"] == pytest.approx(-1.0)
    assert -1.05 <= summary["lower"] <= summary["upper"] <= 1.05
    assert (tmp_path / "spectrum.csv").read_text().splitlines()[0] == "eps,lower,upper,chains"
    levels = json.loads((tmp_path / "spectrum.json").read_text())["levels"]
    assert all(level["lower_witness"]["value"] == level["lower"] for level in levels)
    assert all(level["upper_witness"]["value"] == level["upper"] for level in levels)


def test_missing_system_is_a_configuration_error(runs_dir, tmp_path):
    outcome = execute("entropy", runs_dir / "missing_system.run", tmp_path)
    assert outcome.exit_code == EXIT_CONFIG and outcome.status == RunStatus.FAILED
    error = json.loads((tmp_path / "error.json").read_text())
    assert error["type"] == "ConfigError"
    assert "does_not_exist.cfg" in error["message"]
    assert json.loads(outcome.manifest_path.read_text())["exit_code"] == 1


def test_blow_up_is_a_numerical_failure(runs_dir, tmp_path):
    outcome = execute("integrate", runs_dir / "blowup_integrate.run", tmp_path)
    assert outcome.exit_code == EXIT_NUMERICAL
    assert outcome.error["type"] == "BlowUpError"
    assert "time" in outcome.error["details"]
    assert "error.json" in outcome.artifacts


def test_unknown_command_exits_with_one(runs_dir, tmp_path):
    outcome = execute("fly", runs_dir / "scalar_integrate.run", tmp_path)
    assert outcome.exit_code == EXIT_CONFIG


def test_recorded_run_requires_a_session():
    with pytest.raises(ValueError):
        asyncio.run(RunEngine().execute_recorded(1))


def test_recorded_run_logs_its_steps(db_session, runs_dir, tmp_path):
    from src.runs.crud import get_run, get_run_logs

    outcome = asyncio.run(RunEngine(db_session).start_run("integrate", runs_dir / "scalar_integrate.run",
                                                          out=tmp_path))
    record = get_run(db_session, outcome.run_id)
    assert record.status == "completed" and record.exit_code == 0
    assert record.artifacts == ["trajectory.csv"]
    assert [log.action for log in get_run_logs(db_session, outcome.run_id)] == ["configured", "completed"]


def test_api_executes_a_run(client, runs_dir, tmp_path):
    response = client.post("/runs/", json={
        "command": "integrate",
        "config_path": str(runs_dir / "scalar_integrate.run"),
        "out": str(tmp_path),
    })
    assert response.status_code == 201
    data = response.json()
    assert data["status"] == "completed"
    assert data["artifacts"] == ["trajectory.csv"]

    logs = client.get(f"/runs/{data['id']}/logs")
    assert logs.status_code == 200
    assert [entry["action"] for entry in logs.json()] == ["configured", "completed"]

    listing = client.get("/runs/")
    assert listing.json()["total"] == 1


def test_api_reports_configuration_failures(client, runs_dir, tmp_path):
    response = client.post("/runs/", json={
        "command": "entropy",
        "config_path": str(runs_dir / "missing_system.run"),
        "out": str(tmp_path),
    })
    assert response.status_code == 422
    detail = response.json()["detail"]
    assert detail["type"] == "ConfigError" and "run_id" in detail

    record = client.get(f"/runs/{detail['run_id']}").json()
    assert record["status"] == "failed" and record["exit_code"] == 1


def test_api_rejects_unknown_commands(client, runs_dir):
    response = client.post("/runs/", json={"command": "fly", "config_path": str(runs_dir / "scalar_integrate.run")})
    assert response.status_code == 422


def test_api_queues_runs(client, runs_dir, tmp_path):
    response = client.post("/runs/", json={
        "command": "integrate",
        "config_path": str(runs_dir / "scalar_integrate.run"),
        "out": str(tmp_path),
        "queue": True,
    })
    assert response.status_code == 202
    assert response.json()["command"] == "integrate"


def test_api_missing_run(client):
    assert client.get("/runs/999").status_code == 404
    assert client.get("/runs/999/logs").status_code == 404


def test_cli_runs_a_command(runs_dir, tmp_path, capsys):
    code = cli.main(["integrate", "--config", str(runs_dir / "scalar_integrate.run"), "--out", str(tmp_path)])
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["artifacts"] == ["trajectory.csv"]


def test_cli_argument_errors(runs_dir, capsys):
    assert cli.main(["integrate"]) == 1
    assert cli.main(["integrate", "--config", str(runs_dir / "scalar_integrate.run"), "--workers", "0"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_reports_failures_on_stderr(runs_dir, tmp_path, capsys):
    code = cli.main(["integrate", "--config", str(runs_dir / "blowup_integrate.run"), "--out", str(tmp_path)])
    assert code == 2
    assert capsys.readouterr().err.startswith("error: BlowUpError:")


def test_root_lists_the_commands(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "entropy" in response.json()["commands"]
    assert client.get("/health").json()["status"] == "healthy"
