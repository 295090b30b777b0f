"""
Integration tests for the effham command line.

Tests:
- Every subcommand end to end on small inputs
- Exit codes (0 ok, 1 domain error with JSON diagnostics, 2 usage)
- Structured logging through the group options
"""

import io
import json
import logging

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from conftest import angle_distance
from effham.cli import cli, run
from effham.config import get_settings, use_settings
from effham.models import LindbladModel
from effham.utils.data_loader import DataLoader

EXCITED = np.diag([1.0, 0.0]).astype(complex)
LOWERING = np.array([[0, 0], [1, 0]], dtype=complex)


def json_lines(text: str):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def diagnostic(text: str) -> dict:
    return next(rec for rec in json_lines(text) if "error" in rec)


@pytest.fixture(autouse=True)
def isolated_run(tmp_path, monkeypatch):
    """Run from an empty directory and restore logging and settings afterwards."""
    monkeypatch.chdir(tmp_path)
    with use_settings(get_settings()):
        yield
    logger = logging.getLogger("effham")
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def loader(tmp_path) -> DataLoader:
    return DataLoader(base_dir=tmp_path)


@pytest.fixture
def decay_files(loader):
    """Amplitude damping at rate 0.5 starting in the excited level."""
    model = LindbladModel(hamiltonian=np.zeros((2, 2)), lindblad_ops=(np.sqrt(0.5) * LOWERING,))
    loader.save_model(model, "model.json")
    loader.save_state(EXCITED, "rho0.json")
    return "model.json", "rho0.json"


@pytest.mark.integration
class TestTwoBandCommand:
    """Tests for ``effham two-band``."""

    def test_closed_form_to_stdout(self, runner):
        result = runner.invoke(cli, ["two-band", "--gamma1", "1", "--gamma2", "1", "--t1", "2", "--steps", "4"])
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(io.StringIO(result.output))
        assert len(frame) == 5
        expected = (1 + np.exp(-2 * frame["t"])) / 2
        assert np.allclose(frame["rho1_ee"], expected, atol=1e-14)
        assert np.allclose(frame["trace"], 1.0, atol=1e-14)

    def test_numeric_matches_closed_form(self, runner, tmp_path):
        args = ["two-band", "--gamma1", "0.7", "--gamma2", "1.9", "--t1", "3", "--initial-upper", "0.4",
                "--initial-band", "upper"]
        assert runner.invoke(cli, args + ["--out", "exact.csv"]).exit_code == 0
        assert runner.invoke(cli, args + ["--numeric", "--out", "numeric.csv"]).exit_code == 0
        exact = pd.read_csv(tmp_path / "exact.csv")
        numeric = pd.read_csv(tmp_path / "numeric.csv")
        assert list(exact.columns) == list(numeric.columns)
        assert np.max(np.abs(exact.to_numpy() - numeric.to_numpy())) <= 1e-10

    def test_rates_validated(self, runner):
        result = runner.invoke(cli, ["two-band", "--gamma1", "0", "--gamma2", "1", "--t1", "1"])
        assert result.exit_code == 1
        assert diagnostic(result.output)["field"] == "gamma1"

    def test_missing_end_time_is_usage_error(self, runner):
        result = runner.invoke(cli, ["two-band", "--gamma1", "1", "--gamma2", "1"])
        assert result.exit_code == 2


@pytest.mark.integration
class TestMarkovianCommands:
    """Tests for solve, steady, damping-basis and ddfs-check."""

    def test_solve_writes_csv(self, runner, tmp_path, decay_files):
        model, rho0 = decay_files
        result = runner.invoke(cli, ["solve", "--model", model, "--initial", rho0, "--t1", "4", "--steps", "8",
                                     "--out", "traj.csv"])
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(tmp_path / "traj.csv")
        assert frame["t"].iloc[-1] == 4.0
        assert np.allclose(frame["re_00"], np.exp(-0.5 * frame["t"]), atol=1e-10)
        assert np.allclose(frame["re_00"] + frame["re_11"], 1.0, atol=1e-10)

    def test_end_before_start(self, runner, decay_files):
        model, rho0 = decay_files
        result = runner.invoke(cli, ["solve", "--model", model, "--initial", rho0, "--t0", "2", "--t1", "1"])
        assert result.exit_code == 1
        assert diagnostic(result.output) == {
            "error": "PRECONDITION",
            "message": "t1 (1.0) must not precede t0 (2.0)",
            "field": "t1",
        }

    def test_malformed_model_file(self, runner, tmp_path, decay_files):
        _, rho0 = decay_files
        (tmp_path / "bad.json").write_text('{"dim": 2, "hamiltonian": []}', encoding="utf-8")
        result = runner.invoke(cli, ["solve", "--model", "bad.json", "--initial", rho0, "--t1", "1"])
        assert result.exit_code == 1
        assert diagnostic(result.output)["error"] == "MODEL_FILE"

    def test_steady_state(self, runner, decay_files):
        result = runner.invoke(cli, ["steady", "--model", decay_files[0]])
        assert result.exit_code == 0, result.output
        (state,) = json.loads(result.output)["steady_states"]
        assert not state["traceless"]
        assert np.allclose(np.array(state["matrix"])[..., 0], np.diag([0.0, 1.0]), atol=1e-10)

    def test_damping_basis(self, runner, tmp_path, decay_files):
        result = runner.invoke(cli, ["damping-basis", "--model", decay_files[0], "--out", "basis.json"])
        assert result.exit_code == 0, result.output
        payload = json.loads((tmp_path / "basis.json").read_text(encoding="utf-8"))
        rates = sorted(round(re, 9) for re, _ in payload["eigenvalues"])
        assert rates == [-0.5, -0.25, -0.25, 0.0]

    def test_exactly_one_model_required(self, runner, decay_files):
        result = runner.invoke(cli, ["damping-basis"])
        assert result.exit_code == 2

    def test_ddfs_check(self, runner, loader, decay_files):
        loader.write_json({"basis": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]]}, "basis.json")
        result = runner.invoke(cli, ["ddfs-check", "--model", decay_files[0], "--basis", "basis.json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["verdict"] is False


@pytest.mark.integration
class TestGeometricPhaseCommand:
    """Tests for ``effham geom-phase``."""

    @pytest.fixture
    def spin_files(self, loader, precessing_spin):
        gen, resolver = precessing_spin(np.pi / 3, steps=400)
        loader.save_generator(gen, "gen.json")
        loader.save_generator(resolver, "resolver.json")
        return "gen.json", "resolver.json"

    def test_adiabatic_tracks(self, runner, tmp_path, spin_files):
        result = runner.invoke(cli, ["geom-phase", "--generator", spin_files[0], "--out", "phases.json"])
        assert result.exit_code == 0, result.output
        payload = json.loads((tmp_path / "phases.json").read_text(encoding="utf-8"))
        assert payload["mode"] == "adiabatic"
        phases = payload["phases"]
        assert [p["track"] for p in phases] == [0, 1, 2, 3]
        assert phases[1]["error"] == "DEGENERATE_TRACK"
        assert angle_distance(phases[0]["geometric"], -np.pi) < 1e-2

    def test_resolver_splits_population_tracks(self, runner, spin_files):
        gen, resolver = spin_files
        result = runner.invoke(cli, ["geom-phase", "--generator", gen, "--resolver", resolver, "--track", "1",
                                     "--track", "2"])
        assert result.exit_code == 0, result.output
        phases = json.loads(result.output)["phases"]
        assert len(phases) == 2
        assert all(angle_distance(p["geometric"], 0.0) < 1e-2 for p in phases)

    def test_explicit_track_errors_are_fatal(self, runner, spin_files):
        result = runner.invoke(cli, ["geom-phase", "--generator", spin_files[0], "--mode", "cyclic", "--track", "0"])
        assert result.exit_code == 1
        assert diagnostic(result.output)["error"] == "STEP_TOO_COARSE"


@pytest.mark.integration
class TestScanCommand:
    """Tests for ``effham scan``."""

    def test_csv_and_heatmaps(self, runner, loader, tmp_path):
        loader.write_json({"gamma1_T": [0.5, 1.5], "dgamma1_T": [0.0, 1.0], "dgamma2_T": 0.0, "steps": 100},
                          "scan.json")
        result = runner.invoke(cli, ["scan", "--config", "scan.json", "--out", "grid.csv", "--svg", "gamma.svg",
                                     "--svg-fidelity", "fid.svg"])
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(tmp_path / "grid.csv")
        assert list(frame.columns) == ["gamma1_T", "dgamma1_T", "Gamma", "one_minus_F"]
        assert frame["Gamma"].tolist()[0::2] == [0.0, 0.0]
        assert "<svg" in (tmp_path / "gamma.svg").read_text(encoding="utf-8")
        assert (tmp_path / "fid.svg").exists()

    def test_empty_axis(self, runner, loader):
        loader.write_json({"gamma1_T": [], "dgamma1_T": [1.0]}, "scan.json")
        result = runner.invoke(cli, ["scan", "--config", "scan.json"])
        assert result.exit_code == 1
        assert diagnostic(result.output)["error"] == "EMPTY_GRID"


@pytest.mark.integration
class TestGroupOptions:
    """Tests for configuration and logging options."""

    def test_default_config_file_is_validated(self, runner, tmp_path):
        (tmp_path / "config").mkdir()
        (tmp_path / "config" / "effham.json").write_text('{"tol_eig": -1}', encoding="utf-8")
        result = runner.invoke(cli, ["two-band", "--gamma1", "1", "--gamma2", "1", "--t1", "1"])
        assert result.exit_code == 1
        assert diagnostic(result.output)["field"] == "tol_eig"

    def test_missing_config_file(self, runner):
        result = runner.invoke(cli, ["--config", "nowhere.json", "two-band", "--gamma1", "1", "--gamma2", "1",
                                     "--t1", "1"])
        assert result.exit_code == 1
        assert diagnostic(result.output)["field"] == "config"

    def test_json_logs_share_correlation_id(self, runner, decay_files):
        model, rho0 = decay_files
        result = runner.invoke(cli, ["--log-level", "INFO", "--log-json", "solve", "--model", model,
                                     "--initial", rho0, "--t1", "1", "--out", "traj.csv"])
        assert result.exit_code == 0, result.output
        records = [rec for rec in json_lines(result.output) if "level" in rec]
        timed = [rec for rec in records if rec["message"].startswith("Completed trajectory")]
        assert len(timed) == 1 and timed[0]["elapsed_ms"] >= 0.0
        assert len({rec["correlation_id"] for rec in records}) == 1


@pytest.mark.integration
class TestRun:
    """Tests for the ``run`` entry point."""

    def test_exit_codes(self, capsys):
        assert run(["two-band", "--gamma1", "1", "--gamma2", "2", "--t1", "1", "--steps", "2"]) == 0
        assert "rho1_ee" in capsys.readouterr().out
        assert run(["two-band", "--gamma1", "1"]) == 2
        assert run(["two-band", "--gamma1", "-1", "--gamma2", "1", "--t1", "1"]) == 1
        assert '"error": "MODEL_INVARIANT"' in capsys.readouterr().err
