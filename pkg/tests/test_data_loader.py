"""
Unit tests for reading and writing effham files.

Tests:
- Model, state, basis and generator files
- Scan configuration files (axis specs, initial states)
- Diagnostics for malformed files
- CSV and JSON output
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from effham.config import load_config
from effham.exceptions import DimensionMismatch, ModelFileError, ModelInvariantError
from effham.models import GeneralizedLindbladModel, LindbladModel, Transition
from effham.models.common import matrix_payload
from effham.solvers.lindblad import ddfs_check, propagate
from effham.utils.data_loader import DataLoader


def write(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def loader(tmp_path) -> DataLoader:
    return DataLoader(base_dir=tmp_path)


@pytest.fixture
def decay_model_payload():
    return {
        "dim": 2,
        "hamiltonian": [[[0.5, 0.0], [0.0, -0.25]], [[0.0, 0.25], [-0.5, 0.0]]],
        "lindblad_ops": [[[[0.0, 0.0], [0.0, 0.0]], [[0.8, 0.0], [0.0, 0.0]]]],
    }


@pytest.mark.unit
class TestModelFiles:
    """Tests for Markovian and generalized model files."""

    def test_load_model(self, loader, tmp_path, decay_model_payload):
        write(tmp_path / "model.json", decay_model_payload)
        model = loader.load_model("model.json")
        assert model.dim == 2
        assert model.hamiltonian[0, 1] == 0.0 - 0.25j
        assert model.hamiltonian[1, 0] == 0.0 + 0.25j
        assert model.lindblad_ops[0][1, 0] == 0.8

    def test_saved_model_loads_back(self, loader, make_model):
        model = make_model(n=3, n_ops=2)
        loader.save_model(model, "out/model.json")
        loaded = loader.load_model("out/model.json")
        assert np.array_equal(loaded.hamiltonian, model.hamiltonian)
        for a, b in zip(loaded.lindblad_ops, model.lindblad_ops):
            assert np.array_equal(a, b)

    def test_generalized_model_with_channel_alias(self, loader, tmp_path):
        one = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
        zero = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
        write(tmp_path / "gen.json", {
            "dim": 2,
            "components": 2,
            "hamiltonians": [zero, zero],
            "transitions": [
                {"to_k": 0, "from_j": 1, "lambda": 0, "matrix": one},
                {"to_k": 0, "from_j": 1, "lambda": 1, "matrix": one},
            ],
        })
        model = loader.load_generalized_model("gen.json")
        assert model.components == 2
        assert [tr.channel for tr in model.transitions] == [0, 1]

    def test_generalized_model_saves(self, loader):
        model = GeneralizedLindbladModel(
            hamiltonians=(np.zeros((2, 2)), np.diag([1.0, -1.0])),
            transitions=(Transition(to_k=1, from_j=0, matrix=np.array([[0, 1], [0, 0]])),),
        )
        loader.save_generalized_model(model, "gm.json")
        loaded = loader.load_generalized_model("gm.json")
        assert np.array_equal(loaded.transitions[0].matrix, model.transitions[0].matrix)

    def test_missing_file(self, loader):
        with pytest.raises(ModelFileError) as exc:
            loader.load_model("absent.json")
        assert exc.value.field == "path"
        assert exc.value.code == "MODEL_FILE"

    def test_invalid_json(self, loader, tmp_path):
        (tmp_path / "broken.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(ModelFileError) as exc:
            loader.load_model("broken.json")
        assert exc.value.field == "path"

    def test_unknown_key_reported(self, loader, tmp_path, decay_model_payload):
        write(tmp_path / "model.json", {**decay_model_payload, "temperature": 0.1})
        with pytest.raises(ModelFileError) as exc:
            loader.load_model("model.json")
        assert exc.value.field == "temperature"

    def test_wrong_entry_type_reported(self, loader, tmp_path, decay_model_payload):
        write(tmp_path / "model.json", {**decay_model_payload, "hamiltonian": "sigma_z"})
        with pytest.raises(ModelFileError) as exc:
            loader.load_model("model.json")
        assert exc.value.field.startswith("hamiltonian")

    def test_shape_mismatch_rejected(self, loader, tmp_path, decay_model_payload):
        write(tmp_path / "model.json", {**decay_model_payload, "dim": 3})
        with pytest.raises(ModelFileError):
            loader.load_model("model.json")

    def test_non_hermitian_hamiltonian(self, loader, tmp_path, decay_model_payload):
        payload = dict(decay_model_payload)
        payload["hamiltonian"] = [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
        write(tmp_path / "model.json", payload)
        with pytest.raises(ModelInvariantError):
            loader.load_model("model.json")


@pytest.mark.unit
class TestStateAndBasisFiles:
    """Tests for density matrices, bases and generators."""

    def test_state_from_bare_list(self, loader, tmp_path):
        write(tmp_path / "rho.json", [[[0.75, 0.0], [0.0, 0.1]], [[0.0, -0.1], [0.25, 0.0]]])
        rho = loader.load_state("rho.json")
        assert rho[0, 1] == 0.1j
        assert np.trace(rho).real == pytest.approx(1.0)

    def test_state_round_trip(self, loader, make_state):
        rho = make_state(3)
        loader.save_state(rho, "rho.json")
        assert np.array_equal(loader.load_state("rho.json", dim=3), rho)

    def test_state_dimension_checked(self, loader, make_state):
        loader.save_state(make_state(2), "rho.json")
        with pytest.raises(DimensionMismatch):
            loader.load_state("rho.json", dim=3)

    def test_basis_vectors_are_flattened(self, loader, tmp_path):
        a = np.zeros((2, 2))
        a[0, 1] = a[1, 0] = 1.0
        write(tmp_path / "basis.json", {"basis": [matrix_payload(np.eye(2)), matrix_payload(a)]})
        basis = loader.load_basis("basis.json")
        assert len(basis) == 2
        assert basis[1].shape == (4,)
        assert np.array_equal(basis[1], [0, 1, 1, 0])

    def test_generator_file(self, loader, tmp_path):
        mats = [matrix_payload(np.diag([t, -t])) for t in (0.0, 1.0, 2.0)]
        mids = [matrix_payload(np.diag([t, -t])) for t in (0.5, 1.5)]
        write(tmp_path / "g.json", {"times": [0.0, 1.0, 2.0], "matrices": mats, "midpoints": mids})
        gen = loader.load_generator("g.json")
        assert gen.steps == 2
        assert gen.midpoint(1)[0, 0] == 1.5

    def test_saved_generator_keeps_midpoints(self, loader, precessing_spin):
        gen, _ = precessing_spin(np.pi / 3, steps=20)
        loader.save_generator(gen, "gen.json")
        loaded = loader.load_generator("gen.json")
        assert np.array_equal(loaded.times, gen.times)
        assert np.array_equal(loaded.midpoint(7), gen.midpoint(7))

    def test_generator_midpoint_count_checked(self, loader, tmp_path):
        mats = [matrix_payload(np.eye(2)) for _ in range(3)]
        write(tmp_path / "g.json", {"times": [0.0, 1.0, 2.0], "matrices": mats, "midpoints": mats})
        with pytest.raises(ModelFileError):
            loader.load_generator("g.json")


@pytest.mark.unit
class TestScanConfigFiles:
    """Tests for scan configuration files."""

    def test_axis_spec_and_default_initial(self, loader, tmp_path):
        write(tmp_path / "scan.json", {
            "gamma1_T": {"start": 0.5, "stop": 2.5, "num": 5},
            "dgamma1_T": [0.0, 1.0],
            "dgamma2_T": 0.0,
            "steps": 200,
        })
        config = loader.load_scan_config("scan.json")
        assert config.gamma1_axis == pytest.approx((0.5, 1.0, 1.5, 2.0, 2.5))
        assert config.dgamma1_axis == (0.0, 1.0)
        assert config.initial is None
        assert config.initial_tag == "A03"
        assert config.shape == (5, 2)

    def test_explicit_initial_state(self, loader, tmp_path):
        lower = matrix_payload(np.diag([0.5, 0.0]))
        upper = matrix_payload(np.diag([0.0, 0.5]))
        write(tmp_path / "scan.json", {"gamma1_T": [1.0], "dgamma1_T": [0.5], "initial": [lower, upper]})
        config = loader.load_scan_config("scan.json")
        assert config.initial.shape == (2, 2, 2)
        assert config.initial_tag == "explicit"

    def test_too_few_steps(self, loader, tmp_path):
        write(tmp_path / "scan.json", {"gamma1_T": [1.0], "dgamma1_T": [0.5], "steps": 10})
        with pytest.raises(ModelFileError) as exc:
            loader.load_scan_config("scan.json")
        assert exc.value.field == "steps"


@pytest.mark.unit
class TestOutput:
    """Tests for CSV and JSON writers."""

    def test_csv_keeps_full_precision(self, loader):
        frame = pd.DataFrame({"t": [0.1, 1.0 / 3.0], "value": [np.pi, -2e-17]})
        text = loader.frame_to_csv(frame)
        lines = text.splitlines()
        assert lines[0] == "t,value"
        values = [float(x) for x in lines[2].split(",")]
        assert values == [1.0 / 3.0, -2e-17]
        assert "\r" not in text

    def test_write_json_creates_directories(self, loader, tmp_path):
        text = loader.write_json({"verdict": True}, "nested/dir/report.json")
        assert (tmp_path / "nested" / "dir" / "report.json").read_text(encoding="utf-8") == text
        assert json.loads(text) == {"verdict": True}

    def test_write_json_without_path(self):
        assert DataLoader().write_json({"a": 1}).endswith("\n")

    def test_model_payload_is_plain_json(self):
        model = LindbladModel(hamiltonian=np.diag([1.0, -1.0]))
        payload = json.loads(DataLoader.dumps(model.to_dict()))
        assert payload["hamiltonian"][0][0] == [1.0, 0.0]
        assert payload["lindblad_ops"] == []


@pytest.mark.integration
class TestBundledSamples:
    """The files under data/ load and describe what the docs say."""

    @pytest.fixture
    def samples(self) -> DataLoader:
        return DataLoader(base_dir=Path(__file__).resolve().parent.parent / "data")

    def test_amplitude_damping_sample(self, samples):
        model = samples.load_model("models/amplitude_damping.json")
        rho0 = samples.load_state("states/excited.json", dim=model.dim)
        rho = propagate(model, rho0, 2.0)
        assert rho[0, 0].real == pytest.approx(np.exp(-2.0), abs=1e-12)

    def test_collective_dephasing_sample(self, samples):
        model = samples.load_model("models/collective_dephasing.json")
        report = ddfs_check(model, samples.load_basis("bases/dfs_01_10.json"))
        assert report.verdict

    def test_scan_sample(self, samples):
        config = samples.load_scan_config("scans/small.json")
        assert config.shape == (8, 8)
        assert config.dgamma2_T == 0.0

    def test_example_config(self):
        path = Path(__file__).resolve().parent.parent / "data" / "config" / "effham.example.json"
        assert load_config(path).tol_eig == 1e-9
