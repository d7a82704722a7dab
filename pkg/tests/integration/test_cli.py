"""Integration tests for the rain command line."""

import csv
from pathlib import Path

import pytest
import yaml

from src.cli.main import (
    EXIT_CONFIG,
    EXIT_FATAL_ABORT,
    EXIT_INTEGRITY,
    EXIT_OK,
    EXIT_PROTOCOL,
    EXIT_VIOLATIONS,
    main,
    resolve_output_dir,
)
from src.config import Settings
from src.harness.metrics import read_metrics
from src.schemas.experiment import ExperimentConfig
from tests.conftest import small_config_data


def write_config(path: Path, **overrides) -> Path:
    path.write_text(yaml.safe_dump(small_config_data(**overrides)), encoding="utf-8")
    return path


@pytest.fixture
def config_path(tmp_path) -> Path:
    return write_config(tmp_path / "experiment.yaml")


class TestRun:
    """Tests for `rain run`."""

    def test_run_writes_run_directory(self, config_path, run_dir, capsys):
        """Test a run writes config, metrics and summary."""
        assert main(["run", "--config", str(config_path), "--out", str(run_dir)]) == EXIT_OK
        assert "final_accuracy=" in capsys.readouterr().out

        records = read_metrics(run_dir / "metrics.jsonl")
        assert [r["record"] for r in records] == ["round", "round", "round", "summary"]
        assert (run_dir / "summary.csv").exists()
        saved = yaml.safe_load((run_dir / "config.yaml").read_text())
        assert saved["seed"] == 7

    def test_seed_override(self, config_path, run_dir):
        """Test --seed replaces the config seed."""
        assert main(["run", "--config", str(config_path), "--out", str(run_dir), "--seed", "21"]) == EXIT_OK
        assert read_metrics(run_dir / "metrics.jsonl")[-1]["seed"] == 21

    def test_invalid_config(self, tmp_path, run_dir, capsys):
        """Test a DP-violating config exits 2 before any round runs."""
        path = write_config(tmp_path / "bad.yaml", rain={"sigma": 0.01})
        assert main(["run", "--config", str(path), "--out", str(run_dir)]) == EXIT_CONFIG
        assert "minimal compliant sigma" in capsys.readouterr().err
        assert not (run_dir / "metrics.jsonl").exists()

    def test_missing_config(self, tmp_path, run_dir):
        """Test a missing config file exits 2."""
        assert main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(run_dir)]) == EXIT_CONFIG

    def test_invalid_mode_override(self, tmp_path, run_dir):
        """Test --mode mpc on a weighted-output config fails validation."""
        path = write_config(tmp_path / "weighted.yaml", rain={"output_mode": "weighted"})
        assert main(["run", "--config", str(path), "--out", str(run_dir), "--mode", "mpc"]) == EXIT_CONFIG

    def test_fatal_abort(self, tmp_path, run_dir, capsys):
        """Test a halted round exits 4 when aborts are fatal."""
        path = write_config(
            tmp_path / "fatal.yaml",
            mode="mpc",
            rain={"halt_is_fatal": True},
            tamper=[{"round": 0, "target": "drop", "position": 0}],
        )
        assert main(["run", "--config", str(path), "--out", str(run_dir)]) == EXIT_FATAL_ABORT
        assert "batch index" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "entry",
        [
            {"round": 0, "target": "tag", "position": 6},
            {"round": 0, "target": "shuffled_share", "position": 0, "coordinate": 999},
        ],
    )
    def test_tamper_out_of_range(self, tmp_path, run_dir, capsys, entry):
        """Test an out-of-range tamper exits 2 and leaves no run directory behind."""
        path = write_config(tmp_path / "tamper.yaml", mode="mpc", tamper=[entry])
        assert main(["run", "--config", str(path), "--out", str(run_dir)]) == EXIT_CONFIG
        assert "outside" in capsys.readouterr().err
        assert not (run_dir / "config.yaml").exists()
        assert not (run_dir / "metrics.jsonl").exists()

    def test_protocol_error_exit_code(self, tmp_path, run_dir, capsys):
        """Test a tamper that no longer fits the shrunken batch exits 5 with a message."""
        path = write_config(
            tmp_path / "shrunk.yaml",
            mode="mpc",
            tamper=[
                {"round": 0, "target": "drop", "position": 0},
                {"round": 0, "target": "tag", "position": 5},
            ],
        )
        assert main(["run", "--config", str(path), "--out", str(run_dir)]) == EXIT_PROTOCOL
        assert "Tamper position 5 outside batch of 5" in capsys.readouterr().err


class TestVerify:
    """Tests for `rain verify` on dumped transcripts."""

    @pytest.fixture
    def dumped(self, tmp_path, run_dir) -> tuple[Path, Path]:
        path = write_config(
            tmp_path / "mpc.yaml",
            mode="mpc",
            dump_transcripts=True,
            tamper=[{"round": 1, "target": "tag", "position": 2}],
        )
        assert main(["run", "--config", str(path), "--out", str(run_dir)]) == EXIT_OK
        return path, run_dir / "transcripts"

    def test_dumps_written(self, dumped):
        """Test one dump per round."""
        _, transcripts = dumped
        assert sorted(p.name for p in transcripts.iterdir()) == [
            "round_0000.bin",
            "round_0001.bin",
            "round_0002.bin",
        ]

    def test_clean_dump(self, dumped, capsys):
        """Test an honest round verifies clean."""
        config, transcripts = dumped
        assert main(["verify", "--config", str(config), "--transcript", str(transcripts / "round_0000.bin")]) == EXIT_OK
        assert "clean" in capsys.readouterr().out

    def test_tampered_dump(self, dumped, capsys):
        """Test the forged tag is reported by batch position."""
        config, transcripts = dumped
        assert main(["verify", "--config", str(config), "--transcript", str(transcripts)]) == EXIT_VIOLATIONS
        out = capsys.readouterr().out
        assert "batch 2: MAC reject" in out
        assert "round_0000.bin: round 0, 6 slots, clean" in out

    def test_wrong_seed(self, dumped):
        """Test keys from another seed reject every slot."""
        config, transcripts = dumped
        args = ["verify", "--config", str(config), "--transcript", str(transcripts / "round_0000.bin"), "--seed", "8"]
        assert main(args) == EXIT_VIOLATIONS

    def test_corrupt_file(self, config_path, tmp_path):
        """Test a file without the dump header exits 3."""
        bogus = tmp_path / "round_0000.bin"
        bogus.write_bytes(b"not a dump")
        assert main(["verify", "--config", str(config_path), "--transcript", str(bogus)]) == EXIT_INTEGRITY

    def test_empty_directory(self, config_path, tmp_path):
        """Test a directory without dumps exits 3."""
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["verify", "--config", str(config_path), "--transcript", str(empty)]) == EXIT_INTEGRITY


class TestSweep:
    """Tests for `rain sweep`."""

    def test_axis_from_command_line(self, config_path, run_dir):
        """Test one run per value and a merged summary sorted by value."""
        args = ["sweep", "--config", str(config_path), "--out", str(run_dir), "--axis", "rho", "--values", "0.5", "0"]
        assert main(args) == EXIT_OK
        assert (run_dir / "rho=0" / "metrics.jsonl").exists()
        assert (run_dir / "rho=0.5" / "metrics.jsonl").exists()
        with (run_dir / "sweep_rho.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["rho"]) for r in rows] == [0.0, 0.5]

    def test_axis_from_config(self, tmp_path, run_dir):
        """Test the sweep section of the config is used when no axis is given."""
        path = write_config(tmp_path / "sweep.yaml", sweep={"axis": "epsilon", "values": [4.0]})
        assert main(["sweep", "--config", str(path), "--out", str(run_dir)]) == EXIT_OK
        assert (run_dir / "sweep_epsilon.csv").exists()

    def test_no_axis(self, config_path, run_dir):
        """Test a sweep without an axis is a config error."""
        assert main(["sweep", "--config", str(config_path), "--out", str(run_dir)]) == EXIT_CONFIG

    def test_invalid_point(self, config_path, run_dir):
        """Test an invalid axis value is a config error."""
        args = ["sweep", "--config", str(config_path), "--out", str(run_dir), "--axis", "rho", "--values", "2"]
        assert main(args) == EXIT_CONFIG


class TestOutputDirectory:
    """Tests for output directory precedence."""

    def test_precedence(self, tmp_path):
        """Test --out, then RAIN_OUTPUT_DIR, then the config, then ./runs."""
        config = ExperimentConfig.model_validate(small_config_data(output_dir=str(tmp_path / "cfg")))
        with_env = Settings(_env_file=None, output_dir=tmp_path / "env")
        without_env = Settings(_env_file=None, output_dir=None)

        assert resolve_output_dir(tmp_path / "cli", with_env, config) == tmp_path / "cli"
        assert resolve_output_dir(None, with_env, config) == tmp_path / "env"
        assert resolve_output_dir(None, without_env, config) == tmp_path / "cfg"
        assert resolve_output_dir(None, without_env, ExperimentConfig()) == Path("runs")
