"""Tests for the command-line entry point."""
import json

import pytest

from ringkit.exceptions import DataError
from ringkit.main import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_UNEXPECTED, build_parser, main


@pytest.fixture
def write_config(tmp_path):
    """Write a payload to a JSON config file."""

    def write(payload, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return write


# ============================================================================
# Parser
# ============================================================================

@pytest.mark.unit
def test_parser_subcommands():
    """Test that each subcommand parses its options."""
    parser = build_parser()

    run = parser.parse_args(["run", "--config", "c.json", "--out", "runs/a", "--seed", "3", "--jobs", "2"])
    report = parser.parse_args(["report", "--run", "runs/a"])

    assert (run.command, run.config, run.out, run.seed, run.jobs) == ("run", "c.json", "runs/a", 3, 2)
    assert report.out is None
    assert report.verbose is False


@pytest.mark.unit
def test_parser_requires_subcommand():
    """Test that a bare invocation is a usage error."""
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


# ============================================================================
# Exit codes
# ============================================================================

@pytest.mark.unit
def test_run_invalid_method_for_task(write_config, experiment_payload, capsys):
    """Test exit code 2 naming the offending method."""
    path = write_config(experiment_payload(method="ratio", channels=("ppg_ir", "ppg_red")))

    assert main(["run", "--config", path]) == EXIT_CONFIG
    assert "ratio" in capsys.readouterr().err


@pytest.mark.unit
def test_run_missing_config_file(tmp_path, capsys):
    """Test exit code 2 for an unreadable config."""
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    assert "cannot read config" in capsys.readouterr().err


@pytest.mark.unit
def test_run_malformed_json(tmp_path, capsys):
    """Test exit code 2 with the failing line for invalid JSON."""
    path = tmp_path / "broken.json"
    path.write_text('{\n  "task": "hr",\n  oops\n}\n', encoding="utf-8")

    assert main(["run", "--config", str(path)]) == EXIT_CONFIG
    assert f"{path}:3" in capsys.readouterr().err


@pytest.mark.unit
def test_run_data_error_exit_code(mocker, write_config, experiment_payload, capsys):
    """Test that data errors map to exit code 3."""
    mocker.patch("ringkit.main.ExperimentService.run", side_effect=DataError("no sessions to evaluate"))

    assert main(["run", "--config", write_config(experiment_payload())]) == EXIT_DATA
    assert "no sessions to evaluate" in capsys.readouterr().err


@pytest.mark.unit
def test_run_unexpected_error(mocker, write_config, experiment_payload, capsys):
    """Test exit code 1 with a traceback only in verbose mode."""
    mocker.patch("ringkit.main.ExperimentService.run", side_effect=RuntimeError("disk on fire"))
    path = write_config(experiment_payload())

    assert main(["run", "--config", path]) == EXIT_UNEXPECTED
    quiet = capsys.readouterr().err
    assert main(["run", "--config", path, "--verbose"]) == EXIT_UNEXPECTED
    verbose = capsys.readouterr().err

    assert "disk on fire" in quiet
    assert "Traceback" not in quiet
    assert "Traceback" in verbose


@pytest.mark.unit
def test_jobs_must_be_positive(write_config, experiment_payload):
    """Test that zero workers is a config error."""
    assert main(["run", "--config", write_config(experiment_payload()), "--jobs", "0"]) == EXIT_CONFIG


@pytest.mark.unit
def test_jobs_default_from_settings(mocker, tmp_path, write_config, experiment_payload, test_settings):
    """Test that --jobs falls back to the settings value."""
    mocker.patch.object(test_settings, "JOBS", 3)
    service = mocker.patch("ringkit.main.ExperimentService")
    service.return_value.run.return_value.run_dir = tmp_path

    assert main(["run", "--config", write_config(experiment_payload())]) == EXIT_OK
    assert service.call_args.kwargs["jobs"] == 3


@pytest.mark.unit
def test_run_seed_override(mocker, tmp_path, write_config, experiment_payload):
    """Test that --seed replaces the config seed."""
    service = mocker.patch("ringkit.main.ExperimentService")
    service.return_value.run.return_value.run_dir = tmp_path

    main(["run", "--config", write_config(experiment_payload()), "--seed", "99"])

    assert service.call_args.args[0].seed == 99


@pytest.mark.unit
def test_run_negative_seed_is_config_error(mocker, write_config, experiment_payload, capsys):
    """Test that a negative --seed is validated like the config seed."""
    service = mocker.patch("ringkit.main.ExperimentService")

    code = main(["run", "--config", write_config(experiment_payload()), "--seed", "-1"])

    assert code == EXIT_CONFIG
    assert "--seed: invalid config: seed" in capsys.readouterr().err
    service.assert_not_called()


@pytest.mark.unit
def test_synth_negative_seed_is_config_error(tmp_path, write_config, capsys):
    """Test that a negative synth --seed exits with the config error code."""
    path = write_config({"cohort": {"n_subjects": 1, "activities": ["sitting"], "duration_s": 20, "seed": 1}})

    assert main(["synth", "--config", path, "--out", str(tmp_path / "data"), "--seed", "-1"]) == EXIT_CONFIG
    assert "invalid cohort seed -1" in capsys.readouterr().err
    assert not (tmp_path / "data").exists()


# ============================================================================
# End to end
# ============================================================================

@pytest.mark.integration
def test_synth_writes_session_directories(tmp_path, write_config):
    """Test that synth writes one loadable directory per session."""
    payload = {"cohort": {"n_subjects": 2, "activities": ["sitting"], "duration_s": 20, "seed": 1}}
    out = tmp_path / "data"

    assert main(["synth", "--config", write_config(payload, "dataset.json"), "--out", str(out)]) == EXIT_OK

    directories = sorted(path.name for path in out.iterdir())
    assert directories == ["S00_reflective_sitting", "S01_reflective_sitting"]
    for name in directories:
        assert sorted(path.name for path in (out / name).iterdir()) == ["labels.csv", "session.json", "signals.csv"]


@pytest.mark.integration
def test_synth_seed_override(tmp_path, write_config):
    """Test that --seed changes the generated cohort."""
    path = write_config({"cohort": {"n_subjects": 1, "activities": ["sitting"], "duration_s": 20, "seed": 1}})

    main(["synth", "--config", path, "--out", str(tmp_path / "a")])
    main(["synth", "--config", path, "--out", str(tmp_path / "b"), "--seed", "2"])

    signals = "S00_reflective_sitting/signals.csv"
    assert (tmp_path / "a" / signals).read_bytes() != (tmp_path / "b" / signals).read_bytes()


@pytest.mark.integration
def test_run_then_report_reproduces_report(tmp_path, write_config, experiment_payload, capsys):
    """Test that report re-renders report.csv byte for byte from a run."""
    run_dir = tmp_path / "run"
    again = tmp_path / "again"

    assert main(["run", "--config", write_config(experiment_payload()), "--out", str(run_dir)]) == EXIT_OK
    assert str(run_dir / "report.csv") in capsys.readouterr().out
    assert main(["report", "--run", str(run_dir), "--out", str(again)]) == EXIT_OK

    assert (again / "report.csv").read_bytes() == (run_dir / "report.csv").read_bytes()
    assert (again / "report.json").read_bytes() == (run_dir / "report.json").read_bytes()
    for name in ("config.json", "pairs.csv", "manifest.json", "dataset_summary.csv"):
        assert (run_dir / name).is_file()


@pytest.mark.integration
def test_report_on_missing_run(tmp_path):
    """Test that a directory without a run is a data error."""
    assert main(["report", "--run", str(tmp_path)]) == EXIT_DATA
