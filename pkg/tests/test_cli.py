import json

import pytest

from puppet.cli import main


@pytest.fixture()
def scenario_file(tmp_path):
    doc = {
        "name": "cli-sine",
        "model_file": "panda_7dof",
        "duration": 1.0,
        "operator": {"type": "sinusoid", "axis": [0, 1, 0], "amplitude": 0.05, "period": 4.0},
    }
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(doc))
    return p


def test_run_writes_outputs(scenario_file, tmp_path, capsys):
    record = tmp_path / "demo.jsonl"
    metrics = tmp_path / "metrics.json"
    events = tmp_path / "events.jsonl"
    code = main(
        [
            "run",
            str(scenario_file),
            "--record",
            str(record),
            "--metrics",
            str(metrics),
            "--events",
            str(events),
        ]
    )
    assert code == 0
    assert record.exists() and metrics.exists() and events.exists()
    m = json.loads(metrics.read_text())
    assert "rms_tracking_error" in m
    assert m["rows"] == 50


def test_run_then_replay_roundtrip(scenario_file, tmp_path):
    record = tmp_path / "demo.jsonl"
    assert main(["run", str(scenario_file), "--record", str(record)]) == 0
    assert main(["replay", str(record)]) == 0


def test_replay_mismatch_exit_code(scenario_file, tmp_path, capsys):
    record = tmp_path / "demo.jsonl"
    main(["run", str(scenario_file), "--record", str(record)])
    lines = record.read_text().splitlines()
    row = json.loads(lines[5])
    row["q_follower"][0] += 1e-9
    lines[5] = json.dumps(row)
    record.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(record)]) == 3


def test_validation_exit_code(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{ not json")
    assert main(["run", str(p)]) == 1
    assert main(["validate", str(p)]) == 1


def test_validate_model_and_scenario(scenario_file, tmp_path, capsys):
    assert main(["validate", str(scenario_file)]) == 0
    out = capsys.readouterr().out
    assert "scenario" in out

    from puppet.kinematics.model import model_to_dict, load_model

    model_file = tmp_path / "model.json"
    model_file.write_text(json.dumps(model_to_dict(load_model("panda_7dof"))))
    assert main(["validate", str(model_file)]) == 0
    out = capsys.readouterr().out
    assert "model" in out


def test_validate_rejects_bad_model(tmp_path):
    doc = {
        "name": "bad",
        "joints": [
            {
                "translation": [0, 0, 0],
                "axis": [0, 0, 5],
                "limits": [-1, 1],
                "vel_limit": 1.0,
            }
        ],
        "ee_offset": {"translation": [0, 0, 0]},
    }
    p = tmp_path / "model.json"
    p.write_text(json.dumps(doc))
    assert main(["validate", str(p)]) == 1


def test_report_renders_files(scenario_file, tmp_path):
    record = tmp_path / "demo.jsonl"
    main(["run", str(scenario_file), "--record", str(record)])
    out_dir = tmp_path / "report"
    assert main(["report", str(record), "--out", str(out_dir)]) == 0
    assert (out_dir / "metrics.json").exists()
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "fig_tracking.png").exists()
    assert (out_dir / "fig_error.png").exists()
    header = (out_dir / "summary.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "joint"


def test_run_with_report_flag(scenario_file, tmp_path):
    out_dir = tmp_path / "rep"
    assert main(["run", str(scenario_file), "--report", str(out_dir)]) == 0
    assert (out_dir / "fig_tracking.png").exists()
