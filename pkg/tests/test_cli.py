"""End-to-end command-line pipeline on a synthetic dataset."""

import json

import pytest

from bearface.cli import main
from bearface.servo import decode_servo_commands


@pytest.fixture(scope="module")
def fast_config(tmp_path_factory):
    """Smaller folds and PCA keep the pipeline tests quick."""
    path = tmp_path_factory.mktemp("config") / "run.config"
    path.write_text("bearface-config 1\ncv_folds = 5\npca_energy = 0.9\n")
    return str(path)


@pytest.fixture(scope="module")
def pipeline_out(tmp_path_factory, synthetic_dataset, fast_config):
    """Features and model built once for the read-only command tests."""
    out = tmp_path_factory.mktemp("pipeline")
    code = main(
        ["extract", "--manifest", str(synthetic_dataset), "--config", fast_config,
         "--out", str(out)]
    )
    assert code == 0
    code = main(["train", "--config", fast_config, "--out", str(out)])
    assert code == 0
    return out


def test_extract_and_train_artifacts(pipeline_out):
    assert (pipeline_out / "features.store").is_file()
    assert (pipeline_out / "model.store").is_file()
    assert (pipeline_out / "resolved_config.txt").is_file()


def test_eval_writes_report(pipeline_out, fast_config):
    code = main(["eval", "--config", fast_config, "--out", str(pipeline_out)])
    assert code == 0
    report = (pipeline_out / "report.txt").read_text()
    assert "overall recognition rate" in report
    assert "configuration:" in report
    assert "anger" in report and "neutral" in report
    header = report.splitlines()
    matrix_rows = [line for line in header if line.startswith(("anger", "surprise", "disgust", "fear", "joy", "sadness", "neutral"))]
    assert len(matrix_rows) == 7
    csv_text = (pipeline_out / "confusion.csv").read_text()
    assert csv_text.splitlines()[0].startswith("true\\predicted,anger,surprise")


def test_eval_person_independent_scheme(pipeline_out, fast_config, tmp_path):
    out = tmp_path / "pi"
    code = main(
        ["eval", "--config", fast_config, "--out", str(out),
         "--features", str(pipeline_out / "features.store"),
         "--scheme", "person-independent", "--seed", "9"]
    )
    assert code == 0
    report = (out / "report.txt").read_text()
    assert "scheme: person-independent" in report
    assert "seed = 9" in report  # CLI override lands in the config echo


def test_classify_command(pipeline_out, synthetic_dataset, fast_config, tmp_path):
    out = tmp_path / "cls"
    code = main(
        ["classify", "--manifest", str(synthetic_dataset), "--config", fast_config,
         "--model", str(pipeline_out / "model.store"), "--out", str(out)]
    )
    assert code == 0
    records = [
        json.loads(line)
        for line in (out / "classifications.jsonl").read_text().splitlines()
    ]
    assert len(records) == 48  # every manifest row
    for record in records:
        assert record["winner"] in record["tally"]
        assert 0.0 <= record["intensity"] <= 1.0


def test_classify_missing_model(tmp_path, synthetic_dataset, capsys):
    code = main(
        ["classify", "--manifest", str(synthetic_dataset), "--out", str(tmp_path)]
    )
    assert code == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["kind"] == "CliError"
    assert "model not found" in record["error"]


def test_animate_bundled_demo(tmp_path):
    out = tmp_path / "anim"
    code = main(
        ["animate", "--expression", "joy", "--intensity", "1.0", "--out", str(out)]
    )
    assert code == 0
    lines = (out / "timeline.csv").read_text().splitlines()
    assert len(lines) == 87  # header + 86 frames of the 1 s demo at 85 fps
    assert lines[0].startswith("t,viseme_00")
    records = [json.loads(l) for l in (out / "timeline.jsonl").read_text().splitlines()]
    assert all(r["expressions"].get("joy") == 1.0 for r in records)


def test_animate_custom_transcript_and_track(tmp_path):
    transcript = tmp_path / "speech.align"
    transcript.write_text("0.0 0.4 m\n0.4 0.9 ɑ\n")
    track = tmp_path / "track.txt"
    track.write_text("0.0 anger 0.5\n0.5 neutral 0\n")
    out = tmp_path / "anim"
    code = main(
        ["animate", "--transcript", str(transcript), "--track", str(track),
         "--out", str(out)]
    )
    assert code == 0
    lines = (out / "timeline.csv").read_text().splitlines()
    assert len(lines) == 1 + 77  # floor(0.9 * 85) + 1 frames


def test_imitate_replay(tmp_path):
    votes = tmp_path / "votes.txt"
    votes.write_text(
        "\n".join(
            ["0.0 joy 6", "0.1 joy 6", "0.2 joy 6", "0.3 sadness 4",
             "0.4 sadness 4", "0.5 sadness 4", "0.6 sadness 4"]
        )
    )
    out = tmp_path / "imit"
    code = main(["imitate", "--votes", str(votes), "--out", str(out)])
    assert code == 0
    log = [
        json.loads(line)
        for line in (out / "imitation_log.jsonl").read_text().splitlines()
    ]
    assert [r["winner"] for r in log] == ["joy", "sadness"]
    assert (out / "command_000_pose.csv").is_file()
    assert (out / "command_001_morph.csv").is_file()


def test_export_servo_neutral_pose(capsysbinary):
    code = main(["export-servo", "--expression", "neutral", "--intensity", "0.0"])
    assert code == 0
    payload = capsysbinary.readouterr().out
    assert len(payload) == 40
    decoded = decode_servo_commands(payload)
    assert [channel for channel, _ in decoded] == list(range(10))
    assert all(target == 6000 for _, target in decoded)  # mid-range pulses


def test_export_servo_trajectory_file(tmp_path):
    out = tmp_path / "servo"
    code = main(
        ["export-servo", "--expression", "surprise", "--intensity", "1.0",
         "--duration", "0.1", "--out", str(out)]
    )
    assert code == 0
    payload = (out / "servo.bin").read_bytes()
    frames = 0.1 * 85.0
    assert len(payload) == (int(frames) + 1) * 40


def test_bad_transcript_reports_error(tmp_path, capsys):
    bad = tmp_path / "bad.align"
    bad.write_text("0.5 0.1 m\n")
    code = main(["animate", "--transcript", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["kind"] == "ValueError"
