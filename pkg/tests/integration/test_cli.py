import json
import shutil

import pytest

from app.cli import build_parser, main
from app.errors import EXIT_INPUT_ERROR, EXIT_OK, EXIT_THRESHOLD_FAILURE


class TestRunCommand:
    def test_offline_run(self, brickbybrick_repo, tmp_path, capsys):
        out_dir = tmp_path / "out"
        code = main(["run", "--repo", str(brickbybrick_repo), "--out", str(out_dir), "--no-llm"])
        assert code == EXIT_OK
        assert (out_dir / "ccd" / "system.puml").is_file()
        assert "ccd/system.puml" in capsys.readouterr().out

    def test_json_manifest_on_stdout(self, brickbybrick_repo, tmp_path, capsys):
        code = main(
            ["run", "--repo", str(brickbybrick_repo), "--out", str(tmp_path / "out"), "--no-llm", "--format", "json"]
        )
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["status"] == "succeeded"

    def test_missing_repo(self, tmp_path):
        code = main(["run", "--repo", str(tmp_path / "nowhere"), "--out", str(tmp_path / "out"), "--no-llm"])
        assert code == EXIT_INPUT_ERROR

    def test_diagnostics_file(self, brickbybrick_repo, tmp_path):
        target = tmp_path / "diag.jsonl"
        out_dir = str(tmp_path / "out")
        args = ["run", "--repo", str(brickbybrick_repo), "--out", out_dir, "--no-llm"]
        args += ["--root", "launch/missing.launch.py", "--diagnostics", str(target)]
        code = main(args)
        assert code == EXIT_INPUT_ERROR
        records = [json.loads(line) for line in target.read_text().splitlines()]
        assert "stage-failed" in [r["code"] for r in records]


class TestStageCommands:
    def test_synthesize_before_extract(self, tmp_path):
        assert main(["synthesize", "--out", str(tmp_path / "out")]) == EXIT_INPUT_ERROR

    def test_stage_by_stage(self, brickbybrick_repo, tmp_path):
        out_dir = str(tmp_path / "out")
        assert main(["extract", "--repo", str(brickbybrick_repo), "--out", out_dir, "--no-llm"]) == EXIT_OK
        assert main(["launch-graph", "--repo", str(brickbybrick_repo), "--out", out_dir]) == EXIT_OK
        assert main(["synthesize", "--out", out_dir]) == EXIT_OK
        assert (tmp_path / "out" / "acd" / "arc_1.puml").is_file()


class TestEvaluateCommand:
    def test_identical_models(self, brickbybrick_reference, capsys):
        ref = str(brickbybrick_reference)
        assert main(["evaluate", "--recovered", ref, "--reference", ref, "--fail-under", "1.0"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["macro"]["CCD"]["f1"] == 1.0

    def test_below_threshold(self, brickbybrick_reference, tmp_path):
        recovered = tmp_path / "recovered"
        shutil.copytree(brickbybrick_reference, recovered)
        (recovered / "acd" / "camera_driver.puml").unlink()
        code = main(
            [
                "evaluate",
                "--recovered",
                str(recovered),
                "--reference",
                str(brickbybrick_reference),
                "--fail-under",
                "0.99",
            ]
        )
        assert code == EXIT_THRESHOLD_FAILURE

    def test_text_format(self, brickbybrick_reference, capsys):
        ref = str(brickbybrick_reference)
        main(["evaluate", "--recovered", ref, "--reference", ref, "--format", "text"])
        assert "[ACD]" in capsys.readouterr().out

    def test_missing_input(self, brickbybrick_reference, tmp_path):
        code = main(["evaluate", "--recovered", str(tmp_path / "none"), "--reference", str(brickbybrick_reference)])
        assert code == EXIT_INPUT_ERROR

    def test_run_then_evaluate(self, brickbybrick_repo, brickbybrick_reference, tmp_path):
        code = main(
            [
                "run",
                "--repo",
                str(brickbybrick_repo),
                "--out",
                str(tmp_path / "out"),
                "--no-llm",
                "--reference",
                str(brickbybrick_reference),
                "--fail-under",
                "1.0",
            ]
        )
        assert code == EXIT_OK


class TestParser:
    @pytest.mark.parametrize("value", ["-0.5", "1.5"])
    def test_threshold_range(self, value):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["evaluate", "--recovered", "a", "--reference", "b", "--fail-under", value])

    def test_command_is_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])
