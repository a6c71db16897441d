from unittest.mock import patch

import pytest


@pytest.fixture
def client(test_client):
    return test_client


class TestRootEndpoint:
    def test_root_returns_api_info(self, client):
        response = client.get("/")
        assert response.status_code == 200
        data = response.json()
        assert "name" in data
        assert "version" in data
        assert "recover" in data["endpoints"]


class TestHealthEndpoint:
    @patch("app.routers.recovery.settings")
    def test_health_check_healthy(self, mock_settings, client, tmp_path):
        mock_settings.jobs_root = str(tmp_path / "jobs")

        response = client.get("/api/v1/health")
        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "healthy"
        assert data["services"]["jobs_root"] == "writable"

    @patch("app.routers.recovery.llm_client")
    @patch("app.routers.recovery.settings")
    def test_health_check_degraded(self, mock_settings, mock_llm, client, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        mock_settings.jobs_root = str(blocker / "jobs")
        mock_llm.is_configured.return_value = False

        response = client.get("/api/v1/health")
        data = response.json()
        assert data["status"] == "degraded"
        assert data["services"] == {"jobs_root": "unavailable", "llm": "offline"}


class TestVersionEndpoint:
    def test_version_returns_versions(self, client):
        response = client.get("/api/v1/version")
        assert response.status_code == 200
        data = response.json()
        assert "api_version" in data
        assert data["schema_version"] == "1.0"


class TestRecoverEndpoint:
    def test_recovery_job_runs(self, client, brickbybrick_repo, tmp_path):
        out_dir = tmp_path / "out"
        response = client.post(
            "/api/v1/recover",
            json={"repo_root": str(brickbybrick_repo), "out_dir": str(out_dir), "llm_enabled": False},
        )
        assert response.status_code == 202
        job_id = response.json()["job_id"]

        job = client.get(f"/api/v1/jobs/{job_id}").json()
        assert job["status"] == "succeeded"
        assert job["exit_code"] == 0
        assert job["manifest"]["status"] == "succeeded"
        assert (out_dir / "ccd" / "system.puml").is_file()
        assert (out_dir / "diagnostics.jsonl").is_file()

    def test_failed_job(self, client, brickbybrick_repo, tmp_path):
        response = client.post(
            "/api/v1/recover",
            json={
                "repo_root": str(brickbybrick_repo),
                "out_dir": str(tmp_path / "out"),
                "roots": ["launch/missing.launch.py"],
                "llm_enabled": False,
            },
        )
        job = client.get(f"/api/v1/jobs/{response.json()['job_id']}").json()
        assert job["status"] == "failed"
        assert job["exit_code"] == 1
        assert job["error"]

    @patch("app.routers.recovery.RecoveryPipeline")
    def test_unexpected_error(self, mock_pipeline, client, brickbybrick_repo, tmp_path):
        mock_pipeline.return_value.run.side_effect = RuntimeError("boom")
        response = client.post(
            "/api/v1/recover",
            json={"repo_root": str(brickbybrick_repo), "out_dir": str(tmp_path / "out"), "llm_enabled": False},
        )
        job = client.get(f"/api/v1/jobs/{response.json()['job_id']}").json()
        assert job["status"] == "failed"
        assert job["exit_code"] == 2
        assert job["error"] == "boom"

    def test_missing_repository(self, client, tmp_path):
        response = client.post("/api/v1/recover", json={"repo_root": str(tmp_path / "nowhere")})
        assert response.status_code == 400

    def test_missing_body_field(self, client):
        response = client.post("/api/v1/recover", json={})
        assert response.status_code == 422  # Validation error

    def test_unknown_job(self, client):
        response = client.get("/api/v1/jobs/missing")
        assert response.status_code == 404


class TestEvaluateEndpoint:
    def test_evaluate_identical(self, client, brickbybrick_reference):
        ref = str(brickbybrick_reference)
        response = client.post("/api/v1/evaluate", json={"recovered": ref, "reference": ref})
        assert response.status_code == 200
        data = response.json()
        assert data["macro"]["ACD"]["f1"] == 1.0
        assert data["macro"]["CCD"]["f1"] == 1.0

    def test_evaluate_below_threshold(self, client, brickbybrick_reference):
        recovered = str(brickbybrick_reference / "acd" / "camera_driver.puml")
        response = client.post(
            "/api/v1/evaluate",
            json={"recovered": recovered, "reference": str(brickbybrick_reference), "fail_under": 0.9},
        )
        assert response.status_code == 422
        assert "ACD" in response.json()["detail"]

    def test_evaluate_missing_input(self, client, brickbybrick_reference, tmp_path):
        response = client.post(
            "/api/v1/evaluate",
            json={"recovered": str(tmp_path / "none"), "reference": str(brickbybrick_reference)},
        )
        assert response.status_code == 400
