import logging
import uuid
from pathlib import Path

from fastapi import APIRouter, BackgroundTasks, HTTPException, status

from app.config import settings
from app.errors import EXIT_ANALYSIS_FATAL, EXIT_OK, InputError, RecoveryError
from app.models import (
    EvaluateRequest,
    EvaluationReport,
    HealthResponse,
    JobStatusResponse,
    RecoveryJobAccepted,
    RecoveryJobConfig,
    RecoveryJobRequest,
    VersionResponse,
)
from app.services.diagnostics import DiagnosticsCollector
from app.services.evaluator import check_threshold, evaluate_paths
from app.services.job_registry import job_registry
from app.services.llm_client import llm_client
from app.services.pipeline import RecoveryPipeline

router = APIRouter(prefix="/api/v1", tags=["recovery"])
logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
DIAGNOSTICS_FILE = "diagnostics.jsonl"


def process_recovery_job(job_id: str, config: RecoveryJobConfig):
    """
    Background task running the whole pipeline for one job.

    The job ends as succeeded or failed; errors are recorded on the job,
    never raised.
    """
    logger.info(f"[{job_id}] Starting recovery of {config.repo_root}")
    job_registry.update_job(job_id, status="running")
    diagnostics = DiagnosticsCollector(stage="recover")
    pipeline = RecoveryPipeline(config, diagnostics)
    try:
        manifest = pipeline.run()
        job_registry.update_job(job_id, status="succeeded", exit_code=EXIT_OK, manifest=manifest)
        logger.info(f"[{job_id}] Recovery complete, {len(manifest.artifacts)} artifacts")
    except RecoveryError as e:
        logger.error(f"[{job_id}] Recovery failed: {e}")
        job_registry.update_job(job_id, status="failed", exit_code=e.exit_code, error=str(e))
    except Exception as e:
        logger.error(f"[{job_id}] Unexpected error: {e}")
        job_registry.update_job(job_id, status="failed", exit_code=EXIT_ANALYSIS_FATAL, error=str(e))
    finally:
        try:
            diagnostics.flush(config.diagnostics_path)
        except OSError as e:
            logger.error(f"[{job_id}] Failed to write diagnostics: {e}")


@router.post("/recover", response_model=RecoveryJobAccepted, status_code=202)
async def recover(request: RecoveryJobRequest, background_tasks: BackgroundTasks):
    """
    Recover the architecture of a local repository checkout asynchronously.

    - **repo_root**: path of the checkout on the server
    - **out_dir**: optional output directory (defaults under the jobs root)
    - **roots**: optional root launch files, repo-relative
    - **llm_enabled**: let the configured LLM endpoint write node descriptions

    Returns 202 Accepted immediately. Poll GET /api/v1/jobs/{job_id} for the result.
    """
    if not Path(request.repo_root).is_dir():
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"Repository root '{request.repo_root}' does not exist",
        )

    job_id = str(uuid.uuid4())
    out_dir = request.out_dir or str(Path(settings.jobs_root) / job_id)
    config = RecoveryJobConfig(
        repo_root=request.repo_root,
        out_dir=out_dir,
        roots=request.roots,
        llm_enabled=request.llm_enabled,
        diagnostics_path=str(Path(out_dir) / DIAGNOSTICS_FILE),
    )
    job_registry.set_job(JobStatusResponse(job_id=job_id, status="accepted", out_dir=out_dir))

    background_tasks.add_task(process_recovery_job, job_id, config)

    logger.info(f"[{job_id}] Accepted recovery request for {request.repo_root}")

    return RecoveryJobAccepted(
        job_id=job_id,
        status="accepted",
        message=f"Recovery queued; artifacts will be written to {out_dir}",
    )


@router.get("/jobs/{job_id}", response_model=JobStatusResponse)
async def get_job(job_id: str):
    job = job_registry.get_job(job_id)
    if job is None:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Job '{job_id}' not found",
        )
    return job


@router.post("/evaluate", response_model=EvaluationReport)
async def evaluate(request: EvaluateRequest):
    """
    Score a recovered PlantUML model against a reference model.

    Both paths may be a single .puml file or a directory of them. With
    **fail_under** set, a macro F1 below it answers 422.
    """
    try:
        report = evaluate_paths(request.recovered, request.reference)
        check_threshold(report, request.fail_under)
        return report
    except InputError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except RecoveryError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))


@router.get("/health", response_model=HealthResponse)
async def health_check():
    """
    Check the health of the service.

    Reports whether the jobs root is writable and whether an LLM endpoint is
    configured (the service works offline without one).
    """
    jobs_root = Path(settings.jobs_root)
    try:
        jobs_root.mkdir(parents=True, exist_ok=True)
        writable = True
    except OSError as e:
        logger.error(f"Jobs root {jobs_root} is not usable: {e}")
        writable = False

    services = {
        "jobs_root": "writable" if writable else "unavailable",
        "llm": "configured" if llm_client.is_configured() else "offline",
    }
    if writable:
        return HealthResponse(status="healthy", message="Recovery service is ready", services=services)
    return HealthResponse(status="degraded", message="Jobs root is not writable", services=services)


@router.get("/version", response_model=VersionResponse)
async def get_version():
    return VersionResponse(api_version=settings.app_version, schema_version=SCHEMA_VERSION)
