import logging
import threading
from typing import Dict, Optional

from app.models import JobStatusResponse

logger = logging.getLogger(__name__)


class JobRegistry:
    """In-process store for recovery job state"""

    def __init__(self):
        self._jobs: Dict[str, JobStatusResponse] = {}
        self._lock = threading.Lock()

    def get_job(self, job_id: str) -> Optional[JobStatusResponse]:
        """
        Get job state by id.

        Returns JobStatusResponse if found, None otherwise.
        """
        with self._lock:
            return self._jobs.get(job_id)

    def set_job(self, job: JobStatusResponse):
        with self._lock:
            self._jobs[job.job_id] = job
        logger.debug(f"[{job.job_id}] status {job.status}")

    def update_job(self, job_id: str, **changes) -> Optional[JobStatusResponse]:
        """
        Apply field changes to a stored job.

        Returns the updated job, or None when the id is unknown.
        """
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                logger.error(f"[{job_id}] update for unknown job ignored")
                return None
            job = job.model_copy(update=changes)
            self._jobs[job_id] = job
        logger.debug(f"[{job_id}] status {job.status}")
        return job

    def clear(self):
        with self._lock:
            self._jobs.clear()


# Global job registry instance
job_registry = JobRegistry()
