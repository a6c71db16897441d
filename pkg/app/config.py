from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings from environment variables"""

    # LLM bridge Configuration
    llm_endpoint: Optional[str] = None
    llm_timeout_ms: int = 30000
    llm_max_retries: int = 2
    llm_retry_backoff_seconds: float = 0.5

    # Extraction Configuration
    max_workers: int = 4  # per-file parse concurrency

    # Job Configuration (HTTP service)
    jobs_root: str = "/tmp/arch-recovery-jobs"

    # Application Configuration
    app_name: str = "ROS 2 Architecture Recovery"
    app_version: str = "1.0.0"
    log_level: str = "INFO"
    debug: bool = False

    class Config:
        env_file = ".env"
        env_prefix = "ARCH_RECOVERY_"
        case_sensitive = False


settings = Settings()
