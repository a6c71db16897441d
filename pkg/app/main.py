import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import settings
from app.routers import recovery
from app.services.job_registry import job_registry
from app.services.llm_client import llm_client

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup and shutdown event handler."""
    logger.info(f"Starting {settings.app_name}...")
    if llm_client.is_configured():
        logger.info(f"LLM endpoint configured at {llm_client.endpoint}")
    else:
        logger.info("No LLM endpoint configured, node descriptions use the offline fallback")

    yield

    logger.info(f"Shutting down {settings.app_name}...")
    job_registry.clear()


# Initialize FastAPI app
app = FastAPI(
    title=settings.app_name,
    version=settings.app_version,
    description="REST API for recovering ROS 2 architecture models from source repositories",
    lifespan=lifespan,
    debug=settings.debug,
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(recovery.router)


@app.get("/")
async def root():
    """Root endpoint with API information."""
    return {
        "name": settings.app_name,
        "version": settings.app_version,
        "description": "REST API for recovering ROS 2 architecture models from source repositories",
        "endpoints": {
            "recover": "POST /api/v1/recover",
            "job": "GET /api/v1/jobs/{job_id}",
            "evaluate": "POST /api/v1/evaluate",
            "health": "GET /api/v1/health",
            "version": "GET /api/v1/version",
        },
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="0.0.0.0", port=8080)
