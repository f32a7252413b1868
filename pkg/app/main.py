import logging
from collections.abc import AsyncIterator
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.routing import APIRoute

from app.api.deps import get_run_config
from app.api.main import api_router
from app.core.config import settings
from app.core.exceptions import AppException

logger = logging.getLogger(__name__)


def custom_generate_unique_id(route: APIRoute) -> str:
    return f"{route.tags[0]}-{route.name}"


@asynccontextmanager
async def lifespan(_: FastAPI) -> AsyncIterator[None]:
    # Fails startup on a bad CONFIG_PATH.
    config = get_run_config()
    logger.info(
        "%s (%s) ready: config=%s meta=%s workers=%d",
        settings.PROJECT_NAME,
        settings.ENVIRONMENT,
        settings.CONFIG_PATH or "defaults",
        config.meta.kind.value,
        settings.MAX_WORKERS,
    )
    yield


app = FastAPI(
    title=settings.PROJECT_NAME,
    openapi_url=f"{settings.API_V1_STR}/openapi.json",
    generate_unique_id_function=custom_generate_unique_id,
    lifespan=lifespan,
)


@app.exception_handler(AppException)
async def app_exception_handler(_: object, exc: AppException) -> JSONResponse:
    if exc.status_code >= 500:
        logger.error("%s: %s", exc.error_code, exc.detail)
    return JSONResponse(
        status_code=exc.status_code,
        content={"detail": exc.detail, "error_code": exc.error_code},
    )


app.include_router(api_router, prefix=settings.API_V1_STR)
