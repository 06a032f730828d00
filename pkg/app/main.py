from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api import router
from app.config import settings
from app.exceptions import (
    BellArgumentError,
    ConfigurationError,
    DiffeoError,
    MissingAssignment,
    PolynomialParseError,
    SeriesError,
    UnknownIndeterminate,
    VerificationFailure,
)
from app.logging_config import (
    RunIdMiddleware,
    get_structured_logger,
    run_id_var,
    setup_structured_logging,
)
from app.models import ErrorResponse
from app.verification import available_suites

# Configure structured logging
setup_structured_logging(
    service_name="diffeo-trees",
    log_level=settings.log_level,
    enable_json_logging=settings.json_logging,
)

logger = get_structured_logger(__name__)

INPUT_ERRORS = (
    UnknownIndeterminate,
    PolynomialParseError,
    MissingAssignment,
    SeriesError,
    BellArgumentError,
    ConfigurationError,
)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager"""
    logger.info("Starting diffeo-trees server", suites=available_suites())
    yield
    logger.info("Shutting down diffeo-trees server")


# Create FastAPI application
app = FastAPI(
    title=settings.title,
    description=settings.description,
    version=settings.version,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000"],
    allow_credentials=True,
    allow_methods=["GET", "OPTIONS"],
    allow_headers=["*"],
)

# Add run ID tracking middleware
app.add_middleware(RunIdMiddleware)

# Include API router
app.include_router(router, prefix=settings.api_prefix)


def _error(status_code: int, error: str, exc: DiffeoError) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content=ErrorResponse(
            error=error, message=exc.message, details=exc.details, run_id=run_id_var.get()
        ).model_dump(),
    )


@app.exception_handler(VerificationFailure)
async def verification_failure_handler(request: Request, exc: VerificationFailure):
    """Failing checks of a requested suite"""
    return _error(422, "verification_failure", exc)


@app.exception_handler(DiffeoError)
async def diffeo_error_handler(request: Request, exc: DiffeoError):
    """Bad input maps to 400, anything else from the library to 500"""
    if isinstance(exc, INPUT_ERRORS):
        return _error(400, "input_error", exc)
    logger.error(exc.message, error_type=type(exc).__name__)
    return _error(500, "computation_error", exc)


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError):
    return JSONResponse(
        status_code=400,
        content=ErrorResponse(
            error="input_error", message=str(exc), run_id=run_id_var.get()
        ).model_dump(),
    )


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    """Handle HTTP exceptions with structured error response"""
    return JSONResponse(
        status_code=exc.status_code,
        content=ErrorResponse(
            error="http_error",
            message=str(exc.detail),
            details={"status_code": exc.status_code},
            run_id=run_id_var.get(),
        ).model_dump(),
    )


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    """Handle unexpected exceptions"""
    logger.error(f"Unexpected error: {exc}", error_type=type(exc).__name__)
    return JSONResponse(
        status_code=500,
        content=ErrorResponse(
            error="internal_error",
            message="An unexpected error occurred",
            details={"error_type": type(exc).__name__},
        ).model_dump(),
    )


@app.get("/")
async def root():
    """Root endpoint with basic information"""
    return {
        "message": "diffeo-trees server",
        "version": settings.version,
        "docs": "/docs",
        "api": settings.api_prefix,
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=settings.host,
        port=settings.port,
        reload=True,
        log_level="info",
    )
