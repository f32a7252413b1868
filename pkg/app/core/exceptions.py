from typing import Any


class AppException(Exception):
    """Base application exception for service/domain layers."""

    def __init__(
        self,
        *,
        status_code: int,
        detail: str,
        error_code: str = "APP_ERROR",
        extra: dict[str, Any] | None = None,
    ) -> None:
        self.status_code = status_code
        self.detail = detail
        self.error_code = error_code
        self.extra = extra or {}
        super().__init__(detail)


class ResourceNotFoundError(AppException):
    def __init__(self, resource: str, identifier: Any) -> None:
        super().__init__(
            status_code=404,
            detail=f"{resource} not found: {identifier}",
            error_code=f"{resource.upper().replace(' ', '_')}_NOT_FOUND",
            extra={"resource": resource, "identifier": str(identifier)},
        )


class DataFormatError(AppException):
    def __init__(
        self,
        detail: str,
        *,
        row: int | None = None,
        column: str | None = None,
    ) -> None:
        extra: dict[str, Any] = {}
        if row is not None:
            extra["row"] = row
        if column is not None:
            extra["column"] = column
        super().__init__(
            status_code=400,
            detail=detail,
            error_code="DATA_FORMAT",
            extra=extra,
        )


class InvalidParameterError(AppException):
    def __init__(self, detail: str, error_code: str = "INVALID_PARAMETER") -> None:
        super().__init__(
            status_code=422,
            detail=detail,
            error_code=error_code,
        )


class InsufficientDataError(AppException):
    def __init__(self, detail: str) -> None:
        super().__init__(
            status_code=422,
            detail=detail,
            error_code="INSUFFICIENT_DATA",
        )


class DimensionMismatchError(AppException):
    def __init__(self, *, expected: int, received: int, what: str = "features") -> None:
        super().__init__(
            status_code=422,
            detail=f"Expected {expected} {what}, received {received}",
            error_code="DIMENSION_MISMATCH",
            extra={"expected": expected, "received": received},
        )


class InvalidRankingError(AppException):
    def __init__(self, detail: str) -> None:
        super().__init__(
            status_code=422,
            detail=detail,
            error_code="INVALID_RANKING",
        )


class StaleCacheError(AppException):
    def __init__(self) -> None:
        super().__init__(
            status_code=409,
            detail="Forward cache is older than the network parameters",
            error_code="STALE_CACHE",
        )


class ConfigError(AppException):
    def __init__(self, detail: str, *, key: str | None = None) -> None:
        super().__init__(
            status_code=400,
            detail=detail,
            error_code="CONFIG_ERROR",
            extra={"key": key} if key else None,
        )


class UsageError(AppException):
    def __init__(self, detail: str) -> None:
        super().__init__(
            status_code=400,
            detail=detail,
            error_code="USAGE_ERROR",
        )


class StageFailedError(AppException):
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(
            status_code=500,
            detail=f"Stage '{stage}' failed: {cause}",
            error_code="STAGE_FAILED",
            extra={"stage": stage, "cause": type(cause).__name__},
        )
        self.stage = stage
