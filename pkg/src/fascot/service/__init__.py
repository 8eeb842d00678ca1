from .app import create_app
from .store import ApiError, ApiErrorCode, HardCaseStore

__all__ = ["ApiError", "ApiErrorCode", "HardCaseStore", "create_app"]
