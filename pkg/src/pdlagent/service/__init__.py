"""HTTP service exposing the workflow engine."""

from .app import create_app, default_app
from .manager import ServiceError, SessionManager, WorkflowStore

__all__ = ["ServiceError", "SessionManager", "WorkflowStore", "create_app", "default_app"]
