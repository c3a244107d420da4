from .app import app, create_app, dispatch

__all__ = ["app", "create_app", "dispatch"]
