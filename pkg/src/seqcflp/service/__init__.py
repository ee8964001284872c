"""HTTP service wrapping the solver suite."""

from .app import create_app

__all__ = ["create_app"]
