"""HTTP service wrapping the simulator core."""

from .app import create_app

__all__ = ["create_app"]
