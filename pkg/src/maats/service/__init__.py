"""HTTP service wrapping the simulator and allocator."""

from .app import create_app

__all__ = ["create_app"]
