"""Public namespace for mylib."""

__all__ = ["connect"]

from ._core import connect
