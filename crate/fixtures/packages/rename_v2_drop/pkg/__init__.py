"""Public package namespace."""

__all__ = ["process"]

from ._core import _process_impl as process
