"""Public package namespace."""

__all__ = ["process", "validate"]

from .core import _process_impl as process
from .core import _validate_impl as validate
