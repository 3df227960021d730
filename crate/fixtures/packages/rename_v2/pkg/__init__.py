"""Public package namespace."""

__all__ = ["process", "validate"]

from ._core import _process_impl as process
from ._core import _validate_impl as validate
