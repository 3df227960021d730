"""Public namespace."""

import numpy

from ._core import make_app

__all__ = ["make_app", "missing_name"]
