"""public module: mylib/__init__.py"""

import importlib

__all__ = ["array", "read_image"]

def __getattr__(name):
    if name == "array":
        from ._core import array
        return array
    if name == "read_image":
        from ._io import read_image
        return read_image
    raise AttributeError(name)
