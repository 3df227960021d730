"""Conditional curation with identical branches."""

if True:
    __all__ = ["ping"]
else:
    __all__ = ["ping"]

def ping():
    return "pong"

def trace():
    pass
