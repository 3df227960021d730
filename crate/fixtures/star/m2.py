"""Curated exports that deliberately include an internal name."""

__all__ = ["connect", "_raw_handle", "Session"]

def connect(addr):
    return Session(addr)

def _raw_handle():
    return 99

class Session:
    def __init__(self, addr):
        self.addr = addr

def helper():
    pass
