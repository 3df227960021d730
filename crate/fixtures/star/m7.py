"""Curated list containing a duplicate."""

__all__ = ["alpha", "beta", "alpha"]

def alpha():
    return 1

def beta():
    return 2
