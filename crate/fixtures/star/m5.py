"""Dunder metadata alongside public constants."""

__version__ = "1.0"
__author__ = "team"

NAME = "m5"
DEFAULTS = {"retries": 3}

def info():
    return NAME
