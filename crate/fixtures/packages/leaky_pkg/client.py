"""Client code that reaches across the boundary."""

import mylib._core
import widgetlib

def misuse():
    w = widgetlib.Widget({"mode": "fast"})
    w._impl.start()
    token = w._Widget__token
    return (mylib._core.make_app("x"), token)
