"""widget.py -- Public API module"""

import impl._widget as _widget

_WidgetImpl = _widget._WidgetImpl


class Widget:
    def __init__(self, config):
        self._impl = _WidgetImpl(config)

    def start(self):
        return self._impl.start()

    def stop(self):
        return self._impl.stop()

    def status(self):
        return self._impl.status()
