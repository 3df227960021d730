"""widget.py -- Public API module"""


class Widget:
    def __init__(self, config):
        import impl._widget as _widget
        self._impl = _widget._WidgetImpl(config)

    def start(self):
        return self._impl.start()

    def stop(self):
        return self._impl.stop()

    def status(self):
        return self._impl.status()
