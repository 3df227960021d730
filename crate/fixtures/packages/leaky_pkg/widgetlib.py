"""Widget facade over an internal implementation."""

class _WidgetImpl:
    def __init__(self, config):
        self._config = config
        self._state = "idle"

    def start(self):
        self._state = "running"

    def status(self):
        return self._state

class Widget:
    def __init__(self, config):
        self._impl = _WidgetImpl(config)

    def start(self):
        return self._impl.start()

    def status(self):
        return self._impl.status()
