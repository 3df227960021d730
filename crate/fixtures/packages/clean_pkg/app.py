"""Application facade delegating to a hidden engine."""

class _Engine:
    def __init__(self, config):
        self._config = config

    def ping(self):
        return "pong"

    def render(self, template, context):
        return (template, context)

class App:
    def __init__(self, config):
        self._impl = _Engine(config)

    def ping(self):
        return self._impl.ping()

    def render(self, template, context):
        return self._impl.render(template, context)
